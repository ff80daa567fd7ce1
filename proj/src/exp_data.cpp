#include "qss/exp_data.hpp"

#include <array>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <regex>
#include <set>
#include <sstream>
#include <tuple>

#include "qss/errors.hpp"

namespace qss::exp_data {
namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

[[noreturn]] void malformed(std::size_t line, const std::string& what) {
  fail(ErrorKind::input, "line " + std::to_string(line) + ": " + what);
}

template <class T>
T parse_field(std::string_view field, std::size_t line, const char* name) {
  T value{};
  const char* end = field.data() + field.size();
  const auto [ptr, ec] = std::from_chars(field.data(), end, value);
  if (field.empty() || ec != std::errc() || ptr != end) {
    malformed(line, std::string("invalid ") + name + " '" + std::string(field) + "'");
  }
  return value;
}

Basis basis_of(int code) { return code % 2 == 0 ? Basis::X : Basis::Y; }

}  // namespace

std::vector<CountRow> parse_counts(std::istream& in) {
  std::vector<CountRow> rows;
  std::set<std::tuple<int, int, int>> seen;
  std::string raw;
  std::size_t line = 0;
  bool header_seen = false;
  while (std::getline(in, raw)) {
    ++line;
    const std::string_view text = trim(raw);
    if (text.empty()) continue;
    if (!header_seen) {
      std::string compact;
      for (char ch : text) {
        if (ch != ' ' && ch != '\t') compact += ch;
      }
      if (compact != kCountsHeader) {
        malformed(line, "expected header '" + std::string(kCountsHeader) + "'");
      }
      header_seen = true;
      continue;
    }

    std::array<std::string_view, 5> fields;
    std::size_t count = 0;
    std::string_view rest = text;
    while (true) {
      const auto comma = rest.find(',');
      if (count == fields.size()) malformed(line, "expected 5 fields");
      fields[count++] = trim(rest.substr(0, comma));
      if (comma == std::string_view::npos) break;
      rest.remove_prefix(comma + 1);
    }
    if (count != fields.size()) malformed(line, "expected 5 fields");

    CountRow row;
    row.phase_a = parse_field<int>(fields[0], line, "phase_a");
    row.phase_b = parse_field<int>(fields[1], line, "phase_b");
    row.phase_c = parse_field<int>(fields[2], line, "phase_c");
    for (int code : {row.phase_a, row.phase_b, row.phase_c}) {
      if (code < 0 || code > 3) malformed(line, "phase codes must lie in 0..3");
    }
    row.spd1 = parse_field<std::uint64_t>(fields[3], line, "spd1");
    row.spd2 = parse_field<std::uint64_t>(fields[4], line, "spd2");
    if (!seen.emplace(row.phase_a, row.phase_b, row.phase_c).second) {
      malformed(line, "duplicate phase triple");
    }
    rows.push_back(row);
  }
  return rows;
}

std::vector<CountRow> read_counts_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorKind::input, "cannot open " + path);
  try {
    return parse_counts(in);
  } catch (const Error& e) {
    fail(e.kind(), path + ": " + e.what());
  }
}

void write_counts(std::ostream& out, std::span<const CountRow> rows) {
  out << kCountsHeader << '\n';
  for (const CountRow& r : rows) {
    out << r.phase_a << ',' << r.phase_b << ',' << r.phase_c << ',' << r.spd1 << ',' << r.spd2
        << '\n';
  }
}

RowClass classify_phases(int phase_a, int phase_b, int phase_c) {
  RowClass cls;
  cls.basis_a = basis_of(phase_a);
  cls.basis_b = basis_of(phase_b);
  cls.basis_c = basis_of(phase_c);
  cls.tag = sift(cls.basis_a, cls.basis_b, cls.basis_c);
  // X: phase = s pi. Y: phase = (3/2 - s) pi, so pi/2 carries 1.
  auto bit_of = [](int code) -> std::uint8_t {
    return code % 2 == 0 ? static_cast<std::uint8_t>(code / 2)
                         : static_cast<std::uint8_t>(code == 1 ? 1 : 0);
  };
  cls.s_a = bit_of(phase_a);
  cls.s_b = bit_of(phase_b);
  cls.c_flip = cls.basis_c == Basis::X ? phase_c == 2 : phase_c == 3;
  cls.phase_difference = QuarterTurns(phase_b + phase_c - phase_a);
  cls.expected_detector = cls.phase_difference.value() == 0 ? 1 : 2;
  return cls;
}

RowClass classify_row(const CountRow& row) {
  for (int code : {row.phase_a, row.phase_b, row.phase_c}) {
    if (code < 0 || code > 3) fail(ErrorKind::input, "phase codes must lie in 0..3");
  }
  const RowClass cls = classify_phases(row.phase_a, row.phase_b, row.phase_c);
  if (cls.tag == SetTag::discard) {
    fail(ErrorKind::input, "inconsistent phase triple (" + std::to_string(row.phase_a) + "," +
                               std::to_string(row.phase_b) + "," +
                               std::to_string(row.phase_c) + ") belongs to no sifted set");
  }
  return cls;
}

std::uint64_t expected_clicks(const CountRow& row, const RowClass& cls) noexcept {
  return cls.expected_detector == 1 ? row.spd1 : row.spd2;
}

std::uint64_t error_clicks(const CountRow& row, const RowClass& cls) noexcept {
  return cls.expected_detector == 1 ? row.spd2 : row.spd1;
}

ExperimentSummary tally_sets(std::span<const CountRow> rows, double mu, double px) {
  ExperimentSummary s;
  s.mu = mu;
  s.px = px;
  for (const CountRow& row : rows) {
    const RowClass cls = classify_row(row);
    SetCounts& target = cls.tag == SetTag::x_set     ? s.x
                        : cls.tag == SetTag::ybc_set ? s.ybc
                                                     : s.yac;
    target.n += row.spd1 + row.spd2;
    target.m += error_clicks(row, cls);
  }
  if (s.x.n == 0) fail(ErrorKind::zero_count, "X set has no detections");
  if (s.ybc.n == 0) fail(ErrorKind::zero_count, "YBC set has no detections");
  if (s.yac.n == 0) fail(ErrorKind::zero_count, "YAC set has no detections");
  s.n_y = s.ybc.n + s.yac.n;
  s.bit_error_x = s.x.rate();
  s.worst_y = s.yac.rate() > s.ybc.rate() ? SetTag::yac_set : SetTag::ybc_set;
  s.bit_error_y = std::max(s.ybc.rate(), s.yac.rate());
  return s;
}

std::optional<FixtureInfo> parse_fixture_name(std::string_view path) {
  const auto slash = path.find_last_of("/\\");
  const std::string name(slash == std::string_view::npos ? path : path.substr(slash + 1));
  static const std::regex pattern(R"(tableIII([abc])_mu([0-9.]+(?:[eE][-+]?[0-9]+)?)\.csv)");
  std::smatch m;
  if (!std::regex_match(name, m, pattern)) return std::nullopt;
  FixtureInfo info;
  info.table = m[1].str()[0];
  info.px = info.table == 'a' ? 0.9 : info.table == 'b' ? 0.8 : 0.7;
  info.mu = std::stod(m[2].str());
  return info;
}

std::string_view to_string(GainSource source) noexcept {
  return source == GainSource::observed ? "observed" : "analytic";
}

double observed_gain(const ExperimentSummary& summary, double pulses) {
  const double px = summary.px;
  const double sent = pulses * (px * px * px + 2.0 * px * (1.0 - px) * (1.0 - px));
  return static_cast<double>(summary.x.n + summary.n_y) / sent;
}

KeyRateReport experiment_skr(const ExperimentSummary& summary, const AnalysisConfig& config) {
  config.eps.validate();
  if (!(summary.px > 0.0 && summary.px < 1.0)) fail(ErrorKind::domain, "px must lie in (0,1)");
  if (!(summary.mu > 0.0)) fail(ErrorKind::domain, "mu must be > 0");
  const double detections = static_cast<double>(summary.x.n + summary.n_y);
  if (!(config.pulses >= detections)) {
    fail(ErrorKind::domain, "pulse count is smaller than the number of detections");
  }

  KeyRateReport r;
  r.pulses = config.pulses;
  if (config.gain_source == GainSource::observed) {
    r.gain = observed_gain(summary, config.pulses);
    if (r.gain > 1.0) {
      fail(ErrorKind::domain, "observed gain exceeds 1: pulse count too small for these detections");
    }
  } else {
    const double eta = optics::transmittance(config.channel);
    r.gain = optics::gain(summary.mu, eta, config.channel.dark_count);
  }

  const auto n_x = static_cast<double>(summary.x.n);
  auto bound_for = [&](const SetCounts& y) {
    return finite_key::phase_error_upper_bound(n_x, static_cast<double>(y.n),
                                               static_cast<double>(y.m), summary.mu, r.gain,
                                               config.eps);
  };
  r.bound_ybc = bound_for(summary.ybc);
  r.bound_yac = bound_for(summary.yac);
  if (r.bound_yac.phase_error_upper > r.bound_ybc.phase_error_upper) {
    r.bound = r.bound_yac;
    r.bound_set = SetTag::yac_set;
  } else {
    r.bound = r.bound_ybc;
    r.bound_set = SetTag::ybc_set;
  }

  r.key = finite_key::key_length(n_x, r.bound.phase_error_upper, summary.bit_error_x,
                                 config.ec_efficiency, config.eps);
  r.rate_per_pulse = static_cast<double>(r.key.length) / config.pulses;
  r.rate_bps = r.rate_per_pulse * config.repetition_hz;
  r.abort = r.key.length == 0;
  return r;
}

}  // namespace qss::exp_data
