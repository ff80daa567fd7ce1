#include "qss/report.hpp"

#include <array>
#include <charconv>
#include <cmath>
#include <istream>
#include <ostream>

#include "qss/errors.hpp"

namespace qss::report {
namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

}  // namespace

std::string format_number(double value) {
  if (std::isnan(value)) return "nan";
  if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
  std::array<char, 64> buf{};
  const auto res =
      std::to_chars(buf.data(), buf.data() + buf.size(), value, std::chars_format::general, 10);
  return std::string(buf.data(), res.ptr);
}

void KeyValueReport::add(std::string key, std::string_view value) {
  entries_.emplace_back(std::move(key), std::string(value));
}

void KeyValueReport::add(std::string key, double value) {
  entries_.emplace_back(std::move(key), format_number(value));
}

void KeyValueReport::add(std::string key, std::uint64_t value) {
  entries_.emplace_back(std::move(key), std::to_string(value));
}

void KeyValueReport::add(std::string key, std::int64_t value) {
  entries_.emplace_back(std::move(key), std::to_string(value));
}

void KeyValueReport::add(std::string key, bool value) {
  entries_.emplace_back(std::move(key), value ? "true" : "false");
}

const std::string* KeyValueReport::find(std::string_view key) const {
  for (const Entry& e : entries_) {
    if (e.first == key) return &e.second;
  }
  return nullptr;
}

void KeyValueReport::write(std::ostream& out) const {
  for (const Entry& e : entries_) out << e.first << " = " << e.second << '\n';
}

std::vector<KeyValueReport::Entry> parse_key_values(std::istream& in) {
  std::vector<KeyValueReport::Entry> out;
  std::string raw;
  std::size_t line = 0;
  while (std::getline(in, raw)) {
    ++line;
    const std::string_view text = trim(raw);
    if (text.empty() || text.front() == '#') continue;
    const auto eq = text.find('=');
    if (eq == std::string_view::npos || trim(text.substr(0, eq)).empty()) {
      fail(ErrorKind::input, "line " + std::to_string(line) + ": expected 'key = value'");
    }
    out.emplace_back(std::string(trim(text.substr(0, eq))),
                     std::string(trim(text.substr(eq + 1))));
  }
  return out;
}

void add_budget(KeyValueReport& r, const finite_key::EpsilonBudget& eps) {
  r.add("eps_c", eps.eps_c);
  r.add("eps_pa", eps.eps_pa);
  r.add("eps_a", eps.eps_a);
  r.add("eps_b", eps.eps_b);
  r.add("eps_phase", eps.phase_error_failure());
  r.add("eps_s", eps.secrecy());
}

void add_bound(KeyValueReport& r, std::string_view prefix, const finite_key::PhaseErrorBound& b) {
  const std::string p(prefix);
  r.add(p + "n_x", b.n_x);
  r.add(p + "n_y", b.n_y);
  r.add(p + "m_y", b.m_y);
  r.add(p + "EbY", b.bit_error_y);
  r.add(p + "m_y_upper", b.m_y_expected_upper);
  r.add(p + "EbY_upper", b.bit_error_y_upper);
  r.add(p + "gain", b.gain_for_delta);
  r.add(p + "delta", b.delta);
  r.add(p + "Ep_expected", b.phase_error_expected);
  r.add(p + "m_p_expected", b.m_p_expected);
  r.add(p + "m_p_upper", b.m_p_upper);
  r.add(p + "Ep_bar", b.phase_error_upper);
  r.add(p + "clamped", b.clamped);
}

void add_summary(KeyValueReport& r, const exp_data::ExperimentSummary& s) {
  r.add("mu", s.mu);
  r.add("px", s.px);
  r.add("n_x", s.x.n);
  r.add("m_x", s.x.m);
  r.add("n_y", s.n_y);
  r.add("n_ybc", s.ybc.n);
  r.add("m_ybc", s.ybc.m);
  r.add("n_yac", s.yac.n);
  r.add("m_yac", s.yac.m);
  r.add("EbX", s.bit_error_x);
  r.add("EbY_ybc", s.ybc.rate());
  r.add("EbY_yac", s.yac.rate());
  r.add("EbY", s.bit_error_y);
  r.add("EbY_set", to_string(s.worst_y));
}

void add_key_rate(KeyValueReport& r, const exp_data::KeyRateReport& k) {
  r.add("N", k.pulses);
  r.add("gain", k.gain);
  r.add("bound_set", to_string(k.bound_set));
  add_bound(r, "ybc.", k.bound_ybc);
  add_bound(r, "yac.", k.bound_yac);
  r.add("Ep_bar", k.bound.phase_error_upper);
  r.add("leak_ec", k.key.leak_ec);
  r.add("hash_cost", k.key.hash_cost);
  r.add("ell_real", k.key.real_length);
  r.add("ell", k.key.length);
  r.add("rate_per_pulse", k.rate_per_pulse);
  r.add("rate_bps", k.rate_bps);
  r.add("abort", k.abort);
}

void add_tallies(KeyValueReport& r, const protocol::SiftedTallies& t) {
  r.add("rounds", t.total_rounds);
  r.add("detections", t.detections);
  r.add("n_x", t.n_x);
  r.add("m_x", t.m_x);
  r.add("n_ybc", t.n_ybc);
  r.add("m_ybc", t.m_ybc);
  r.add("n_yac", t.n_yac);
  r.add("m_yac", t.m_yac);
}

std::string rate_csv_header() { return "L_km,mu,px,rate_per_pulse,ell,Ep_bar,EbX,N"; }

std::string rate_csv_line(const keyrate::RatePoint& p) {
  std::string line;
  for (double v : {p.length_km, p.mu, p.px, p.rate_per_pulse, p.ell, p.phase_error_upper,
                   p.bit_error_x, p.pulses}) {
    if (!line.empty()) line += ',';
    line += format_number(v);
  }
  return line;
}

}  // namespace qss::report
