// qss: command-line front end for the simulator, key-rate curves,
// experiment analysis and the concentration-bound calculator.

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iostream>
#include <limits>
#include <map>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "qss/errors.hpp"
#include "qss/exp_data.hpp"
#include "qss/finite_key.hpp"
#include "qss/keyrate.hpp"
#include "qss/optics.hpp"
#include "qss/protocol.hpp"
#include "qss/report.hpp"

namespace {

using namespace qss;
using report::format_number;
using report::KeyValueReport;

constexpr int kExitOk = 0;
constexpr int kExitAbort = 2;
constexpr int kExitInput = 3;
constexpr int kExitNumeric = 4;

int exit_code(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::input:
    case ErrorKind::domain:
      return kExitInput;
    case ErrorKind::cap_exceeded:
    case ErrorKind::zero_count:
    case ErrorKind::all_abort:
      return kExitAbort;
    case ErrorKind::degenerate_gain:
    case ErrorKind::numerical_degeneracy:
      return kExitNumeric;
  }
  return kExitInput;
}

double parse_real(const std::string& text, const char* name) {
  if (text == "inf" || text == "infinity") return std::numeric_limits<double>::infinity();
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(text, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used == 0 || used != text.size()) {
    fail(ErrorKind::input, std::string("invalid value for ") + name + ": '" + text + "'");
  }
  return v;
}

std::uint64_t parse_count(double v, const char* name) {
  if (!(v >= 0.0 && v <= 9e18 && std::floor(v) == v)) {
    fail(ErrorKind::input, std::string(name) + " must be a non-negative integer");
  }
  return static_cast<std::uint64_t>(v);
}

struct ChannelFlags {
  optics::ChannelModel ch;
  double ec = 1.16;

  void attach(CLI::App* app, double lumped_default) {
    ch.lumped_loss_db = lumped_default;
    app->add_option("--alpha", ch.alpha_db_per_km, "Fibre loss, dB/km");
    app->add_option("--det-eff", ch.det_efficiency, "Detector efficiency");
    app->add_option("--dark", ch.dark_count, "Dark-count probability per pulse");
    app->add_option("--ed", ch.misalignment, "Misalignment error");
    app->add_option("--ec", ec, "Error-correction efficiency f_e");
  }
};

struct EpsFlags {
  finite_key::EpsilonBudget eps;

  void attach(CLI::App* app) {
    app->add_option("--eps-c", eps.eps_c, "Correctness failure");
    app->add_option("--eps-pa", eps.eps_pa, "Privacy-amplification failure");
    app->add_option("--eps-a", eps.eps_a, "Observed-to-expected failure");
    app->add_option("--eps-b", eps.eps_b, "Expected-to-observed failure");
  }
};

// Writes "# key = value" for every option of `sub` as it will be used.
void echo_config(std::ostream& out, const CLI::App* sub) {
  out << "# command = " << sub->get_name() << '\n';
  for (const CLI::Option* opt : sub->get_options()) {
    const std::string name = opt->get_single_name();
    if (name.empty() || name == "help" || name == "config") continue;
    std::string value;
    if (opt->count() > 0) {
      const auto& res = opt->results();
      for (std::size_t i = 0; i < res.size(); ++i) value += (i ? " " : "") + res[i];
      if (opt->get_expected_min() == 0 && res.size() == 1 && res[0] == "1") value = "true";
    } else {
      value = opt->get_default_str();
      if (value.empty() && opt->get_expected_min() == 0) value = "false";
    }
    out << "# " << name << " = " << value << '\n';
  }
}

// Output goes to --output when given, otherwise stdout.
class Sink {
 public:
  explicit Sink(const std::string& path) {
    if (!path.empty()) {
      file_ = std::make_unique<std::ofstream>(path);
      if (!*file_) fail(ErrorKind::input, "cannot write " + path);
    }
  }
  std::ostream& out() { return file_ ? *file_ : std::cout; }

 private:
  std::unique_ptr<std::ofstream> file_;
};

// ---------------------------------------------------------------- simulate

struct SimulateFlags {
  optics::SourceParams src;
  ChannelFlags chan;
  double rounds = 1e7;
  std::uint64_t seed = 0;
  double nx = 0, nybc = 0, nyac = 0;
  double cap = 0;
  std::string trace_path;
  std::string output;
  bool noiseless = false;
  unsigned threads = 0;
};

void add_rates(KeyValueReport& r, const protocol::ProtocolRun& run, const SimulateFlags& f,
               const optics::ChannelModel& ch) {
  const protocol::SiftedTallies& t = run.tallies;
  const double rounds = static_cast<double>(t.total_rounds);
  const double eta = optics::transmittance(ch);
  const double q = optics::gain(f.src.intensity, eta, ch.dark_count);
  const double px = f.src.px;
  auto ratio = [](std::uint64_t num, std::uint64_t den) {
    return den == 0 ? 0.0 : static_cast<double>(num) / static_cast<double>(den);
  };
  r.add("eta", eta);
  r.add("gain_empirical", rounds > 0 ? t.detections / rounds : 0.0);
  r.add("gain_analytic", q);
  r.add("EbX_empirical", ratio(t.m_x, t.n_x));
  r.add("EbX_analytic", q > 0.0 ? optics::bit_error_x(f.src.intensity, eta, ch.dark_count,
                                                      ch.misalignment)
                                : 0.0);
  r.add("EbY_ybc_empirical", ratio(t.m_ybc, t.n_ybc));
  r.add("EbY_yac_empirical", ratio(t.m_yac, t.n_yac));
  r.add("frac_x_empirical", rounds > 0 ? t.n_x / rounds : 0.0);
  r.add("frac_x_analytic", px * px * px * q);
  r.add("frac_ybc_empirical", rounds > 0 ? t.n_ybc / rounds : 0.0);
  r.add("frac_yac_empirical", rounds > 0 ? t.n_yac / rounds : 0.0);
  r.add("frac_y_analytic", px * (1.0 - px) * (1.0 - px) * q);

  auto mismatches = [](const protocol::KeyTriples& k) {
    std::uint64_t n = 0;
    for (std::size_t i = 0; i < k.size(); ++i) n += k.c[i] != (k.a[i] ^ k.b[i]);
    return n;
  };
  r.add("mismatch_x", mismatches(run.keys.x));
  r.add("mismatch_ybc", mismatches(run.keys.ybc));
  r.add("mismatch_yac", mismatches(run.keys.yac));
  r.add("correlation_x", protocol::verify_correlation(run.keys.x.a, run.keys.x.b, run.keys.x.c));
}

int run_simulate(const CLI::App* sub, SimulateFlags& f) {
  optics::ChannelModel ch = f.chan.ch;
  if (f.noiseless) {
    ch.dark_count = 0.0;
    ch.misalignment = 0.0;
  }
  ch.validate();
  f.src.validate();

  std::unique_ptr<std::ofstream> trace_file;
  std::function<void(const protocol::RoundRecord&)> trace;
  if (!f.trace_path.empty()) {
    trace_file = std::make_unique<std::ofstream>(f.trace_path);
    if (!*trace_file) fail(ErrorKind::input, "cannot write " + f.trace_path);
    *trace_file << protocol::trace_header() << '\n';
    trace = [&](const protocol::RoundRecord& rec) {
      *trace_file << protocol::trace_line(rec) << '\n';
    };
  }

  Sink sink(f.output);
  std::ostream& out = sink.out();
  echo_config(out, sub);

  const bool threshold_mode = f.nx > 0 || f.nybc > 0 || f.nyac > 0;
  KeyValueReport r;
  int code = kExitOk;
  protocol::ProtocolRun run;
  if (threshold_mode) {
    const protocol::Thresholds th{std::max<std::uint64_t>(parse_count(f.nx, "--nx"), 1),
                                  std::max<std::uint64_t>(parse_count(f.nybc, "--nybc"), 1),
                                  std::max<std::uint64_t>(parse_count(f.nyac, "--nyac"), 1)};
    protocol::RunOptions opts;
    opts.round_cap = parse_count(f.cap, "--cap");
    opts.trace = trace;
    r.add("mode", "thresholds");
    try {
      run = protocol::run_protocol(f.src, ch, th, f.seed, opts);
      r.add("status", "complete");
    } catch (const protocol::CapExceeded& e) {
      run = e.partial();
      r.add("status", "cap_exceeded");
      std::cerr << "qss: " << e.what() << '\n';
      code = kExitAbort;
    }
    run.tallies.total_rounds = run.rounds_used;
  } else {
    const std::uint64_t rounds = parse_count(f.rounds, "--rounds");
    if (rounds == 0) fail(ErrorKind::input, "--rounds must be positive");
    r.add("mode", "rounds");
    run = protocol::simulate_rounds(f.src, ch, rounds, f.seed, f.threads, true, trace);
    r.add("status", "complete");
  }
  report::add_tallies(r, run.tallies);
  add_rates(r, run, f, ch);
  r.write(out);
  return code;
}

// ------------------------------------------------------------------- sweep

struct SweepFlags {
  ChannelFlags chan;
  EpsFlags eps;
  std::string pulses = "1e10";
  double l_min = 0.0;
  double l_max = 260.0;
  double step = 5.0;
  unsigned threads = 0;
  std::string output;
};

int run_sweep(const CLI::App* sub, SweepFlags& f) {
  const double pulses = parse_real(f.pulses, "--N");
  if (!(f.step > 0.0) || !(f.l_max >= f.l_min) || !(f.l_min >= 0.0)) {
    fail(ErrorKind::input, "distance grid needs 0 <= Lmin <= Lmax and step > 0");
  }
  std::vector<double> grid;
  const auto count = static_cast<std::size_t>(std::floor((f.l_max - f.l_min) / f.step + 1e-9)) + 1;
  for (std::size_t i = 0; i < count; ++i) grid.push_back(f.l_min + f.step * i);

  const std::vector<keyrate::RatePoint> points =
      keyrate::sweep_distance(grid, pulses, f.chan.ch, f.chan.ec, f.eps.eps, {}, f.threads);

  Sink sink(f.output);
  std::ostream& out = sink.out();
  echo_config(out, sub);
  out << report::rate_csv_header() << '\n';
  bool any_key = false;
  for (const keyrate::RatePoint& p : points) {
    out << report::rate_csv_line(p) << '\n';
    any_key = any_key || !p.abort;
  }
  if (!any_key) {
    std::cerr << "qss: no distance on the grid yields a key\n";
    return kExitAbort;
  }
  return kExitOk;
}

// ----------------------------------------------------------------- analyze

struct AnalyzeFlags {
  std::vector<std::string> files;
  EpsFlags eps;
  double pulses = 5e10;
  double rep_rate = 1e8;
  double ec = 1.16;
  std::optional<double> px;
  std::optional<double> mu;
  bool analytic_gain = false;
  double loss_db = 30.0;
  std::string output;
};

struct Analysis {
  std::string file;
  exp_data::ExperimentSummary summary;
  exp_data::KeyRateReport rate;
};

Analysis analyze_file(const std::string& file, const AnalyzeFlags& f) {
  const std::optional<exp_data::FixtureInfo> info = exp_data::parse_fixture_name(file);
  const std::optional<double> mu = f.mu ? f.mu : info ? std::optional(info->mu) : std::nullopt;
  const std::optional<double> px = f.px ? f.px : info ? std::optional(info->px) : std::nullopt;
  if (!mu || !px) {
    fail(ErrorKind::input, file + ": cannot infer mu/px from the file name; pass --mu and --px");
  }
  Analysis a;
  a.file = file;
  const std::vector<exp_data::CountRow> rows = exp_data::read_counts_file(file);
  a.summary = exp_data::tally_sets(rows, *mu, *px);

  exp_data::AnalysisConfig cfg;
  cfg.pulses = f.pulses;
  cfg.repetition_hz = f.rep_rate;
  cfg.ec_efficiency = f.ec;
  cfg.eps = f.eps.eps;
  cfg.gain_source = f.analytic_gain ? exp_data::GainSource::analytic
                                    : exp_data::GainSource::observed;
  cfg.channel.lumped_loss_db = f.loss_db;
  a.rate = exp_data::experiment_skr(a.summary, cfg);
  return a;
}

int run_analyze(const CLI::App* sub, AnalyzeFlags& f) {
  std::vector<Analysis> results;
  for (const std::string& file : f.files) results.push_back(analyze_file(file, f));

  Sink sink(f.output);
  std::ostream& out = sink.out();
  echo_config(out, sub);
  bool any_abort = false;
  for (const Analysis& a : results) any_abort = any_abort || a.rate.abort;

  if (results.size() == 1) {
    const Analysis& a = results.front();
    KeyValueReport r;
    r.add("file", a.file);
    report::add_summary(r, a.summary);
    r.add("gain_source", exp_data::to_string(f.analytic_gain ? exp_data::GainSource::analytic
                                                             : exp_data::GainSource::observed));
    report::add_budget(r, f.eps.eps);
    report::add_key_rate(r, a.rate);
    r.add("note", "rate_per_pulse normalises by the total pulse count N");
    r.write(out);
  } else {
    std::stable_sort(results.begin(), results.end(), [](const Analysis& l, const Analysis& r) {
      if (l.summary.px != r.summary.px) return l.summary.px > r.summary.px;
      return l.summary.mu > r.summary.mu;
    });
    out << "px,mu,EbX_pct,EbY_pct,Ep_pct,n_x,n_y,SKR,bps,file\n";
    for (const Analysis& a : results) {
      out << format_number(a.summary.px) << ',' << format_number(a.summary.mu) << ','
          << format_number(100.0 * a.summary.bit_error_x) << ','
          << format_number(100.0 * a.summary.bit_error_y) << ','
          << format_number(100.0 * a.rate.bound.phase_error_upper) << ',' << a.summary.x.n
          << ',' << a.summary.n_y << ',' << format_number(a.rate.rate_per_pulse) << ','
          << format_number(a.rate.rate_bps) << ',' << a.file << '\n';
    }
  }
  return any_abort ? kExitAbort : kExitOk;
}

// -------------------------------------------------------------------- kato

struct KatoFlags {
  double k = 0.0;
  std::string lam;
  double eps = 1e-10;
  std::string dir = "upper";
  bool compare_azuma = false;
  std::string output;
};

int run_kato(const CLI::App* sub, KatoFlags& f) {
  const double lambda = f.lam == "k/2" ? f.k / 2.0 : parse_real(f.lam, "--lam");
  const auto dir =
      f.dir == "upper" ? finite_key::Direction::upper : finite_key::Direction::lower;
  const finite_key::KatoCoefficients closed = dir == finite_key::Direction::upper
                                                  ? finite_key::kato_upper_coeffs(lambda, f.k, f.eps)
                                                  : finite_key::kato_lower_coeffs(lambda, f.k, f.eps);
  const finite_key::KatoCoefficients numeric =
      finite_key::kato_minimize_numeric(lambda, f.k, f.eps, dir);

  Sink sink(f.output);
  std::ostream& out = sink.out();
  echo_config(out, sub);
  KeyValueReport r;
  r.add("k", f.k);
  r.add("lambda", lambda);
  r.add("eps", f.eps);
  r.add("dir", f.dir);
  r.add("a", closed.a);
  r.add("b", closed.b);
  r.add("deviation", closed.deviation);
  r.add("eps_implied", closed.epsilon);
  r.add("bound", finite_key::observed_to_expected(lambda, f.k, f.eps, dir));
  r.add("numeric_a", numeric.a);
  r.add("numeric_deviation", numeric.deviation);
  r.add("check_delta", std::abs(closed.deviation - numeric.deviation) / numeric.deviation);
  if (f.compare_azuma) {
    const double fixed = finite_key::fixed_deviation(f.k, f.eps);
    const double azuma = finite_key::azuma_deviation(f.k, f.eps);
    r.add("deviation_a0", fixed);
    r.add("deviation_azuma", azuma);
    r.add("ratio_azuma_over_kato", azuma / closed.deviation);
  }
  r.write(out);
  return kExitOk;
}

// ------------------------------------------------------------ config files

// Inserts `--key value` for each config entry whose flag is absent from the
// command line, so flags override the file and the file overrides defaults.
std::vector<std::string> apply_config(const std::vector<std::string>& args, CLI::App& app) {
  std::string config_path;
  std::size_t sub_pos = args.size();
  for (std::size_t i = 0; i < args.size(); ++i) {
    if (args[i] == "--config" && i + 1 < args.size()) config_path = args[i + 1];
    if (args[i].rfind("--config=", 0) == 0) config_path = args[i].substr(9);
    if (sub_pos == args.size() && app.get_subcommand_no_throw(args[i]) != nullptr) sub_pos = i;
  }
  if (config_path.empty()) return args;
  if (sub_pos == args.size()) fail(ErrorKind::input, "--config needs a subcommand");
  const CLI::App* sub = app.get_subcommand(args[sub_pos]);

  std::ifstream in(config_path);
  if (!in) fail(ErrorKind::input, "cannot open config " + config_path);
  std::vector<std::string> extra;
  for (const auto& [key, value] : report::parse_key_values(in)) {
    const std::string flag = "--" + key;
    const CLI::Option* opt = sub->get_option_no_throw(flag);
    if (opt == nullptr) {
      fail(ErrorKind::input, "config key '" + key + "' is not an option of " + sub->get_name());
    }
    const bool given = std::any_of(args.begin(), args.end(), [&](const std::string& a) {
      return a == flag || a.rfind(flag + "=", 0) == 0;
    });
    if (given) continue;
    if (opt->get_expected_min() == 0) {
      if (value == "true" || value == "1") extra.push_back(flag);
      else if (value != "false" && value != "0") {
        fail(ErrorKind::input, "config key '" + key + "' expects true or false");
      }
      continue;
    }
    extra.push_back(flag);
    extra.push_back(value);
  }
  std::vector<std::string> out(args.begin(), args.begin() + static_cast<long>(sub_pos) + 1);
  out.insert(out.end(), extra.begin(), extra.end());
  out.insert(out.end(), args.begin() + static_cast<long>(sub_pos) + 1, args.end());
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Phase-encoded quantum secret sharing: simulation and finite-key analysis"};
  app.require_subcommand(1);
  app.option_defaults()->always_capture_default();
  std::string config_path;

  SimulateFlags sim;
  CLI::App* simulate = app.add_subcommand("simulate", "Monte Carlo run of the protocol");
  simulate->add_option("--config", config_path, "Flat key = value file");
  simulate->add_option("--mu", sim.src.intensity, "Mean photon number");
  simulate->add_option("--px", sim.src.px, "X-basis probability");
  simulate->add_option("--loss-db", sim.chan.ch.lumped_loss_db, "Extra Alice-Bob loss in dB, split evenly between the arms");
  simulate->add_option("--length", sim.chan.ch.length_km, "Fibre length Alice-Bob, km");
  sim.chan.attach(simulate, 0.0);
  simulate->add_option("--rounds", sim.rounds, "Number of rounds (fixed-length mode)");
  simulate->add_option("--seed", sim.seed, "Random seed")->required();
  simulate->add_option("--nx", sim.nx, "X-set threshold (threshold mode)");
  simulate->add_option("--nybc", sim.nybc, "YBC-set threshold (threshold mode)");
  simulate->add_option("--nyac", sim.nyac, "YAC-set threshold (threshold mode)");
  simulate->add_option("--cap", sim.cap, "Round cap in threshold mode (0 = 100x expected)");
  simulate->add_option("--trace", sim.trace_path, "Per-round CSV trace file");
  simulate->add_flag("--noiseless", sim.noiseless, "Zero dark counts and misalignment");
  simulate->add_option("--threads", sim.threads, "Worker threads (0 = all cores)");
  simulate->add_option("--output", sim.output, "Report file (default stdout)");

  SweepFlags swp;
  CLI::App* sweep = app.add_subcommand("sweep", "Optimised key rate against distance");
  sweep->add_option("--config", config_path, "Flat key = value file");
  sweep->add_option("--N", swp.pulses, "Pulses sent, or inf");
  swp.chan.attach(sweep, 0.0);
  sweep->add_option("--Lmin", swp.l_min, "First distance, km");
  sweep->add_option("--Lmax", swp.l_max, "Last distance, km");
  sweep->add_option("--step", swp.step, "Distance step, km");
  swp.eps.attach(sweep);
  sweep->add_option("--threads", swp.threads, "Worker threads (0 = all cores)");
  sweep->add_option("--output", swp.output, "CSV file (default stdout)");

  AnalyzeFlags ana;
  CLI::App* analyze = app.add_subcommand("analyze", "Key rate from detection-count tables");
  analyze->add_option("--config", config_path, "Flat key = value file");
  analyze->add_option("files", ana.files, "Count tables")->required();
  analyze->add_option("--N", ana.pulses, "Pulses sent per table");
  analyze->add_option("--rep-rate", ana.rep_rate, "Repetition rate, Hz");
  analyze->add_option("--ec", ana.ec, "Error-correction efficiency f_e");
  analyze->add_option("--px", ana.px, "X-basis probability (default: from file name)");
  analyze->add_option("--mu", ana.mu, "Intensity (default: from file name)");
  analyze->add_flag("--analytic-gain", ana.analytic_gain, "Use the model gain for Delta");
  analyze->add_option("--loss-db", ana.loss_db, "Lumped loss for --analytic-gain");
  ana.eps.attach(analyze);
  analyze->add_option("--output", ana.output, "Report file (default stdout)");

  KatoFlags kt;
  CLI::App* kato = app.add_subcommand("kato", "Optimal Kato coefficients for one sum");
  kato->add_option("--config", config_path, "Flat key = value file");
  kato->add_option("--k", kt.k, "Number of trials")->required();
  kato->add_option("--lam", kt.lam, "Observed sum, or k/2")->required();
  kato->add_option("--eps", kt.eps, "Failure probability");
  kato->add_option("--dir", kt.dir, "upper or lower")
      ->check(CLI::IsMember({"upper", "lower"}));
  kato->add_flag("--compare-azuma", kt.compare_azuma, "Also print a=0 and Azuma deviations");
  kato->add_option("--output", kt.output, "Report file (default stdout)");

  try {
    std::vector<std::string> args(argv + 1, argv + argc);
    args = apply_config(args, app);
    std::reverse(args.begin(), args.end());
    app.parse(args);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitInput;
  } catch (const Error& e) {
    std::cerr << "qss: " << e.what() << '\n';
    return exit_code(e.kind());
  }

  try {
    if (*simulate) return run_simulate(simulate, sim);
    if (*sweep) return run_sweep(sweep, swp);
    if (*analyze) return run_analyze(analyze, ana);
    if (*kato) return run_kato(kato, kt);
  } catch (const Error& e) {
    std::cerr << "qss: " << to_string(e.kind()) << ": " << e.what() << '\n';
    return exit_code(e.kind());
  } catch (const std::exception& e) {
    std::cerr << "qss: " << e.what() << '\n';
    return kExitInput;
  }
  return kExitInput;
}
