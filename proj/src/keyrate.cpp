#include "qss/keyrate.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <thread>

#include "qss/errors.hpp"
#include "qss/golden_section.hpp"

namespace qss::keyrate {
namespace {

constexpr double kInfeasible = -10.0;

struct Evaluation {
  bool feasible = false;
  double objective = 0.0;
  RatePoint point;
  double delta = 0.0;
  double n_y = 0.0;
};

// Shared by finite_rate and the optimiser objective. Never throws for
// in-range parameters; infeasibility is reported through `feasible`.
Evaluation evaluate(double length_km, double mu, double px, double pulses, ChannelModel ch,
                    double ec_efficiency, const EpsilonBudget& eps) {
  ch.length_km = length_km;
  const double eta = optics::transmittance(ch);
  const double q = optics::gain(mu, eta, ch.dark_count);

  Evaluation ev;
  RatePoint& p = ev.point;
  p.length_km = length_km;
  p.mu = mu;
  p.px = px;
  p.pulses = pulses;
  if (!(q > 0.0)) {
    ev.objective = kInfeasible - 1.0;
    return ev;
  }
  p.bit_error_x = optics::bit_error_x(mu, eta, ch.dark_count, ch.misalignment);
  ev.delta = optics::one_minus_basis_overlap(mu) / (2.0 * q);

  const double sifted_x = px * px * px * q;
  const double sifted_y = px * (1.0 - px) * (1.0 - px) * q;
  double penalty = 0.0;
  if (ev.delta > 0.5) penalty -= ev.delta;
  if (std::isfinite(pulses)) {
    ev.n_y = pulses * sifted_y;
    if (ev.n_y < 1.0) penalty -= 1.0 - ev.n_y;
  }
  if (penalty < 0.0) {
    ev.objective = kInfeasible + penalty;
    return ev;
  }

  ev.feasible = true;
  if (!std::isfinite(pulses)) {
    const double ep = optics::phase_error_from_y(p.bit_error_x, ev.delta).value;
    const double per_pulse =
        sifted_x * (1.0 - ec_efficiency * optics::binary_entropy(p.bit_error_x) -
                    optics::phase_error_entropy(ep));
    ev.objective = per_pulse;
    p.phase_error_upper = ep;
    p.rate_per_pulse = std::max(per_pulse, 0.0);
    p.ell = per_pulse > 0.0 ? std::numeric_limits<double>::infinity() : 0.0;
    p.abort = !(per_pulse > 0.0);
    return ev;
  }

  const double n_x = pulses * sifted_x;
  const double m_y = ev.n_y * p.bit_error_x;
  const finite_key::PhaseErrorBound bound =
      finite_key::phase_error_upper_bound(n_x, ev.n_y, m_y, mu, q, eps);
  const finite_key::KeyLength kl =
      finite_key::key_length(n_x, bound.phase_error_upper, p.bit_error_x, ec_efficiency, eps);
  p.phase_error_upper = bound.phase_error_upper;
  p.ell = static_cast<double>(kl.length);
  p.rate_per_pulse = p.ell / pulses;
  p.abort = kl.length == 0;
  ev.objective = kl.real_length / pulses;
  return ev;
}

struct Search {
  double log_mu = 0.0;
  double px = 0.0;
  double objective = -std::numeric_limits<double>::infinity();
};

}  // namespace

void OptimizationBounds::validate() const {
  if (!(mu_min > 0.0 && mu_min < mu_max)) fail(ErrorKind::domain, "invalid mu bounds");
  if (!(px_min > 0.0 && px_min < px_max && px_max < 1.0)) {
    fail(ErrorKind::domain, "invalid px bounds");
  }
}

double asymptotic_rate(double mu, const ChannelModel& ch, double ec_efficiency) {
  ch.validate();
  const double eta = optics::transmittance(ch);
  const double q = optics::gain(mu, eta, ch.dark_count);
  const double ebx = optics::bit_error_x(mu, eta, ch.dark_count, ch.misalignment);
  const double delta = optics::coin_imbalance(mu, q);
  const double ep = optics::phase_error_from_y(ebx, delta).value;
  const double r =
      q * (1.0 - ec_efficiency * optics::binary_entropy(ebx) - optics::phase_error_entropy(ep));
  return std::max(r, 0.0);
}

RatePoint finite_rate(double length_km, double mu, double px, double pulses, ChannelModel ch,
                      double ec_efficiency, const EpsilonBudget& eps) {
  ch.length_km = length_km;
  ch.validate();
  eps.validate();
  if (!(pulses >= 1.0)) fail(ErrorKind::domain, "pulse count must be >= 1");
  if (!(px > 0.0 && px < 1.0)) fail(ErrorKind::domain, "px must lie in (0,1)");
  if (!(mu > 0.0)) fail(ErrorKind::domain, "mu must be > 0");

  const Evaluation ev = evaluate(length_km, mu, px, pulses, ch, ec_efficiency, eps);
  if (!ev.feasible) {
    if (std::isfinite(pulses) && ev.n_y < 1.0) {
      fail(ErrorKind::zero_count, "expected Y-set size below one; px too large for N");
    }
    fail(ErrorKind::domain, "coin imbalance exceeds 1/2 at this intensity and distance");
  }
  return ev.point;
}

double rate_objective(double length_km, double mu, double px, double pulses,
                      const ChannelModel& ch, double ec_efficiency, const EpsilonBudget& eps) {
  return evaluate(length_km, mu, px, pulses, ch, ec_efficiency, eps).objective;
}

OptimizationResult optimize_params(double length_km, double pulses, const ChannelModel& ch,
                                   double ec_efficiency, const EpsilonBudget& eps,
                                   const OptimizationBounds& bounds) {
  bounds.validate();
  eps.validate();
  ChannelModel at = ch;
  at.length_km = length_km;
  at.validate();

  const double lo_u = std::log10(bounds.mu_min);
  const double hi_u = std::log10(bounds.mu_max);
  constexpr double kTol = 1e-9;

  OptimizationResult result;
  auto objective = [&](double log_mu, double px) {
    const double mu = std::pow(10.0, log_mu);
    const double value = rate_objective(length_km, mu, px, pulses, at, ec_efficiency, eps);
    result.trace.push_back({mu, px, value});
    return value;
  };

  const Search starts[] = {{-3.0, 0.9}, {-4.5, 0.75}, {-2.0, 0.97}};
  for (Search s : starts) {
    s.log_mu = std::clamp(s.log_mu, lo_u, hi_u);
    s.px = std::clamp(s.px, bounds.px_min, bounds.px_max);
    s.objective = objective(s.log_mu, s.px);
    for (int sweep = 0; sweep < 60; ++sweep) {
      const Search before = s;
      const LineSearchResult along_mu = golden_section_maximize(
          [&](double u) { return objective(u, s.px); }, lo_u, hi_u, kTol);
      if (along_mu.value > s.objective) {
        s.log_mu = along_mu.x;
        s.objective = along_mu.value;
      }
      const LineSearchResult along_px = golden_section_maximize(
          [&](double p) { return objective(s.log_mu, p); }, bounds.px_min, bounds.px_max, kTol);
      if (along_px.value > s.objective) {
        s.px = along_px.x;
        s.objective = along_px.value;
      }
      const double improvement = s.objective - before.objective;
      if (improvement <= 1e-12 * std::abs(s.objective) &&
          std::abs(s.log_mu - before.log_mu) < 1e-7 && std::abs(s.px - before.px) < 1e-7) {
        break;
      }
    }
  }

  const auto top = std::max_element(
      result.trace.begin(), result.trace.end(),
      [](const TracePoint& l, const TracePoint& r) { return l.objective < r.objective; });
  result.mu = top->mu;
  result.px = top->px;
  result.objective = top->objective;
  const Evaluation ev = evaluate(length_km, result.mu, result.px, pulses, at, ec_efficiency, eps);
  result.point = ev.point;
  result.rate = ev.feasible ? ev.point.rate_per_pulse : 0.0;
  if (!ev.feasible || ev.point.abort) {
    fail(ErrorKind::all_abort, "no evaluated parameter point yields a positive key length");
  }
  return result;
}

OptimizationResult optimize_asymptotic_mu(const ChannelModel& ch, double ec_efficiency,
                                          const OptimizationBounds& bounds) {
  bounds.validate();
  ch.validate();
  OptimizationResult result;
  const double eta = optics::transmittance(ch);
  auto objective = [&](double log_mu) {
    const double mu = std::pow(10.0, log_mu);
    const double q = optics::gain(mu, eta, ch.dark_count);
    const double ebx = optics::bit_error_x(mu, eta, ch.dark_count, ch.misalignment);
    const double delta = optics::one_minus_basis_overlap(mu) / (2.0 * q);
    double value = kInfeasible - delta;
    if (delta <= 0.5) {
      const double ep = optics::phase_error_from_y(ebx, delta).value;
      value = q * (1.0 - ec_efficiency * optics::binary_entropy(ebx) - optics::phase_error_entropy(ep));
    }
    result.trace.push_back({mu, 0.0, value});
    return value;
  };
  const LineSearchResult best = golden_section_maximize(
      objective, std::log10(bounds.mu_min), std::log10(bounds.mu_max), 1e-12);
  result.mu = std::pow(10.0, best.x);
  result.objective = best.value;
  result.rate = std::max(best.value, 0.0);
  result.point.mu = result.mu;
  result.point.length_km = ch.length_km;
  result.point.rate_per_pulse = result.rate;
  result.point.pulses = std::numeric_limits<double>::infinity();
  result.point.abort = !(best.value > 0.0);
  if (result.point.abort) fail(ErrorKind::all_abort, "asymptotic rate is zero for every mu");
  return result;
}

std::vector<RatePoint> sweep_distance(std::span<const double> lengths_km, double pulses,
                                      const ChannelModel& ch, double ec_efficiency,
                                      const EpsilonBudget& eps, const OptimizationBounds& bounds,
                                      unsigned threads) {
  if (lengths_km.empty()) fail(ErrorKind::domain, "distance grid is empty");
  std::vector<RatePoint> out(lengths_km.size());

  auto solve = [&](std::size_t i) {
    try {
      out[i] = optimize_params(lengths_km[i], pulses, ch, ec_efficiency, eps, bounds).point;
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::all_abort) throw;
      RatePoint p;
      p.length_km = lengths_km[i];
      p.pulses = pulses;
      p.abort = true;
      out[i] = p;
    }
  };

  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  if (threads <= 1 || lengths_km.size() == 1) {
    for (std::size_t i = 0; i < lengths_km.size(); ++i) solve(i);
    return out;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr first_error;
  std::atomic<bool> failed{false};
  {
    std::vector<std::jthread> workers;
    for (unsigned t = 0; t < threads; ++t) {
      workers.emplace_back([&] {
        for (std::size_t i = next++; i < lengths_km.size(); i = next++) {
          try {
            solve(i);
          } catch (...) {
            if (!failed.exchange(true)) first_error = std::current_exception();
          }
        }
      });
    }
  }
  if (first_error) std::rethrow_exception(first_error);
  return out;
}

}  // namespace qss::keyrate
