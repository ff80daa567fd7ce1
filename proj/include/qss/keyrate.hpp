#pragma once

#include <span>
#include <vector>

#include "qss/finite_key.hpp"
#include "qss/optics.hpp"

namespace qss::keyrate {

using finite_key::EpsilonBudget;
using optics::ChannelModel;

/// One point of a key-rate curve. For an infinite pulse count `ell` and
/// `pulses` are +inf and `rate_per_pulse` is the asymptotic limit.
struct RatePoint {
  double length_km = 0.0;
  double mu = 0.0;
  double px = 0.0;
  double rate_per_pulse = 0.0;
  double ell = 0.0;
  double phase_error_upper = 0.0;
  double bit_error_x = 0.0;
  double pulses = 0.0;
  bool abort = true;
};

struct TracePoint {
  double mu = 0.0;
  double px = 0.0;
  double objective = 0.0;
};

struct OptimizationBounds {
  double mu_min = 1e-6;
  double mu_max = 1e-1;
  double px_min = 0.5;
  double px_max = 0.99;

  void validate() const;
};

struct OptimizationResult {
  double mu = 0.0;
  double px = 0.0;
  double rate = 0.0;       // floor(ell) / N at the best point
  double objective = 0.0;  // best unfloored objective; the maximum over `trace`
  RatePoint point;
  std::vector<TracePoint> trace;
};

/// R = Q[1 - f_e H(E_b^X) - H(E_p)], clamped at 0, with E_b^Y = E_b^X.
/// `ch.length_km` selects the distance.
double asymptotic_rate(double mu, const ChannelModel& ch, double ec_efficiency);

/// Finite-key point from expected counts: n_X = N px^3 Q, each Y set
/// N px (1-px)^2 Q, m_Y = n_Y E_b^X. `pulses` may be +inf.
/// Throws Error(zero_count) when the expected Y-set size is below one and
/// Error(domain) when the coin imbalance exceeds 1/2.
RatePoint finite_rate(double length_km, double mu, double px, double pulses, ChannelModel ch,
                      double ec_efficiency, const EpsilonBudget& eps);

/// Smooth objective behind the optimiser: unfloored key length per pulse
/// (may be negative). Infeasible points map to values below -10 that fall
/// towards the feasible region, so line searches are pulled back into it.
double rate_objective(double length_km, double mu, double px, double pulses,
                      const ChannelModel& ch, double ec_efficiency, const EpsilonBudget& eps);

/// Coordinate descent over (log10 mu, px) with golden-section line
/// searches, restarted from three fixed starting points.
/// Throws Error(all_abort) when no evaluated point yields a key.
OptimizationResult optimize_params(double length_km, double pulses, const ChannelModel& ch,
                                   double ec_efficiency, const EpsilonBudget& eps,
                                   const OptimizationBounds& bounds = {});

/// Maximises asymptotic_rate over mu alone (it does not depend on px).
OptimizationResult optimize_asymptotic_mu(const ChannelModel& ch, double ec_efficiency,
                                          const OptimizationBounds& bounds = {});

/// Optimised point per distance. Points with no key are reported with
/// rate 0 and abort set. Output order follows `lengths_km`.
std::vector<RatePoint> sweep_distance(std::span<const double> lengths_km, double pulses,
                                      const ChannelModel& ch, double ec_efficiency,
                                      const EpsilonBudget& eps,
                                      const OptimizationBounds& bounds = {},
                                      unsigned threads = 1);

}  // namespace qss::keyrate
