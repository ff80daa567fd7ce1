#pragma once

// Concentration bounds for sums of sequentially dependent [0,1] variables
// (Kato's inequality in both directions, the a = 0 special case and the
// Azuma baseline) and the pipeline that turns observed Y-basis error counts
// into an upper bound on the X-basis phase error rate and a key length.
//
// Counts are doubles throughout: the experiment feeds integers, while the
// key-rate model feeds expected (fractional) counts.

#include <cstdint>

namespace qss::finite_key {

/// Failure probabilities. `phase_error_failure()` is the total failure of
/// the two concentration steps used by the phase-error pipeline.
struct EpsilonBudget {
  double eps_c = 1e-10;   // correctness (error verification hash)
  double eps_pa = 1e-10;  // privacy amplification
  double eps_a = 1e-10;   // observed -> expected
  double eps_b = 1e-10;   // expected -> observed

  double phase_error_failure() const noexcept { return eps_a + eps_b; }
  double secrecy() const noexcept;  // sqrt(eps) + eps_PA

  void validate() const;
};

enum class Direction { upper, lower };

struct KatoCoefficients {
  double a = 0.0;
  double b = 0.0;
  double deviation = 0.0;  // [b + a(2 Lambda/k - 1)] sqrt(k)
  double epsilon = 0.0;    // failure probability implied by (a, b)
};

/// exp[-2(b^2 - a^2) / (1 +/- 4a/(3 sqrt k))^2], `+` for the upper form.
double kato_failure_probability(double a, double b, double k, Direction dir);

double kato_deviation(double a, double b, double lambda, double k);

/// Smallest b >= |a| meeting failure probability `eps` for the given a.
double kato_b_for(double a, double k, double eps, Direction dir);

/// Closed-form optimal (a1, b1) for bounding the expected sum from above.
/// Throws Error(domain) unless 0 <= lambda <= k, k >= 1, eps in (0,1), and
/// Error(numerical_degeneracy) if the closed form is not finite.
KatoCoefficients kato_upper_coeffs(double lambda, double k, double eps);

/// Closed-form optimal (a2, b2) for the lower bound. Satisfies
/// a2(lambda) = -a1(k - lambda).
KatoCoefficients kato_lower_coeffs(double lambda, double k, double eps);

/// Numerical minimisation of the deviation over a (b eliminated through the
/// failure constraint) by golden-section search on [-3 sqrt k, 3 sqrt k].
/// Independent of the closed forms; the CLI uses it as a cross-check.
KatoCoefficients kato_minimize_numeric(double lambda, double k, double eps, Direction dir);

/// Bound on the expected sum from an observed sum `lambda` over k trials.
/// Upper: lambda + deviation. Lower: max(lambda - deviation, 0).
double observed_to_expected(double lambda, double k, double eps, Direction dir);

/// sqrt((1/2) k ln(1/eps)), the a = 0 deviation.
double fixed_deviation(double k, double eps);

/// Bound on the observed sum from its expectation. Upper: expected + D;
/// lower: max(expected - D, 0) with D = fixed_deviation(k, eps).
double expected_to_observed(double expected, double k, double eps, Direction dir);

/// sqrt(2 k ln(1/eps)), the unit-difference Azuma-Hoeffding deviation.
double azuma_deviation(double k, double eps);

/// Every intermediate of the phase-error estimate, in pipeline order.
struct PhaseErrorBound {
  double n_x = 0.0;
  double n_y = 0.0;
  double m_y = 0.0;
  double bit_error_y = 0.0;        // m_Y / n_Y
  double m_y_expected_upper = 0.0; // m_Y'
  double bit_error_y_upper = 0.0;  // E_b^Y' = m_Y' / n_Y
  double gain_for_delta = 0.0;
  double delta = 0.0;
  double phase_error_expected = 0.0;  // E_p'
  double m_p_expected = 0.0;          // m_p' = E_p' n_X
  double m_p_upper = 0.0;             // observed-count upper bound
  double phase_error_upper = 0.0;     // E_p bar = m_p bar / n_X, <= 1
  bool clamped = false;               // some stage hit the [0,1] ceiling
};

/// Upper bound on the phase error rate of the key set from one Y set.
/// Throws Error(zero_count) when n_y < 1 (or n_x < 1) and Error(domain)
/// when m_y > n_y.
PhaseErrorBound phase_error_upper_bound(double n_x, double n_y, double m_y, double mu,
                                        double gain_for_delta, const EpsilonBudget& eps);

struct KeyLength {
  double leak_ec = 0.0;     // lambda_EC = n_X f_e H(E_b^X)
  double hash_cost = 0.0;   // log2(2/eps_c) + log2(1/(4 eps_PA^2))
  double real_length = 0.0; // unfloored, may be negative
  std::int64_t length = 0;  // floor(real_length) clamped at 0
};

KeyLength key_length(double n_x, double phase_error_upper, double bit_error_x,
                     double ec_efficiency, const EpsilonBudget& eps);

}  // namespace qss::finite_key
