#include "qss/finite_key.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>
#include <string>

#include "qss/errors.hpp"
#include "qss/golden_section.hpp"
#include "qss/optics.hpp"

namespace qss::finite_key {
namespace {

void check_unit_open(double eps, const char* name) {
  if (!(eps > 0.0 && eps < 1.0)) {
    fail(ErrorKind::domain, std::string(name) + " must lie in (0,1)");
  }
}

void check_sum(double lambda, double k, double eps) {
  if (!(k >= 1.0) || !std::isfinite(k)) fail(ErrorKind::domain, "k must be >= 1");
  if (!(lambda >= 0.0 && lambda <= k)) fail(ErrorKind::domain, "Lambda must lie in [0, k]");
  check_unit_open(eps, "epsilon");
}

double sign_of(Direction dir) { return dir == Direction::upper ? 1.0 : -1.0; }

// Closed-form minimiser of the upper-form deviation.
double optimal_a_upper(double lambda, double k, double eps) {
  const double ln_eps = std::log(eps);
  const double root_k = std::sqrt(k);
  const double spread = lambda * (k - lambda);
  const double d = 9.0 * spread - 2.0 * k * ln_eps;
  const double root = k * std::sqrt(-ln_eps * d);  // sqrt(-k^2 ln(eps) d)
  const double num = 3.0 * (72.0 * root_k * spread * ln_eps -
                            16.0 * k * root_k * ln_eps * ln_eps +
                            9.0 * std::numbers::sqrt2 * (k - 2.0 * lambda) * root);
  const double den = 4.0 * (9.0 * k - 8.0 * ln_eps) * d;
  const double a = num / den;
  if (!std::isfinite(a)) {
    std::ostringstream msg;
    msg << "Kato closed form is not finite for Lambda=" << lambda << " k=" << k
        << " eps=" << eps;
    fail(ErrorKind::numerical_degeneracy, msg.str());
  }
  return a;
}

KatoCoefficients assemble(double a, double lambda, double k, double eps, Direction dir) {
  KatoCoefficients c;
  c.a = a;
  c.b = kato_b_for(a, k, eps, dir);
  c.deviation = kato_deviation(c.a, c.b, lambda, k);
  c.epsilon = kato_failure_probability(c.a, c.b, k, dir);
  if (!std::isfinite(c.b) || !std::isfinite(c.deviation)) {
    fail(ErrorKind::numerical_degeneracy, "Kato coefficients are not finite");
  }
  return c;
}

}  // namespace

double EpsilonBudget::secrecy() const noexcept {
  return std::sqrt(phase_error_failure()) + eps_pa;
}

void EpsilonBudget::validate() const {
  check_unit_open(eps_c, "eps_c");
  check_unit_open(eps_pa, "eps_PA");
  check_unit_open(eps_a, "eps_a");
  check_unit_open(eps_b, "eps_b");
}

double kato_failure_probability(double a, double b, double k, Direction dir) {
  const double scale = 1.0 + sign_of(dir) * 4.0 * a / (3.0 * std::sqrt(k));
  return std::exp(-2.0 * (b * b - a * a) / (scale * scale));
}

double kato_deviation(double a, double b, double lambda, double k) {
  return (b + a * (2.0 * lambda / k - 1.0)) * std::sqrt(k);
}

double kato_b_for(double a, double k, double eps, Direction dir) {
  const double scale = 1.0 + sign_of(dir) * 4.0 * a / (3.0 * std::sqrt(k));
  return std::sqrt(a * a - 0.5 * scale * scale * std::log(eps));
}

KatoCoefficients kato_upper_coeffs(double lambda, double k, double eps) {
  check_sum(lambda, k, eps);
  return assemble(optimal_a_upper(lambda, k, eps), lambda, k, eps, Direction::upper);
}

KatoCoefficients kato_lower_coeffs(double lambda, double k, double eps) {
  check_sum(lambda, k, eps);
  // The lower form is the upper form applied to 1 - xi with a -> -a.
  return assemble(-optimal_a_upper(k - lambda, k, eps), lambda, k, eps, Direction::lower);
}

KatoCoefficients kato_minimize_numeric(double lambda, double k, double eps, Direction dir) {
  check_sum(lambda, k, eps);
  const double span = 3.0 * std::sqrt(k);
  auto deviation = [&](double a) {
    return kato_deviation(a, kato_b_for(a, k, eps, dir), lambda, k);
  };
  const LineSearchResult best =
      golden_section_minimize(deviation, -span, span, 1e-12 * span, 400);
  return assemble(best.x, lambda, k, eps, dir);
}

double observed_to_expected(double lambda, double k, double eps, Direction dir) {
  if (dir == Direction::upper) return lambda + kato_upper_coeffs(lambda, k, eps).deviation;
  return std::max(lambda - kato_lower_coeffs(lambda, k, eps).deviation, 0.0);
}

double fixed_deviation(double k, double eps) {
  if (!(k >= 1.0)) fail(ErrorKind::domain, "k must be >= 1");
  check_unit_open(eps, "epsilon");
  return std::sqrt(0.5 * k * std::log(1.0 / eps));
}

double expected_to_observed(double expected, double k, double eps, Direction dir) {
  const double d = fixed_deviation(k, eps);
  if (dir == Direction::upper) return expected + d;
  return std::max(expected - d, 0.0);
}

double azuma_deviation(double k, double eps) {
  if (!(k >= 1.0)) fail(ErrorKind::domain, "k must be >= 1");
  check_unit_open(eps, "epsilon");
  return std::sqrt(2.0 * k * std::log(1.0 / eps));
}

PhaseErrorBound phase_error_upper_bound(double n_x, double n_y, double m_y, double mu,
                                        double gain_for_delta, const EpsilonBudget& eps) {
  eps.validate();
  if (!(n_y >= 1.0)) fail(ErrorKind::zero_count, "Y set is empty (n_Y < 1)");
  if (!(n_x >= 1.0)) fail(ErrorKind::zero_count, "key set is empty (n_X < 1)");
  if (!(m_y >= 0.0 && m_y <= n_y)) fail(ErrorKind::domain, "m_Y must lie in [0, n_Y]");

  PhaseErrorBound r;
  r.n_x = n_x;
  r.n_y = n_y;
  r.m_y = m_y;
  r.bit_error_y = m_y / n_y;

  r.m_y_expected_upper = observed_to_expected(m_y, n_y, eps.eps_a, Direction::upper);
  if (r.m_y_expected_upper > n_y) {
    r.m_y_expected_upper = n_y;
    r.clamped = true;
  }
  r.bit_error_y_upper = r.m_y_expected_upper / n_y;

  r.gain_for_delta = gain_for_delta;
  r.delta = optics::coin_imbalance(mu, gain_for_delta);
  const optics::PhaseError ep = optics::phase_error_from_y(r.bit_error_y_upper, r.delta);
  r.phase_error_expected = ep.value;
  r.clamped = r.clamped || ep.clamped;

  r.m_p_expected = r.phase_error_expected * n_x;
  r.m_p_upper = expected_to_observed(r.m_p_expected, n_x, eps.eps_b, Direction::upper);
  r.phase_error_upper = r.m_p_upper / n_x;
  if (r.phase_error_upper > 1.0) {
    r.phase_error_upper = 1.0;
    r.clamped = true;
  }
  return r;
}

KeyLength key_length(double n_x, double phase_error_upper, double bit_error_x,
                     double ec_efficiency, const EpsilonBudget& eps) {
  eps.validate();
  KeyLength k;
  k.leak_ec = n_x * ec_efficiency * optics::binary_entropy(bit_error_x);
  k.hash_cost = std::log2(2.0 / eps.eps_c) + std::log2(1.0 / (4.0 * eps.eps_pa * eps.eps_pa));
  k.real_length = n_x * (1.0 - optics::phase_error_entropy(phase_error_upper)) - k.leak_ec - k.hash_cost;
  k.length = k.real_length > 0.0 ? static_cast<std::int64_t>(std::floor(k.real_length)) : 0;
  return k;
}

}  // namespace qss::finite_key
