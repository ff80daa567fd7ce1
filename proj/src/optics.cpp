#include "qss/optics.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <string>

#include "qss/errors.hpp"

namespace qss::optics {
namespace {

bool in_unit(double x) { return x >= 0.0 && x <= 1.0; }

void require(bool ok, const std::string& what) {
  if (!ok) fail(ErrorKind::domain, what);
}

// Probability that a detector with dark count p_d registers a click
// when the mean photon number reaching it is `photons`:
// 1 - (1-p_d) e^{-photons}.
double click_given(double photons, double dark_count) {
  return -std::expm1(std::log1p(-dark_count) - photons);
}

}  // namespace

void ChannelModel::validate() const {
  require(alpha_db_per_km >= 0.0, "alpha_db_per_km must be >= 0");
  require(length_km >= 0.0, "length_km must be >= 0");
  require(lumped_loss_db >= 0.0, "lumped_loss_db must be >= 0");
  require(in_unit(det_efficiency), "det_efficiency must lie in [0,1]");
  require(dark_count >= 0.0 && dark_count < 1.0, "dark_count must lie in [0,1)");
  require(misalignment >= 0.0 && misalignment <= 0.5, "misalignment must lie in [0,0.5]");
}

void SourceParams::validate() const {
  require(intensity >= 0.0 && std::isfinite(intensity), "intensity must be >= 0");
  require(px > 0.0 && px < 1.0, "px must lie in (0,1)");
  require(ec_efficiency >= 1.0, "ec_efficiency must be >= 1");
}

double transmittance(const ChannelModel& ch) {
  const double loss_db = ch.alpha_db_per_km * ch.length_km + ch.lumped_loss_db;
  return ch.det_efficiency * std::pow(10.0, -loss_db / 20.0);
}

double gain(double mu, double eta, double dark_count) {
  const double x = 2.0 * mu * eta;
  // (1-p_d)[(1 - e^{-x}) + 2 p_d e^{-x}]
  return (1.0 - dark_count) * (-std::expm1(-x) + 2.0 * dark_count * std::exp(-x));
}

double bit_error_x(double mu, double eta, double dark_count, double misalignment) {
  const double q = gain(mu, eta, dark_count);
  if (!(q > 0.0)) {
    fail(ErrorKind::degenerate_gain, "gain is zero; bit error rate undefined");
  }
  const double x = 2.0 * mu * eta;
  const double survive = std::exp(-x);
  const double right = (1.0 - dark_count) * click_given(x, dark_count);
  const double wrong = dark_count * (1.0 - dark_count) * survive;
  return (misalignment * right + (1.0 - misalignment) * wrong) / q;
}

double basis_overlap(double mu) {
  require(mu >= 0.0, "mu must be >= 0");
  return std::exp(-mu) * (std::cos(mu) + std::sin(mu));
}

double one_minus_basis_overlap(double mu) {
  require(mu >= 0.0, "mu must be >= 0");
  if (mu >= 0.5) return 1.0 - basis_overlap(mu);
  // e^{-mu}(cos mu + sin mu) = Re[(1-i) e^{(-1+i) mu}]; the n = 0 term of
  // the series is 1 and the n = 1 term is 0, so 1 - overlap is minus the
  // real part of the tail starting at n = 2.
  const std::complex<double> step(-mu, mu);
  std::complex<double> term = std::complex<double>(1.0, -1.0) * step;
  double tail = 0.0;
  for (int n = 2; n < 60; ++n) {
    term *= step / static_cast<double>(n);
    tail += term.real();
    if (std::abs(term) <= 1e-18 * std::abs(tail)) break;
  }
  return -tail;
}

double coin_imbalance(double mu, double gain_value) {
  if (!(gain_value > 0.0)) {
    fail(ErrorKind::degenerate_gain, "gain is zero; coin imbalance undefined");
  }
  const double delta = one_minus_basis_overlap(mu) / (2.0 * gain_value);
  if (delta > 0.5) {
    fail(ErrorKind::domain,
         "coin imbalance " + std::to_string(delta) +
             " exceeds 1/2 (intensity too large for the gain)");
  }
  return delta;
}

PhaseError phase_error_from_y(double bit_error_y, double imbalance) {
  require(in_unit(bit_error_y), "bit error rate must lie in [0,1]");
  require(imbalance >= 0.0 && imbalance <= 0.5, "imbalance must lie in [0,0.5]");

  const double e = bit_error_y;
  const double d = imbalance;
  const double angle = std::asin(std::sqrt(e)) + 2.0 * std::asin(std::sqrt(d));
  if (angle > std::numbers::pi / 2.0) return {1.0, true};

  const double value = e + 4.0 * d * (1.0 - d) * (1.0 - 2.0 * e) +
                       4.0 * (1.0 - 2.0 * d) * std::sqrt(d * (1.0 - d) * e * (1.0 - e));
  if (value > 1.0) return {1.0, true};
  return {value, false};
}

double binary_entropy(double x) {
  require(in_unit(x), "entropy argument must lie in [0,1]");
  if (x == 0.0 || x == 1.0) return 0.0;
  return -x * std::log2(x) - (1.0 - x) * std::log2(1.0 - x);
}

double phase_error_entropy(double phase_error) {
  return binary_entropy(std::min(phase_error, 0.5));
}

}  // namespace qss::optics
