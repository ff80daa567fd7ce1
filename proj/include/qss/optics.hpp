#pragma once

// Analytic channel formulas: transmittance, gain, X-basis error rate,
// coherent-state basis overlap, quantum-coin imbalance and the phase-error
// relation. Everything here is a pure function of its arguments.

namespace qss::optics {

/// Optical channel between Alice and Bob, with Charlie in the middle.
///
/// The transmittance convention is per arm: each player's pulse crosses
/// half the fibre, so eta = det_efficiency * 10^(-(alpha*L + lumped)/20).
/// `lumped_loss_db` models attenuators or a fixed total link loss (the
/// experiment quotes a 30 dB Alice-Bob loss rather than a fibre length).
struct ChannelModel {
  double alpha_db_per_km = 0.167;
  double length_km = 0.0;
  double det_efficiency = 0.4;
  double dark_count = 2e-8;
  double misalignment = 0.015;
  double lumped_loss_db = 0.0;

  /// Throws Error(domain) when a field is out of range.
  void validate() const;
};

struct SourceParams {
  double intensity = 9e-4;   // mu, mean photon number per pulse
  double px = 0.9;           // X-basis probability for every party
  double ec_efficiency = 1.16;

  double py() const noexcept { return 1.0 - px; }
  void validate() const;
};

double transmittance(const ChannelModel& ch);

/// Q_mu = (1-p_d)[1 - (1-2p_d) e^{-2 mu eta}].
///
/// This is the probability that exactly one detector clicks when the two
/// pulses interfere at a phase difference of 0 or pi.
double gain(double mu, double eta, double dark_count);

/// E_b^X. Throws Error(degenerate_gain) when the gain vanishes.
double bit_error_x(double mu, double eta, double dark_count, double misalignment);

/// <Psi_y|Psi_x> = e^{-mu}(cos mu + sin mu) for a real amplitude sqrt(mu).
double basis_overlap(double mu);

/// 1 - basis_overlap(mu), evaluated without cancellation for small mu.
double one_minus_basis_overlap(double mu);

/// Delta from 1 - 2 Q Delta = <Psi_y|Psi_x>.
/// Throws degenerate_gain for Q <= 0 and domain when Delta > 1/2.
double coin_imbalance(double mu, double gain_value);

struct PhaseError {
  double value = 0.0;
  bool clamped = false;
};

/// E_p = E + 4D(1-D)(1-2E) + 4(1-2D) sqrt(D(1-D)E(1-E)).
///
/// The expression equals sin^2(asin sqrt(E) + 2 asin sqrt(D)); once that
/// angle passes pi/2 the bound saturates at 1 and `clamped` is set.
PhaseError phase_error_from_y(double bit_error_y, double imbalance);

/// Shannon entropy in bits. Throws Error(domain) outside [0, 1].
double binary_entropy(double x);

/// Privacy-amplification cost per key bit: H(min(E_p, 1/2)). A phase error
/// bound at or above 1/2 leaves no secrecy, so the cost stays at one bit.
double phase_error_entropy(double phase_error);

}  // namespace qss::optics
