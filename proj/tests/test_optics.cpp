#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "oracles/fock_overlap.hpp"
#include "oracles/reference_values.hpp"
#include "qss/errors.hpp"
#include "qss/optics.hpp"

using namespace qss;
using namespace qss::optics;

namespace {

ChannelModel fig3_channel(double length_km) {
  ChannelModel ch;
  ch.length_km = length_km;
  return ch;
}

}  // namespace

TEST(Transmittance, Examples) {
  EXPECT_DOUBLE_EQ(transmittance(fig3_channel(0.0)), 0.4);
  EXPECT_NEAR(transmittance(fig3_channel(100.0)), oracle::ref::kEta100, 1e-16);
  ChannelModel lossless{.alpha_db_per_km = 0.0, .length_km = 500.0, .det_efficiency = 1.0};
  EXPECT_DOUBLE_EQ(transmittance(lossless), 1.0);
}

TEST(Transmittance, LumpedLossMatchesEquivalentFibre) {
  ChannelModel lumped;
  lumped.lumped_loss_db = 0.167 * 100.0;
  EXPECT_NEAR(transmittance(lumped), transmittance(fig3_channel(100.0)), 1e-15);
}

TEST(Transmittance, MonotoneInLengthAndAlphaLinearInEfficiency) {
  double prev = 2.0;
  for (double L = 0.0; L <= 500.0; L += 10.0) {
    const double eta = transmittance(fig3_channel(L));
    EXPECT_LT(eta, prev);
    prev = eta;
  }
  ChannelModel ch = fig3_channel(50.0);
  prev = 2.0;
  for (double a = 0.0; a <= 0.5; a += 0.05) {
    ch.alpha_db_per_km = a;
    EXPECT_LT(transmittance(ch), prev);
    prev = transmittance(ch);
  }
  ch.alpha_db_per_km = 0.167;
  ch.det_efficiency = 0.2;
  const double half = transmittance(ch);
  ch.det_efficiency = 0.4;
  EXPECT_NEAR(transmittance(ch), 2.0 * half, 1e-16);
}

TEST(ChannelModel, RejectsOutOfRangeFields) {
  auto bad = [](auto mutate) {
    ChannelModel ch;
    mutate(ch);
    try {
      ch.validate();
    } catch (const Error& e) {
      return e.kind() == ErrorKind::domain;
    }
    return false;
  };
  EXPECT_TRUE(bad([](ChannelModel& c) { c.det_efficiency = 1.5; }));
  EXPECT_TRUE(bad([](ChannelModel& c) { c.dark_count = 1.0; }));
  EXPECT_TRUE(bad([](ChannelModel& c) { c.misalignment = 0.6; }));
  EXPECT_TRUE(bad([](ChannelModel& c) { c.length_km = -1.0; }));
  EXPECT_TRUE(bad([](ChannelModel& c) { c.alpha_db_per_km = -0.1; }));
}

TEST(Gain, Examples) {
  EXPECT_EQ(gain(0.0, 0.3, 0.0), 0.0);
  EXPECT_NEAR(gain(1e3, 1.0, 0.0), 1.0, 1e-15);
  EXPECT_NEAR(gain(9e-4, 0.058478, 2e-8), oracle::ref::kGain, 1e-19);
}

TEST(Gain, MonotoneAndBounded) {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int i = 0; i < 2000; ++i) {
    // Weak pulses: with 2 mu eta >= ln 3 the (1 - p_d) prefactor makes Q
    // decrease in p_d.
    const double mu = std::pow(10.0, -6.0 + 4.0 * u(rng));
    const double eta = u(rng);
    const double pd = 1e-3 * u(rng);
    const double q = gain(mu, eta, pd);
    ASSERT_GE(q, 0.0);
    ASSERT_LE(q, 1.0);
    EXPECT_GE(gain(mu * 1.1, eta, pd), q);
    EXPECT_GE(gain(mu, std::min(1.0, eta * 1.1), pd), q);
    EXPECT_GE(gain(mu, eta, pd * 1.1 + 1e-12), q);
  }
}

TEST(BitErrorX, Examples) {
  EXPECT_EQ(bit_error_x(9e-4, 0.05, 0.0, 0.0), 0.0);
  EXPECT_DOUBLE_EQ(bit_error_x(9e-4, 0.05, 0.0, 0.015), 0.015);
  EXPECT_NEAR(bit_error_x(9e-4, 0.058478, 2e-8, 0.015), oracle::ref::kBitErrorX, 1e-17);
}

TEST(BitErrorX, TermByTermOracle) {
  const double mu = 9e-4, eta = 0.058478, pd = 2e-8, ed = 0.015;
  const double e = std::exp(-2.0 * mu * eta);
  const double signal = ed * (1.0 - pd) * (1.0 - (1.0 - pd) * e);
  const double dark = (1.0 - ed) * pd * (1.0 - pd) * e;
  EXPECT_NEAR(bit_error_x(mu, eta, pd, ed), (signal + dark) / gain(mu, eta, pd), 1e-12);
}

TEST(BitErrorX, RangeAndDarkFreeLimit) {
  std::mt19937_64 rng(12);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int i = 0; i < 2000; ++i) {
    const double mu = std::pow(10.0, -6.0 + 5.0 * u(rng));
    const double eta = 1e-4 + u(rng);
    const double ed = 0.5 * u(rng);
    const double e = bit_error_x(mu, std::min(eta, 1.0), 1e-4 * u(rng), ed);
    ASSERT_GE(e, 0.0);
    ASSERT_LE(e, 0.5);
    EXPECT_NEAR(bit_error_x(mu, std::min(eta, 1.0), 0.0, ed), ed, 1e-15);
  }
}

TEST(BitErrorX, ZeroGainIsDegenerate) {
  try {
    bit_error_x(0.0, 0.5, 0.0, 0.01);
    FAIL() << "expected degenerate_gain";
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::degenerate_gain);
  }
}

TEST(BasisOverlap, Examples) {
  EXPECT_EQ(basis_overlap(0.0), 1.0);
  EXPECT_NEAR(one_minus_basis_overlap(9e-4), oracle::ref::kOneMinusOverlap9e4, 1e-21);
  const double mu = 9e-4;
  EXPECT_NEAR(one_minus_basis_overlap(mu), mu * mu - 2.0 / 3.0 * mu * mu * mu,
              mu * mu * mu * mu);
}

TEST(BasisOverlap, MatchesHighPrecisionValues) {
  for (const auto& p : oracle::ref::kOverlaps) {
    EXPECT_NEAR(basis_overlap(p.mu), p.overlap, 1e-15) << "mu=" << p.mu;
    EXPECT_NEAR(one_minus_basis_overlap(p.mu), 1.0 - p.overlap, 1e-16) << "mu=" << p.mu;
  }
}

TEST(BasisOverlap, MatchesFockTruncation) {
  for (double mu : {1e-4, 1e-3, 1e-2, 5e-2}) {
    const auto fock = oracle::fock_basis_overlap(mu, 40);
    EXPECT_NEAR(basis_overlap(mu), static_cast<double>(fock.real()), 1e-12) << "mu=" << mu;
    EXPECT_NEAR(static_cast<double>(fock.imag()), 0.0, 1e-15);
  }
}

TEST(BasisOverlap, InUnitIntervalBelowHalfPi) {
  for (double mu = 0.0; mu < 1.5; mu += 0.01) {
    const double o = basis_overlap(mu);
    EXPECT_GT(o, 0.0);
    EXPECT_LE(o, 1.0);
  }
}

TEST(CoinImbalance, Examples) {
  EXPECT_EQ(coin_imbalance(0.0, 1e-7), 0.0);
  EXPECT_NEAR(coin_imbalance(9e-4, 1.0526e-4), oracle::ref::kDelta, 1e-17);
  const double mu = 0.02;
  const double q = (1.0 - basis_overlap(mu)) / (2.0 * 0.25);
  EXPECT_NEAR(coin_imbalance(mu, q), 0.25, 1e-12);
}

TEST(CoinImbalance, Errors) {
  try {
    coin_imbalance(1e-3, 0.0);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::degenerate_gain);
  }
  try {
    coin_imbalance(0.5, 1e-6);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::domain);
  }
}

TEST(PhaseError, Examples) {
  for (double x : {0.0, 0.01, 0.2, 0.5, 0.9, 1.0}) {
    EXPECT_EQ(phase_error_from_y(x, 0.0).value, x);
  }
  for (double d : {0.001, 0.01, 0.1}) {
    EXPECT_NEAR(phase_error_from_y(0.0, d).value, 4.0 * d * (1.0 - d), 1e-15);
  }
  const PhaseError ep = phase_error_from_y(0.0116, 3.848e-3);
  EXPECT_NEAR(ep.value, oracle::ref::kEpSum, 1e-15);
  EXPECT_NEAR(oracle::ref::kEpTerm1 + oracle::ref::kEpTerm2 + oracle::ref::kEpTerm3,
              oracle::ref::kEpSum, 1e-16);
  EXPECT_FALSE(ep.clamped);
}

TEST(PhaseError, MonotoneInImbalanceAndSaturates) {
  for (double e = 0.0; e <= 0.5; e += 0.01) {
    double prev = -1.0;
    for (double d = 0.0; d <= 0.5; d += 0.001) {
      const PhaseError p = phase_error_from_y(e, d);
      ASSERT_GE(p.value, prev) << "E=" << e << " D=" << d;
      ASSERT_LE(p.value, 1.0);
      prev = p.value;
    }
  }
  const PhaseError sat = phase_error_from_y(0.4, 0.45);
  EXPECT_EQ(sat.value, 1.0);
  EXPECT_TRUE(sat.clamped);
}

TEST(PhaseError, DomainErrors) {
  EXPECT_THROW(phase_error_from_y(0.1, 0.6), Error);
  EXPECT_THROW(phase_error_from_y(-0.1, 0.1), Error);
  EXPECT_THROW(phase_error_from_y(1.1, 0.1), Error);
}

TEST(BinaryEntropy, Examples) {
  EXPECT_EQ(binary_entropy(0.5), 1.0);
  EXPECT_EQ(binary_entropy(0.0), 0.0);
  EXPECT_EQ(binary_entropy(1.0), 0.0);
  EXPECT_NEAR(binary_entropy(0.11), oracle::ref::kEntropy011, 1e-15);
  EXPECT_THROW(binary_entropy(-1e-9), Error);
  EXPECT_THROW(binary_entropy(1.0 + 1e-9), Error);
}

TEST(BinaryEntropy, Symmetric) {
  for (int i = 0; i <= 10000; ++i) {
    const double x = i / 10000.0;
    EXPECT_NEAR(binary_entropy(x), binary_entropy(1.0 - x), 1e-14);
  }
}

TEST(PhaseErrorEntropy, CappedAtOneBit) {
  EXPECT_EQ(phase_error_entropy(0.5), 1.0);
  EXPECT_EQ(phase_error_entropy(0.8), 1.0);
  EXPECT_EQ(phase_error_entropy(1.0), 1.0);
  EXPECT_EQ(phase_error_entropy(0.2), binary_entropy(0.2));
}
