#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>
#include <set>

#include "qss/errors.hpp"
#include "qss/optics.hpp"
#include "qss/protocol.hpp"

using namespace qss;
using namespace qss::protocol;

namespace {

constexpr double kPi = std::numbers::pi;

ChannelModel noiseless(double lumped_db = 0.0) {
  ChannelModel ch;
  ch.det_efficiency = 1.0;
  ch.dark_count = 0.0;
  ch.misalignment = 0.0;
  ch.lumped_loss_db = lumped_db;
  return ch;
}

double sigma(double p, double n) { return std::sqrt(p * (1.0 - p) / n); }

}  // namespace

TEST(Encoding, PlayerPhases) {
  EXPECT_DOUBLE_EQ(encode_player_phase(Basis::X, 0), 0.0);
  EXPECT_DOUBLE_EQ(encode_player_phase(Basis::X, 1), kPi);
  EXPECT_DOUBLE_EQ(encode_player_phase(Basis::Y, 1), kPi / 2.0);
  EXPECT_DOUBLE_EQ(encode_player_phase(Basis::Y, 0), 3.0 * kPi / 2.0);
}

TEST(Encoding, CharliePhases) {
  EXPECT_DOUBLE_EQ(charlie_phase(Basis::X), 0.0);
  EXPECT_DOUBLE_EQ(charlie_phase(Basis::Y), kPi / 2.0);
  EXPECT_EQ(charlie_phase(Basis::Y), charlie_phase(Basis::Y));
}

TEST(ClickProbabilities, Examples) {
  const double mu = 0.01, eta = 0.3;
  const ClickProbabilities p = click_probabilities(0.0, 0.0, mu, eta, 0.0, 0.0);
  EXPECT_EQ(p.only1, 0.0);
  EXPECT_NEAR(p.only0, 1.0 - std::exp(-2.0 * mu * eta), 1e-16);

  const ClickProbabilities half = click_probabilities(0.0, kPi / 2.0, mu, eta, 0.0, 0.0);
  EXPECT_NEAR(half.only0, half.only1, 1e-16);
}

TEST(ClickProbabilities, SumToOneAndGridAgreesWithRadians) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int i = 0; i < 1000; ++i) {
    const double mu = std::pow(10.0, -5.0 + 5.0 * u(rng));
    const double eta = u(rng);
    const double pd = 1e-3 * u(rng);
    const double ed = 0.5 * u(rng);
    for (int q = 0; q < 4; ++q) {
      const ClickProbabilities g = click_probabilities(QuarterTurns(q), mu, eta, pd, ed);
      EXPECT_NEAR(g.only0 + g.only1 + g.none + g.both, 1.0, 1e-12);
      const ClickProbabilities r = click_probabilities(0.0, q * kPi / 2.0, mu, eta, pd, ed);
      EXPECT_NEAR(g.only0, r.only0, 1e-15);
      EXPECT_NEAR(g.only1, r.only1, 1e-15);
      EXPECT_NEAR(g.none, r.none, 1e-15);
    }
  }
}

TEST(ClickProbabilities, SingleClickAtZeroOrPiIsTheGain) {
  const double mu = 9e-4, eta = 0.05, pd = 2e-8, ed = 0.015;
  for (int q : {0, 2}) {
    const ClickProbabilities p = click_probabilities(QuarterTurns(q), mu, eta, pd, ed);
    EXPECT_NEAR(p.only0 + p.only1, optics::gain(mu, eta, pd), 1e-18);
  }
  const ClickProbabilities p = click_probabilities(QuarterTurns(0), mu, eta, pd, ed);
  EXPECT_NEAR(p.only1 / (p.only0 + p.only1), optics::bit_error_x(mu, eta, pd, ed), 1e-13);
}

TEST(SimulateRound, NoiselessAllXIsCorrelated) {
  const SourceParams params{.intensity = 50.0, .px = 0.9};
  const RoundSampler sampler(params, noiseless());
  std::mt19937_64 rng(5);
  int seen = 0;
  for (int i = 0; i < 20000 && seen < 200; ++i) {
    const RoundRecord r = sampler.sample(i, rng);
    if (r.tag != SetTag::x_set) continue;
    ++seen;
    ASSERT_TRUE(r.s_c.has_value());
    EXPECT_EQ(*r.s_c, r.s_a ^ r.s_b);
    if ((r.s_a ^ r.s_b) == 0) EXPECT_EQ(r.outcome.click, Click::zero);
  }
  EXPECT_EQ(seen, 200);
}

TEST(SimulateRound, RecordInvariants) {
  const SourceParams params{.intensity = 0.5, .px = 0.5};
  ChannelModel ch;
  ch.dark_count = 0.01;
  const RoundSampler sampler(params, ch);
  std::mt19937_64 rng(8);
  for (int i = 0; i < 50000; ++i) {
    const RoundRecord r = sampler.sample(i, rng);
    EXPECT_EQ(r.s_c.has_value(), r.outcome.detected());
    EXPECT_EQ(r.outcome.resolved_bit.has_value(), r.outcome.click == Click::both);
    if (r.a == Basis::Y && r.b == Basis::Y && r.c == Basis::Y) EXPECT_EQ(r.tag, SetTag::discard);
    if (!r.outcome.detected()) EXPECT_EQ(r.tag, SetTag::discard);
    if (r.tag != SetTag::discard) EXPECT_EQ(r.tag, sift(r.a, r.b, r.c));
  }
}

TEST(SimulateRound, SiftedPhaseAlgebraGivesXor) {
  // Every sifted pattern interferes at 0 or pi with SPD1 meaning s_a xor s_b
  // (YAC after the flip).
  for (Basis a : {Basis::X, Basis::Y}) {
    for (Basis b : {Basis::X, Basis::Y}) {
      for (Basis c : {Basis::X, Basis::Y}) {
        const SetTag tag = sift(a, b, c);
        if (tag == SetTag::discard) continue;
        for (std::uint8_t sa : {0, 1}) {
          for (std::uint8_t sb : {0, 1}) {
            const QuarterTurns d =
                encode_player_quarter(b, sb) + charlie_quarter(c) - encode_player_quarter(a, sa);
            ASSERT_TRUE(d.value() == 0 || d.value() == 2);
            std::uint8_t bit = d.value() == 0 ? 0 : 1;
            if (tag == SetTag::yac_set) bit ^= 1;
            EXPECT_EQ(bit, sa ^ sb);
          }
        }
      }
    }
  }
}

TEST(ApplyYacFlip, FlipsOnlyYacAndIsInvolution) {
  RoundRecord r;
  r.tag = SetTag::yac_set;
  r.outcome.click = Click::zero;
  r.s_c = 0;
  EXPECT_EQ(*apply_yac_flip(r).s_c, 1);
  EXPECT_EQ(*apply_yac_flip(apply_yac_flip(r)).s_c, 0);
  r.tag = SetTag::x_set;
  EXPECT_EQ(*apply_yac_flip(r).s_c, 0);
  r.s_c.reset();
  r.outcome.click = Click::none;
  EXPECT_THROW(apply_yac_flip(r), Error);
}

TEST(VerifyCorrelation, Examples) {
  const std::vector<std::uint8_t> a{0, 1, 1, 0}, b{1, 0, 1, 0}, c{1, 1, 0, 0};
  EXPECT_TRUE(verify_correlation(a, b, c));
  const std::vector<std::uint8_t> x{0}, y{0}, z{1};
  EXPECT_FALSE(verify_correlation(x, y, z));
  try {
    verify_correlation(a, b, z);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::input);
  }
}

TEST(RunProtocol, NoiselessHasNoErrors) {
  const SourceParams params{.intensity = 0.05, .px = 0.6};
  const ProtocolRun run = run_protocol(params, noiseless(), {2000, 500, 500}, 42);
  EXPECT_EQ(run.tallies.m_x, 0u);
  EXPECT_EQ(run.tallies.m_ybc, 0u);
  EXPECT_EQ(run.tallies.m_yac, 0u);
  EXPECT_GE(run.tallies.n_x, 2000u);
  EXPECT_GE(run.tallies.n_ybc, 500u);
  EXPECT_GE(run.tallies.n_yac, 500u);
  EXPECT_TRUE(verify_correlation(run.keys.x.a, run.keys.x.b, run.keys.x.c));
  EXPECT_TRUE(verify_correlation(run.keys.ybc.a, run.keys.ybc.b, run.keys.ybc.c));
  EXPECT_TRUE(verify_correlation(run.keys.yac.a, run.keys.yac.b, run.keys.yac.c));
}

TEST(RunProtocol, StopsExactlyWhenThresholdsAreMet) {
  const SourceParams params{.intensity = 0.05, .px = 0.6};
  const Thresholds th{300, 100, 100};
  const ProtocolRun run = run_protocol(params, noiseless(), th, 9);
  EXPECT_EQ(run.tallies.total_rounds, run.rounds_used);
  // Re-running for one round less must leave some threshold unmet.
  const ProtocolRun shorter = simulate_rounds(params, noiseless(), run.rounds_used - 1, 9);
  const SiftedTallies& t = shorter.tallies;
  EXPECT_FALSE(t.n_x >= th.n_x && t.n_ybc >= th.n_ybc && t.n_yac >= th.n_yac);
  EXPECT_EQ(simulate_rounds(params, noiseless(), run.rounds_used, 9).tallies, run.tallies);
}

TEST(RunProtocol, MisalignmentDominatedErrorRate) {
  ChannelModel ch;
  ch.dark_count = 1e-12;
  ch.misalignment = 0.015;
  const SourceParams params{.intensity = 0.05, .px = 0.9};
  const ProtocolRun run = run_protocol(params, ch, {100000, 1, 1}, 2024);
  const double n = static_cast<double>(run.tallies.n_x);
  const double rate = run.tallies.m_x / n;
  EXPECT_NEAR(rate, 0.015, 3.0 * sigma(0.015, n));
}

TEST(RunProtocol, ExpectedRoundsToFillX) {
  ChannelModel ch;
  const SourceParams params{.intensity = 0.01, .px = 0.9};
  const Thresholds th{10000, 1, 1};
  const ProtocolRun run = run_protocol(params, ch, th, 77);
  const double q = optics::gain(0.01, optics::transmittance(ch), ch.dark_count);
  const double expected = 1e4 / (0.9 * 0.9 * 0.9 * q);
  EXPECT_NEAR(run.rounds_used / expected, 1.0, 0.1);
  EXPECT_NEAR(expected_rounds(params, ch, th) / expected, 1.0, 1e-6);
}

TEST(RunProtocol, CapExceededCarriesPartialTallies) {
  const SourceParams params{.intensity = 1e-3, .px = 0.9};
  RunOptions opts;
  opts.round_cap = 1000;
  try {
    run_protocol(params, ChannelModel{}, {1000000, 1000, 1000}, 1, opts);
    FAIL() << "expected cap_exceeded";
  } catch (const CapExceeded& e) {
    EXPECT_EQ(e.kind(), ErrorKind::cap_exceeded);
    EXPECT_EQ(e.partial().tallies.total_rounds, 1000u);
    EXPECT_EQ(e.partial().rounds_used, 1000u);
  }
  EXPECT_THROW(run_protocol(params, ChannelModel{}, {0, 1, 1}, 1), Error);
}

TEST(RunProtocol, TraceSeesEveryRoundInOrder) {
  const SourceParams params{.intensity = 0.05, .px = 0.6};
  std::uint64_t next = 0;
  bool ordered = true;
  RunOptions opts;
  opts.trace = [&](const RoundRecord& r) { ordered = ordered && r.index == next++; };
  const ProtocolRun run = run_protocol(params, noiseless(), {50, 10, 10}, 4, opts);
  EXPECT_TRUE(ordered);
  EXPECT_EQ(next, run.rounds_used);
}

TEST(Determinism, SameSeedSameResult) {
  const SourceParams params{.intensity = 9e-4, .px = 0.9};
  ChannelModel ch;
  ch.lumped_loss_db = 10.0;
  const ProtocolRun a = simulate_rounds(params, ch, 300000, 123);
  const ProtocolRun b = simulate_rounds(params, ch, 300000, 123);
  EXPECT_EQ(a.tallies, b.tallies);
  EXPECT_EQ(a.keys, b.keys);
  const ProtocolRun c = simulate_rounds(params, ch, 300000, 124);
  EXPECT_NE(a.keys, c.keys);
}

TEST(Determinism, ThreadCountDoesNotMatter) {
  const SourceParams params{.intensity = 9e-4, .px = 0.8};
  ChannelModel ch;
  ch.lumped_loss_db = 5.0;
  const std::uint64_t rounds = 5 * kBlockSize + 123;
  const ProtocolRun one = simulate_rounds(params, ch, rounds, 55, 1);
  const ProtocolRun four = simulate_rounds(params, ch, rounds, 55, 4);
  EXPECT_EQ(one.tallies, four.tallies);
  EXPECT_EQ(one.keys, four.keys);
}

TEST(Determinism, BlockSeedsAreDistinct) {
  std::set<std::uint64_t> seeds;
  for (std::uint64_t s = 0; s < 20; ++s) {
    for (std::uint64_t b = 0; b < 50; ++b) seeds.insert(block_seed(s, b));
  }
  EXPECT_EQ(seeds.size(), 1000u);
}

TEST(Trace, LineFormat) {
  EXPECT_EQ(trace_header(), "i,s_a,s_b,basis_a,basis_b,basis_c,outcome,s_c,set_tag");
  RoundRecord r;
  r.index = 17;
  r.s_a = 1;
  r.b = Basis::Y;
  r.c = Basis::Y;
  r.outcome.click = Click::one;
  r.s_c = 1;
  r.tag = SetTag::ybc_set;
  EXPECT_EQ(trace_line(r), "17,1,0,X,Y,Y,ONE,1,YBC_SET");
  RoundRecord none;
  EXPECT_EQ(trace_line(none), "0,0,0,X,X,X,NONE,,DISCARD");
}
