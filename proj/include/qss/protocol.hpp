#pragma once

// Pulse-level Monte Carlo of the preparation, measurement, sifting and
// error-estimation steps.
//
// Random streams: rounds are grouped into blocks of kBlockSize consecutive
// indices. Block j draws from its own mt19937_64 seeded with
// block_seed(seed, j), and inside a block every round consumes draws in a
// fixed order (s_a, s_b, a, b, c, outcome, then the double-click bit only
// when needed). A run is therefore a pure function of (params, channel,
// seed), and evaluating blocks on several threads and merging their tallies
// in block order gives exactly the single-stream result.

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <random>
#include <span>
#include <string_view>
#include <vector>

#include "qss/errors.hpp"
#include "qss/optics.hpp"
#include "qss/types.hpp"

namespace qss::protocol {

using optics::ChannelModel;
using optics::SourceParams;

enum class Click : std::uint8_t { zero, one, none, both };

/// Charlie's measurement result. `resolved_bit` is present iff both
/// detectors fired, and holds the bit Charlie drew for that round.
struct Outcome {
  Click click = Click::none;
  std::optional<std::uint8_t> resolved_bit;

  bool detected() const noexcept { return click != Click::none; }
};

struct RoundRecord {
  std::uint64_t index = 0;
  std::uint8_t s_a = 0;
  std::uint8_t s_b = 0;
  Basis a = Basis::X;
  Basis b = Basis::X;
  Basis c = Basis::X;
  Outcome outcome;
  std::optional<std::uint8_t> s_c;
  SetTag tag = SetTag::discard;
};

struct SiftedTallies {
  std::uint64_t n_x = 0;
  std::uint64_t m_x = 0;
  std::uint64_t n_ybc = 0;
  std::uint64_t m_ybc = 0;
  std::uint64_t n_yac = 0;
  std::uint64_t m_yac = 0;
  std::uint64_t detections = 0;  // every round with at least one click
  std::uint64_t total_rounds = 0;

  SiftedTallies& operator+=(const SiftedTallies& other);
  friend bool operator==(const SiftedTallies&, const SiftedTallies&) = default;
};

/// Bits of one sifted set, one entry per round, in round order.
struct KeyTriples {
  std::vector<std::uint8_t> a;
  std::vector<std::uint8_t> b;
  std::vector<std::uint8_t> c;

  std::size_t size() const noexcept { return c.size(); }
  friend bool operator==(const KeyTriples&, const KeyTriples&) = default;
};

struct RawKeys {
  KeyTriples x;
  KeyTriples ybc;
  KeyTriples yac;  // Charlie's bits already flipped

  friend bool operator==(const RawKeys&, const RawKeys&) = default;
};

struct ClickProbabilities {
  double only0 = 0.0;
  double only1 = 0.0;
  double none = 0.0;
  double both = 0.0;
};

struct Thresholds {
  std::uint64_t n_x = 0;
  std::uint64_t n_ybc = 0;
  std::uint64_t n_yac = 0;
};

struct ProtocolRun {
  SiftedTallies tallies;
  RawKeys keys;
  std::uint64_t rounds_used = 0;
};

/// Raised when the round cap is reached first; carries what was collected.
class CapExceeded : public Error {
 public:
  CapExceeded(const std::string& what, ProtocolRun partial)
      : Error(ErrorKind::cap_exceeded, what), partial_(std::move(partial)) {}
  const ProtocolRun& partial() const noexcept { return partial_; }

 private:
  ProtocolRun partial_;
};

inline constexpr std::uint64_t kBlockSize = 1u << 16;

std::uint64_t block_seed(std::uint64_t seed, std::uint64_t block) noexcept;

QuarterTurns encode_player_quarter(Basis basis, std::uint8_t bit);
/// X: s*pi; Y: (3/2 - s)*pi, reduced to [0, 2pi).
double encode_player_phase(Basis basis, std::uint8_t bit);

QuarterTurns charlie_quarter(Basis basis) noexcept;
double charlie_phase(Basis basis) noexcept;

/// Outcome distribution for phases given in radians.
ClickProbabilities click_probabilities(double phase_a, double phase_b_total, double mu,
                                       double eta, double dark_count, double misalignment);

/// Same model for a phase difference on the quarter-turn grid; the
/// interference split is exact (1, 1/2 or 0).
ClickProbabilities click_probabilities(QuarterTurns phase_difference, double mu, double eta,
                                       double dark_count, double misalignment);

/// Precomputed outcome tables for every (bases, bits) combination.
class RoundSampler {
 public:
  RoundSampler(const SourceParams& params, const ChannelModel& ch);

  /// Draws one round from `rng`, following the fixed draw order.
  RoundRecord sample(std::uint64_t index, std::mt19937_64& rng) const;

  /// Probability that a round lands in `tag` with a detection.
  double set_probability(SetTag tag) const noexcept;

  const SourceParams& params() const noexcept { return params_; }

 private:
  SourceParams params_;
  double eta_ = 0.0;
  // Indexed by dphi quarter turns: cumulative thresholds for
  // only0, only1, none (both is the remainder).
  struct Cumulative {
    double only0, only1, none;
  };
  Cumulative table_[4]{};
  ClickProbabilities probs_[4]{};
};

RoundRecord simulate_round(const SourceParams& params, const ChannelModel& ch,
                           std::mt19937_64& rng, std::uint64_t index = 0);

/// Flips Charlie's bit on YAC_SET records. Throws Error(domain) when the
/// record has no detection.
RoundRecord apply_yac_flip(RoundRecord record);

/// Expected number of rounds until every threshold is met, using the
/// analytic set probabilities (the slowest set dominates).
double expected_rounds(const SourceParams& params, const ChannelModel& ch,
                       const Thresholds& thresholds);

struct RunOptions {
  /// 0 selects 100x expected_rounds.
  std::uint64_t round_cap = 0;
  /// Called for every simulated round (after the YAC flip), in order.
  std::function<void(const RoundRecord&)> trace;
};

/// Runs rounds until all three set sizes reach their thresholds.
ProtocolRun run_protocol(const SourceParams& params, const ChannelModel& ch,
                         const Thresholds& thresholds, std::uint64_t seed,
                         const RunOptions& options = {});

/// Runs exactly `rounds` rounds. Blocks are spread over `threads` workers
/// (0 = hardware concurrency); the result does not depend on `threads`.
/// A `trace` callback sees every round in order and forces one worker.
ProtocolRun simulate_rounds(const SourceParams& params, const ChannelModel& ch,
                            std::uint64_t rounds, std::uint64_t seed, unsigned threads = 1,
                            bool keep_keys = true,
                            const std::function<void(const RoundRecord&)>& trace = {});

/// True iff c[i] == a[i] xor b[i] for every i. Throws Error(input) on
/// length mismatch.
bool verify_correlation(std::span<const std::uint8_t> key_a, std::span<const std::uint8_t> key_b,
                        std::span<const std::uint8_t> key_c);

std::string_view to_string(Click click) noexcept;

/// One CSV line per round: i,s_a,s_b,basis_a,basis_b,basis_c,outcome,s_c,set_tag
std::string trace_header();
std::string trace_line(const RoundRecord& record);

}  // namespace qss::protocol
