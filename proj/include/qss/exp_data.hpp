#pragma once

// Ingestion of detection-count tables and their reduction to sifted-set
// tallies, error rates and a finite-key rate.
//
// File format: header `phase_a,phase_b,phase_c,spd1,spd2`, then one row per
// phase-setting triple. Phases are integer quarter turns (0..3 for 0, pi/2,
// pi, 3pi/2); spd1/spd2 are the click counts of the two detectors.

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "qss/finite_key.hpp"
#include "qss/optics.hpp"
#include "qss/types.hpp"

namespace qss::exp_data {

inline constexpr std::string_view kCountsHeader = "phase_a,phase_b,phase_c,spd1,spd2";

struct CountRow {
  int phase_a = 0;
  int phase_b = 0;
  int phase_c = 0;
  std::uint64_t spd1 = 0;
  std::uint64_t spd2 = 0;

  friend bool operator==(const CountRow&, const CountRow&) = default;
};

/// Throws Error(input) with the 1-based line number for malformed lines,
/// out-of-range phase codes, negative or non-integer counts and repeated
/// phase triples. Blank lines are ignored; an empty stream gives no rows.
std::vector<CountRow> parse_counts(std::istream& in);
std::vector<CountRow> read_counts_file(const std::string& path);

/// Inverse of parse_counts: header plus one `a,b,c,spd1,spd2` line per row.
void write_counts(std::ostream& out, std::span<const CountRow> rows);

struct RowClass {
  SetTag tag = SetTag::discard;
  Basis basis_a = Basis::X;
  Basis basis_b = Basis::X;
  Basis basis_c = Basis::X;
  std::uint8_t s_a = 0;
  std::uint8_t s_b = 0;
  bool c_flip = false;            // Charlie's balancing pi
  int expected_detector = 1;      // 1 or 2
  QuarterTurns phase_difference;  // Bob total minus Alice
};

/// Decodes a phase triple. Never throws for codes in 0..3; patterns outside
/// the three sifted sets come back as DISCARD.
RowClass classify_phases(int phase_a, int phase_b, int phase_c);

/// classify_phases for a table row; DISCARD patterns and codes outside 0..3
/// are rejected with Error(input).
RowClass classify_row(const CountRow& row);

/// Clicks in the detector the row's phases predict.
std::uint64_t expected_clicks(const CountRow& row, const RowClass& cls) noexcept;
/// Clicks in the other detector.
std::uint64_t error_clicks(const CountRow& row, const RowClass& cls) noexcept;

struct SetCounts {
  std::uint64_t n = 0;
  std::uint64_t m = 0;

  double rate() const noexcept { return n == 0 ? 0.0 : static_cast<double>(m) / n; }
};

struct ExperimentSummary {
  SetCounts x;
  SetCounts ybc;
  SetCounts yac;
  std::uint64_t n_y = 0;  // ybc.n + yac.n
  double bit_error_x = 0.0;
  double bit_error_y = 0.0;  // larger of the two Y-set rates
  SetTag worst_y = SetTag::ybc_set;
  double mu = 0.0;
  double px = 0.0;
};

/// Sums detections and errors per sifted set. Throws Error(input) on a
/// DISCARD row and Error(zero_count) when any set has no detections.
ExperimentSummary tally_sets(std::span<const CountRow> rows, double mu, double px);

/// Metadata encoded in a fixture name such as `tableIIIb_mu8e-4.csv`:
/// table letter a/b/c selects px = 0.9/0.8/0.7.
struct FixtureInfo {
  char table = 'a';
  double mu = 0.0;
  double px = 0.0;
};

std::optional<FixtureInfo> parse_fixture_name(std::string_view path);

enum class GainSource { observed, analytic };

std::string_view to_string(GainSource source) noexcept;

struct AnalysisConfig {
  double pulses = 5e10;  // 100 MHz for 500 s
  double repetition_hz = 1e8;
  double ec_efficiency = 1.16;
  finite_key::EpsilonBudget eps;
  GainSource gain_source = GainSource::observed;
  /// Used only for GainSource::analytic; 30 dB between Alice and Bob.
  optics::ChannelModel channel{.lumped_loss_db = 30.0};
};

struct KeyRateReport {
  finite_key::PhaseErrorBound bound;      // the Y set with the larger bound
  finite_key::PhaseErrorBound bound_ybc;
  finite_key::PhaseErrorBound bound_yac;
  SetTag bound_set = SetTag::ybc_set;
  finite_key::KeyLength key;
  double gain = 0.0;  // Q used for the coin imbalance
  double pulses = 0.0;
  double rate_per_pulse = 0.0;
  double rate_bps = 0.0;
  bool abort = true;
};

/// Observed sifted gain (n_x + n_y) / (N (px^3 + 2 px (1-px)^2)).
double observed_gain(const ExperimentSummary& summary, double pulses);

/// Runs the phase-error bound on each Y set, keeps the larger, and computes
/// the key length for the X set. Throws Error(domain) if the pulse count is
/// smaller than the number of detections or the observed gain exceeds 1.
KeyRateReport experiment_skr(const ExperimentSummary& summary, const AnalysisConfig& config);

}  // namespace qss::exp_data
