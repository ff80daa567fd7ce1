#include "qss/protocol.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>
#include <thread>

namespace qss::protocol {
namespace {

std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

// 53 random mantissa bits; independent of the standard library's
// distribution implementations so traces are portable.
double uniform01(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

std::uint8_t random_bit(std::mt19937_64& rng) { return static_cast<std::uint8_t>(rng() & 1u); }

Basis draw_basis(std::mt19937_64& rng, double px) {
  return uniform01(rng) < px ? Basis::X : Basis::Y;
}

ClickProbabilities from_split(double split, double mu, double eta, double dark_count,
                              double misalignment) {
  const double photons = 2.0 * mu * eta;
  const double log_dark_free = std::log1p(-dark_count);
  const double i1 = photons * split;
  const double i2 = photons * (1.0 - split);
  // Per-detector no-click probability (1-p_d) e^{-I_k} and its complement.
  const double silent1 = std::exp(log_dark_free - i1);
  const double silent2 = std::exp(log_dark_free - i2);
  const double fire1 = -std::expm1(log_dark_free - i1);
  const double fire2 = -std::expm1(log_dark_free - i2);

  const double only_spd1 = fire1 * silent2;
  const double only_spd2 = silent1 * fire2;
  ClickProbabilities p;
  p.only0 = (1.0 - misalignment) * only_spd1 + misalignment * only_spd2;
  p.only1 = (1.0 - misalignment) * only_spd2 + misalignment * only_spd1;
  p.none = silent1 * silent2;
  p.both = fire1 * fire2;
  return p;
}

void count(SiftedTallies& t, SetTag tag, bool error) {
  switch (tag) {
    case SetTag::x_set:
      ++t.n_x;
      t.m_x += error;
      break;
    case SetTag::ybc_set:
      ++t.n_ybc;
      t.m_ybc += error;
      break;
    case SetTag::yac_set:
      ++t.n_yac;
      t.m_yac += error;
      break;
    case SetTag::discard:
      break;
  }
}

void push(KeyTriples& keys, const RoundRecord& r) {
  keys.a.push_back(r.s_a);
  keys.b.push_back(r.s_b);
  keys.c.push_back(*r.s_c);
}

void append(KeyTriples& into, const KeyTriples& from) {
  into.a.insert(into.a.end(), from.a.begin(), from.a.end());
  into.b.insert(into.b.end(), from.b.begin(), from.b.end());
  into.c.insert(into.c.end(), from.c.begin(), from.c.end());
}

// Tallies one already-flipped record; returns false for non-sifted rounds.
bool absorb(ProtocolRun& run, const RoundRecord& r, bool keep_keys) {
  SiftedTallies& t = run.tallies;
  ++t.total_rounds;
  if (r.outcome.detected()) ++t.detections;
  if (r.tag == SetTag::discard) return false;
  const bool error = *r.s_c != (r.s_a ^ r.s_b);
  count(t, r.tag, error);
  if (keep_keys) {
    switch (r.tag) {
      case SetTag::x_set: push(run.keys.x, r); break;
      case SetTag::ybc_set: push(run.keys.ybc, r); break;
      case SetTag::yac_set: push(run.keys.yac, r); break;
      case SetTag::discard: break;
    }
  }
  return true;
}

bool reached(const SiftedTallies& t, const Thresholds& th) {
  return t.n_x >= th.n_x && t.n_ybc >= th.n_ybc && t.n_yac >= th.n_yac;
}

}  // namespace

SiftedTallies& SiftedTallies::operator+=(const SiftedTallies& o) {
  n_x += o.n_x;
  m_x += o.m_x;
  n_ybc += o.n_ybc;
  m_ybc += o.m_ybc;
  n_yac += o.n_yac;
  m_yac += o.m_yac;
  detections += o.detections;
  total_rounds += o.total_rounds;
  return *this;
}

std::uint64_t block_seed(std::uint64_t seed, std::uint64_t block) noexcept {
  return splitmix64(splitmix64(seed) + (block + 1) * 0x9E3779B97F4A7C15ull);
}

QuarterTurns encode_player_quarter(Basis basis, std::uint8_t bit) {
  const int s = bit & 1;
  return basis == Basis::X ? QuarterTurns(2 * s) : QuarterTurns(3 - 2 * s);
}

double encode_player_phase(Basis basis, std::uint8_t bit) {
  return encode_player_quarter(basis, bit).radians();
}

QuarterTurns charlie_quarter(Basis basis) noexcept {
  return basis == Basis::X ? QuarterTurns(0) : QuarterTurns(1);
}

double charlie_phase(Basis basis) noexcept { return charlie_quarter(basis).radians(); }

ClickProbabilities click_probabilities(double phase_a, double phase_b_total, double mu,
                                       double eta, double dark_count, double misalignment) {
  const double dphi = phase_b_total - phase_a;
  const double split = 0.5 * (1.0 + std::cos(dphi));  // cos^2(dphi/2)
  return from_split(split, mu, eta, dark_count, misalignment);
}

ClickProbabilities click_probabilities(QuarterTurns phase_difference, double mu, double eta,
                                       double dark_count, double misalignment) {
  static constexpr double kSplit[4] = {1.0, 0.5, 0.0, 0.5};
  return from_split(kSplit[phase_difference.value()], mu, eta, dark_count, misalignment);
}

RoundSampler::RoundSampler(const SourceParams& params, const ChannelModel& ch)
    : params_(params), eta_(optics::transmittance(ch)) {
  params.validate();
  ch.validate();
  for (int q = 0; q < 4; ++q) {
    const ClickProbabilities p = click_probabilities(QuarterTurns(q), params.intensity, eta_,
                                                     ch.dark_count, ch.misalignment);
    probs_[q] = p;
    table_[q] = {p.only0, p.only0 + p.only1, p.only0 + p.only1 + p.none};
  }
}

RoundRecord RoundSampler::sample(std::uint64_t index, std::mt19937_64& rng) const {
  RoundRecord r;
  r.index = index;
  r.s_a = random_bit(rng);
  r.s_b = random_bit(rng);
  r.a = draw_basis(rng, params_.px);
  r.b = draw_basis(rng, params_.px);
  r.c = draw_basis(rng, params_.px);

  const QuarterTurns phase_a = encode_player_quarter(r.a, r.s_a);
  const QuarterTurns phase_b = encode_player_quarter(r.b, r.s_b) + charlie_quarter(r.c);
  const Cumulative& cut = table_[(phase_b - phase_a).value()];

  const double u = uniform01(rng);
  if (u < cut.only0) {
    r.outcome.click = Click::zero;
    r.s_c = 0;
  } else if (u < cut.only1) {
    r.outcome.click = Click::one;
    r.s_c = 1;
  } else if (u < cut.none) {
    r.outcome.click = Click::none;
  } else {
    r.outcome.click = Click::both;
    r.outcome.resolved_bit = random_bit(rng);
    r.s_c = r.outcome.resolved_bit;
  }
  r.tag = r.outcome.detected() ? sift(r.a, r.b, r.c) : SetTag::discard;
  return r;
}

double RoundSampler::set_probability(SetTag tag) const noexcept {
  const double px = params_.px;
  const double py = 1.0 - px;
  // Every sifted pattern interferes at a phase difference of 0 or pi, where
  // the no-click probability is the same.
  const double detect = 1.0 - probs_[0].none;
  switch (tag) {
    case SetTag::x_set: return px * px * px * detect;
    case SetTag::ybc_set:
    case SetTag::yac_set: return px * py * py * detect;
    case SetTag::discard: break;
  }
  return 0.0;
}

RoundRecord simulate_round(const SourceParams& params, const ChannelModel& ch,
                           std::mt19937_64& rng, std::uint64_t index) {
  return RoundSampler(params, ch).sample(index, rng);
}

RoundRecord apply_yac_flip(RoundRecord record) {
  if (!record.s_c) fail(ErrorKind::domain, "apply_yac_flip on a round without detection");
  if (record.tag == SetTag::yac_set) record.s_c = static_cast<std::uint8_t>(*record.s_c ^ 1u);
  return record;
}

double expected_rounds(const SourceParams& params, const ChannelModel& ch,
                       const Thresholds& thresholds) {
  const RoundSampler sampler(params, ch);
  double rounds = 0.0;
  const std::pair<SetTag, std::uint64_t> wanted[] = {{SetTag::x_set, thresholds.n_x},
                                                     {SetTag::ybc_set, thresholds.n_ybc},
                                                     {SetTag::yac_set, thresholds.n_yac}};
  for (const auto& [tag, n] : wanted) {
    if (n == 0) continue;
    const double p = sampler.set_probability(tag);
    if (!(p > 0.0)) return std::numeric_limits<double>::infinity();
    rounds = std::max(rounds, static_cast<double>(n) / p);
  }
  return rounds;
}

ProtocolRun run_protocol(const SourceParams& params, const ChannelModel& ch,
                         const Thresholds& thresholds, std::uint64_t seed,
                         const RunOptions& options) {
  if (thresholds.n_x == 0 || thresholds.n_ybc == 0 || thresholds.n_yac == 0) {
    fail(ErrorKind::domain, "sifting thresholds must be positive");
  }
  const RoundSampler sampler(params, ch);

  std::uint64_t cap = options.round_cap;
  if (cap == 0) {
    const double expected = expected_rounds(params, ch, thresholds);
    if (!std::isfinite(expected) || expected * 100.0 > 1e18) {
      fail(ErrorKind::degenerate_gain, "sifted sets cannot be filled: detection probability is zero");
    }
    cap = static_cast<std::uint64_t>(std::ceil(expected * 100.0));
  }

  ProtocolRun run;
  for (std::uint64_t block = 0;; ++block) {
    std::mt19937_64 rng(block_seed(seed, block));
    for (std::uint64_t r = 0; r < kBlockSize; ++r) {
      const std::uint64_t index = block * kBlockSize + r;
      if (index >= cap) {
        run.rounds_used = index;
        throw CapExceeded("round cap " + std::to_string(cap) + " reached before thresholds",
                          std::move(run));
      }
      RoundRecord rec = sampler.sample(index, rng);
      if (rec.s_c) rec = apply_yac_flip(std::move(rec));
      if (options.trace) options.trace(rec);
      if (absorb(run, rec, true) && reached(run.tallies, thresholds)) {
        run.rounds_used = index + 1;
        return run;
      }
    }
  }
}

ProtocolRun simulate_rounds(const SourceParams& params, const ChannelModel& ch,
                            std::uint64_t rounds, std::uint64_t seed, unsigned threads,
                            bool keep_keys, const std::function<void(const RoundRecord&)>& trace) {
  const RoundSampler sampler(params, ch);
  const std::uint64_t blocks = (rounds + kBlockSize - 1) / kBlockSize;
  std::vector<ProtocolRun> partial(blocks);

  auto run_block = [&](std::uint64_t block) {
    std::mt19937_64 rng(block_seed(seed, block));
    const std::uint64_t first = block * kBlockSize;
    const std::uint64_t last = std::min(rounds, first + kBlockSize);
    ProtocolRun& out = partial[block];
    for (std::uint64_t index = first; index < last; ++index) {
      RoundRecord rec = sampler.sample(index, rng);
      if (rec.s_c) rec = apply_yac_flip(std::move(rec));
      if (trace) trace(rec);
      absorb(out, rec, keep_keys);
    }
  };

  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  if (trace) threads = 1;
  threads = static_cast<unsigned>(std::min<std::uint64_t>(threads, std::max<std::uint64_t>(blocks, 1)));
  if (threads <= 1) {
    for (std::uint64_t b = 0; b < blocks; ++b) run_block(b);
  } else {
    std::atomic<std::uint64_t> next{0};
    std::vector<std::jthread> workers;
    workers.reserve(threads);
    for (unsigned t = 0; t < threads; ++t) {
      workers.emplace_back([&] {
        for (std::uint64_t b = next++; b < blocks; b = next++) run_block(b);
      });
    }
  }

  ProtocolRun merged;
  for (const ProtocolRun& p : partial) {
    merged.tallies += p.tallies;
    append(merged.keys.x, p.keys.x);
    append(merged.keys.ybc, p.keys.ybc);
    append(merged.keys.yac, p.keys.yac);
  }
  merged.rounds_used = rounds;
  return merged;
}

bool verify_correlation(std::span<const std::uint8_t> key_a, std::span<const std::uint8_t> key_b,
                        std::span<const std::uint8_t> key_c) {
  if (key_a.size() != key_b.size() || key_a.size() != key_c.size()) {
    fail(ErrorKind::input, "key length mismatch");
  }
  for (std::size_t i = 0; i < key_c.size(); ++i) {
    if (key_c[i] != (key_a[i] ^ key_b[i])) return false;
  }
  return true;
}

std::string_view to_string(Click click) noexcept {
  switch (click) {
    case Click::zero: return "ZERO";
    case Click::one: return "ONE";
    case Click::none: return "NONE";
    case Click::both: return "DOUBLE";
  }
  return "NONE";
}

std::string trace_header() { return "i,s_a,s_b,basis_a,basis_b,basis_c,outcome,s_c,set_tag"; }

std::string trace_line(const RoundRecord& r) {
  std::string line = std::to_string(r.index);
  line += ',';
  line += static_cast<char>('0' + r.s_a);
  line += ',';
  line += static_cast<char>('0' + r.s_b);
  line += ',';
  line += to_string(r.a);
  line += ',';
  line += to_string(r.b);
  line += ',';
  line += to_string(r.c);
  line += ',';
  line += to_string(r.outcome.click);
  line += ',';
  if (r.s_c) line += static_cast<char>('0' + *r.s_c);
  line += ',';
  line += qss::to_string(r.tag);
  return line;
}

}  // namespace qss::protocol
