#pragma once

#include <cstdint>
#include <string_view>

namespace qss {

enum class Basis : std::uint8_t { X, Y };

/// Sifted set a round (or a count-table row) belongs to.
enum class SetTag : std::uint8_t { x_set, ybc_set, yac_set, discard };

/// A phase expressed as a whole number of quarter turns (multiples of pi/2),
/// always normalised to 0..3. Every phase the protocol uses lies on this grid,
/// so interference conditions can be evaluated exactly.
class QuarterTurns {
 public:
  constexpr QuarterTurns() = default;
  constexpr explicit QuarterTurns(int turns) : value_(((turns % 4) + 4) % 4) {}

  constexpr int value() const noexcept { return value_; }
  double radians() const noexcept;

  friend constexpr QuarterTurns operator+(QuarterTurns a, QuarterTurns b) {
    return QuarterTurns(a.value_ + b.value_);
  }
  friend constexpr QuarterTurns operator-(QuarterTurns a, QuarterTurns b) {
    return QuarterTurns(a.value_ - b.value_);
  }
  friend constexpr bool operator==(QuarterTurns, QuarterTurns) = default;

 private:
  int value_ = 0;
};

std::string_view to_string(Basis basis) noexcept;
std::string_view to_string(SetTag tag) noexcept;

/// Set membership from the three announced bases, before the detection check.
constexpr SetTag sift(Basis a, Basis b, Basis c) noexcept {
  if (a == Basis::X && b == Basis::X && c == Basis::X) return SetTag::x_set;
  if (a == Basis::X && b == Basis::Y && c == Basis::Y) return SetTag::ybc_set;
  if (a == Basis::Y && b == Basis::X && c == Basis::Y) return SetTag::yac_set;
  return SetTag::discard;
}

}  // namespace qss
