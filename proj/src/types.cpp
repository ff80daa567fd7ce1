#include "qss/types.hpp"

#include <numbers>

#include "qss/errors.hpp"

namespace qss {

double QuarterTurns::radians() const noexcept {
  return value_ * (std::numbers::pi / 2.0);
}

std::string_view to_string(Basis basis) noexcept {
  return basis == Basis::X ? "X" : "Y";
}

std::string_view to_string(SetTag tag) noexcept {
  switch (tag) {
    case SetTag::x_set: return "X_SET";
    case SetTag::ybc_set: return "YBC_SET";
    case SetTag::yac_set: return "YAC_SET";
    case SetTag::discard: return "DISCARD";
  }
  return "DISCARD";
}

const char* to_string(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::input: return "input";
    case ErrorKind::domain: return "domain";
    case ErrorKind::degenerate_gain: return "degenerate_gain";
    case ErrorKind::numerical_degeneracy: return "numerical_degeneracy";
    case ErrorKind::cap_exceeded: return "cap_exceeded";
    case ErrorKind::zero_count: return "zero_count";
    case ErrorKind::all_abort: return "all_abort";
  }
  return "unknown";
}

}  // namespace qss
