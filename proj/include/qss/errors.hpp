#pragma once

#include <stdexcept>
#include <string>

namespace qss {

/// Failure categories. The CLI maps each category onto its exit code.
enum class ErrorKind {
  input,                 // malformed file, bad flag, duplicate row
  domain,                // argument outside the operation's domain
  degenerate_gain,       // Q_mu == 0, error rates undefined
  numerical_degeneracy,  // closed form produced a non-finite value
  cap_exceeded,          // round cap hit before the sifting thresholds
  zero_count,            // expected sifted count below one
  all_abort,             // every evaluated point gives an empty key
};

const char* to_string(ErrorKind kind) noexcept;

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& what) {
  throw Error(kind, what);
}

}  // namespace qss
