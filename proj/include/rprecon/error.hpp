#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace rprecon {

enum class ErrorCode {
  RankDeficient,
  NotSpd,
  NotSquare,
  NotSymmetric,
  Indefinite,
  SolveFailed,
  SingularShift,
  BaseMismatch,
  DimensionMismatch,
  ZeroRhs,
  IndefiniteMetric,
  LineSearchFailed,
  PreconditionViolated,
  InvalidArgument,
  ParseError,
};

std::string_view to_string(ErrorCode code);

/// Failure raised by any numeric routine. The code is what callers branch on;
/// the message is for humans.
class Error : public std::runtime_error {
public:
  Error(ErrorCode code, const std::string &what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what),
        code_(code) {}

  ErrorCode code() const noexcept { return code_; }

private:
  ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string &what) {
  throw Error(code, what);
}

} // namespace rprecon
