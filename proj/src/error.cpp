#include "rprecon/error.hpp"

namespace rprecon {

std::string_view to_string(ErrorCode code) {
  switch (code) {
  case ErrorCode::RankDeficient:
    return "RankDeficient";
  case ErrorCode::NotSpd:
    return "NotSpd";
  case ErrorCode::NotSquare:
    return "NotSquare";
  case ErrorCode::NotSymmetric:
    return "NotSymmetric";
  case ErrorCode::Indefinite:
    return "Indefinite";
  case ErrorCode::SolveFailed:
    return "SolveFailed";
  case ErrorCode::SingularShift:
    return "SingularShift";
  case ErrorCode::BaseMismatch:
    return "BaseMismatch";
  case ErrorCode::DimensionMismatch:
    return "DimensionMismatch";
  case ErrorCode::ZeroRhs:
    return "ZeroRhs";
  case ErrorCode::IndefiniteMetric:
    return "IndefiniteMetric";
  case ErrorCode::LineSearchFailed:
    return "LineSearchFailed";
  case ErrorCode::PreconditionViolated:
    return "PreconditionViolated";
  case ErrorCode::InvalidArgument:
    return "InvalidArgument";
  case ErrorCode::ParseError:
    return "ParseError";
  }
  return "Unknown";
}

} // namespace rprecon
