#include "rprecon/solver.hpp"

namespace rprecon {

void SolverConfig::validate() const {
  if (max_iters < 0)
    fail(ErrorCode::InvalidArgument, "max_iters must be non-negative");
  if (!(grad_tol >= 0.0))
    fail(ErrorCode::InvalidArgument, "grad_tol must be non-negative");
  if (!(armijo_c > 0.0 && armijo_c < 1.0))
    fail(ErrorCode::InvalidArgument, "armijo_c must lie in (0, 1)");
  if (!(backtrack_factor > 0.0 && backtrack_factor < 1.0))
    fail(ErrorCode::InvalidArgument, "backtrack_factor must lie in (0, 1)");
  if (max_backtracks < 0)
    fail(ErrorCode::InvalidArgument, "max_backtracks must be non-negative");
  if (!(initial_step > 0.0))
    fail(ErrorCode::InvalidArgument, "initial_step must be positive");
  if (max_direction_retries < 0)
    fail(ErrorCode::InvalidArgument, "direction retries must be non-negative");
}

std::string_view to_string(SolveStatus status) {
  switch (status) {
  case SolveStatus::Converged:
    return "Converged";
  case SolveStatus::MaxIters:
    return "MaxIters";
  case SolveStatus::Stalled:
    return "Stalled";
  }
  return "Unknown";
}

} // namespace rprecon
