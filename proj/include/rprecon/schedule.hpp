#pragma once

#include <cstdint>
#include <string_view>

namespace rprecon {

enum class DirectionEvent { Descent, NonDescent };

/// Regularization-weight schedule. omega() is the weight to use for the next
/// search direction; next() folds in what happened with the last one.
struct OmegaSchedule {
  enum class Kind { Fixed, GeometricBarrier, AdaptiveDelta };

  static constexpr double kOmegaMax = 1.0 - 1e-8;
  static constexpr double kDeltaMin = 1e-8;
  static constexpr double kDeltaMax = 16.0;

  Kind kind = Kind::Fixed;
  double omega_fixed = 0.0;
  double delta = 1.0;       // adaptive state, 1 - omega before clamping
  std::uint64_t k = 1;      // geometric iteration counter

  static OmegaSchedule fixed(double omega);
  /// omega(k) = 1 - 2^{1-k}, restarted at k = 1 after a non-descent event.
  static OmegaSchedule geometric_barrier();
  /// delta <- delta / 2 on descent, 4 delta on non-descent, delta_0 = 1.
  static OmegaSchedule adaptive_delta(double delta0 = 1.0);

  double omega() const;
  void validate() const;
};

struct OmegaUpdate {
  OmegaSchedule schedule;
  double omega;
};

OmegaUpdate omega_next(const OmegaSchedule &sched, DirectionEvent event);

double clamp_omega(double omega);

std::string_view to_string(OmegaSchedule::Kind kind);

} // namespace rprecon
