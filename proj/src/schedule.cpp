#include "rprecon/schedule.hpp"

#include <algorithm>
#include <cmath>

#include "rprecon/error.hpp"

namespace rprecon {

double clamp_omega(double omega) {
  if (std::isnan(omega))
    return 0.0;
  return std::clamp(omega, 0.0, OmegaSchedule::kOmegaMax);
}

OmegaSchedule OmegaSchedule::fixed(double omega) {
  OmegaSchedule s;
  s.kind = Kind::Fixed;
  s.omega_fixed = omega;
  s.validate();
  return s;
}

OmegaSchedule OmegaSchedule::geometric_barrier() {
  OmegaSchedule s;
  s.kind = Kind::GeometricBarrier;
  return s;
}

OmegaSchedule OmegaSchedule::adaptive_delta(double delta0) {
  OmegaSchedule s;
  s.kind = Kind::AdaptiveDelta;
  s.delta = delta0;
  s.validate();
  return s;
}

void OmegaSchedule::validate() const {
  if (kind == Kind::Fixed && !(omega_fixed >= 0.0 && omega_fixed < 1.0))
    fail(ErrorCode::InvalidArgument, "fixed omega must lie in [0, 1)");
  if (kind == Kind::AdaptiveDelta && !(delta > 0.0))
    fail(ErrorCode::InvalidArgument, "delta must be positive");
  if (kind == Kind::GeometricBarrier && k < 1)
    fail(ErrorCode::InvalidArgument, "barrier counter starts at 1");
}

double OmegaSchedule::omega() const {
  switch (kind) {
  case Kind::Fixed:
    return clamp_omega(omega_fixed);
  case Kind::GeometricBarrier:
    return clamp_omega(1.0 - std::ldexp(1.0, 1 - static_cast<int>(std::min<std::uint64_t>(k, 2000))));
  case Kind::AdaptiveDelta:
    return clamp_omega(1.0 - delta);
  }
  return 0.0;
}

OmegaUpdate omega_next(const OmegaSchedule &sched, DirectionEvent event) {
  OmegaSchedule s = sched;
  switch (s.kind) {
  case OmegaSchedule::Kind::Fixed:
    break;
  case OmegaSchedule::Kind::GeometricBarrier:
    s.k = event == DirectionEvent::Descent ? s.k + 1 : 1;
    break;
  case OmegaSchedule::Kind::AdaptiveDelta:
    s.delta *= event == DirectionEvent::Descent ? 0.5 : 4.0;
    s.delta = std::clamp(s.delta, OmegaSchedule::kDeltaMin,
                         OmegaSchedule::kDeltaMax);
    break;
  }
  return {s, s.omega()};
}

std::string_view to_string(OmegaSchedule::Kind kind) {
  switch (kind) {
  case OmegaSchedule::Kind::Fixed:
    return "fixed";
  case OmegaSchedule::Kind::GeometricBarrier:
    return "geometric";
  case OmegaSchedule::Kind::AdaptiveDelta:
    return "adaptive";
  }
  return "unknown";
}

} // namespace rprecon
