#pragma once

// Riemannian steepest descent with backtracking line search and an omega
// schedule for the Lagrangian-Hessian metrics.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <concepts>
#include <cstdint>
#include <limits>
#include <optional>
#include <string_view>
#include <vector>

#include "rprecon/error.hpp"
#include "rprecon/schedule.hpp"

namespace rprecon {

struct SolverConfig {
  int max_iters = 500;
  double grad_tol = 1e-8;
  double armijo_c = 1e-4;
  double backtrack_factor = 0.5;
  int max_backtracks = 30;
  double initial_step = 1.0;
  std::uint64_t seed = 1;
  /// Consecutive rejected directions before forcing omega = 0.
  int max_direction_retries = 5;
  bool record_time = true;

  void validate() const;
};

enum class SolveStatus { Converged, MaxIters, Stalled };

std::string_view to_string(SolveStatus status);

struct TraceRow {
  int iter = 0;
  double cost = 0.0;
  double grad_norm = 0.0;
  double omega = 0.0;
  double step = 0.0; // step that produced this iterate; 0 for the start
  double error_measure = 0.0;
  double elapsed_ms = 0.0;
};

struct SolveTrace {
  std::vector<TraceRow> rows;
  SolveStatus status = SolveStatus::MaxIters;

  int iterations() const {
    return rows.empty() ? 0 : rows.back().iter;
  }
};

template <class Point> struct SolveResult {
  SolveTrace trace;
  Point final_point;
};

/// Search direction together with its slope <f_x(x), zeta>.
template <class Tangent> struct Direction {
  Tangent zeta;
  double slope;
};

template <class O>
concept RiemannianObjective =
    requires(const O &o, const typename O::Point &x,
             const typename O::Tangent &t, double s) {
      { o.cost(x) } -> std::convertible_to<double>;
      { o.direction(x, s) } -> std::same_as<Direction<typename O::Tangent>>;
      { o.retract(x, t, s) } -> std::same_as<typename O::Point>;
      { o.error_measure(x) } -> std::convertible_to<double>;
    };

template <class Point> struct LineSearchResult {
  double step;
  Point next;
  double cost;
  int trials;
};

/// Cost slack below which two values are indistinguishable in double
/// precision; keeps the sufficient-decrease test meaningful once the
/// predicted decrease drops under round-off.
inline double roundoff_slack(double f) {
  return 8.0 * std::numeric_limits<double>::epsilon() * std::abs(f);
}

/// Backtracking Armijo search along zeta. slope must be negative.
/// RankDeficient retractions count as rejected trials.
template <class Point, class Tangent, class CostFn, class RetractFn>
LineSearchResult<Point> armijo_step(const CostFn &cost, const RetractFn &retract,
                                    const Point &x, const Tangent &zeta,
                                    double f0, double slope,
                                    const SolverConfig &cfg) {
  if (!(slope < 0.0))
    fail(ErrorCode::PreconditionViolated,
         "line search needs a descent direction");
  double step = cfg.initial_step;
  for (int trial = 0; trial <= cfg.max_backtracks; ++trial) {
    try {
      Point next = retract(x, zeta, step);
      const double f = cost(next);
      if (std::isfinite(f) &&
          f <= f0 + cfg.armijo_c * step * slope + roundoff_slack(f0))
        return {step, std::move(next), f, trial + 1};
    } catch (const Error &e) {
      if (e.code() != ErrorCode::RankDeficient)
        throw;
    }
    step *= cfg.backtrack_factor;
  }
  fail(ErrorCode::LineSearchFailed, "no acceptable step found");
}

namespace detail {

inline bool recoverable_direction_failure(ErrorCode code) {
  return code == ErrorCode::SingularShift ||
         code == ErrorCode::IndefiniteMetric ||
         code == ErrorCode::SolveFailed;
}

} // namespace detail

/// Runs steepest descent from x0. The gradient norm reported and tested
/// against grad_tol is the norm in the active metric, sqrt(-<f_x, zeta>).
template <RiemannianObjective O>
SolveResult<typename O::Point>
rsd_solve(const O &objective, typename O::Point x0, OmegaSchedule schedule,
          const SolverConfig &cfg) {
  using Point = typename O::Point;
  using Tangent = typename O::Tangent;
  cfg.validate();
  schedule.validate();

  const auto start = std::chrono::steady_clock::now();
  auto elapsed = [&]() {
    if (!cfg.record_time)
      return 0.0;
    return std::chrono::duration<double, std::milli>(
               std::chrono::steady_clock::now() - start)
        .count();
  };

  SolveResult<Point> result{{}, std::move(x0)};
  Point &x = result.final_point;
  double fx = objective.cost(x);
  double last_step = 0.0;

  for (int iter = 0;; ++iter) {
    std::optional<Direction<Tangent>> dir;
    double omega_used = 0.0;
    int failures = 0;
    while (!dir) {
      const bool forced = failures >= cfg.max_direction_retries;
      omega_used = forced ? 0.0 : schedule.omega();
      std::optional<Direction<Tangent>> trial;
      try {
        trial.emplace(objective.direction(x, omega_used));
      } catch (const Error &e) {
        if (!detail::recoverable_direction_failure(e.code()))
          throw;
      }
      const bool usable = trial && std::isfinite(trial->slope);
      const bool stationary =
          usable && trial->slope <= 0.0 &&
          std::sqrt(-trial->slope) <= cfg.grad_tol;
      if (usable && (trial->slope < 0.0 || stationary)) {
        if (!stationary)
          schedule = omega_next(schedule, DirectionEvent::Descent).schedule;
        dir = std::move(trial);
        break;
      }
      if (forced)
        break;
      schedule = omega_next(schedule, DirectionEvent::NonDescent).schedule;
      ++failures;
    }

    TraceRow row;
    row.iter = iter;
    row.cost = fx;
    row.omega = omega_used;
    row.step = last_step;
    row.error_measure = objective.error_measure(x);
    if (!dir) {
      row.grad_norm = std::numeric_limits<double>::quiet_NaN();
      row.elapsed_ms = elapsed();
      result.trace.rows.push_back(row);
      result.trace.status = SolveStatus::Stalled;
      break;
    }
    row.grad_norm = std::sqrt(std::max(0.0, -dir->slope));
    row.elapsed_ms = elapsed();
    result.trace.rows.push_back(row);

    if (row.grad_norm <= cfg.grad_tol) {
      result.trace.status = SolveStatus::Converged;
      break;
    }
    if (iter >= cfg.max_iters) {
      result.trace.status = SolveStatus::MaxIters;
      break;
    }
    try {
      auto ls = armijo_step(
          [&](const Point &p) { return objective.cost(p); },
          [&](const Point &p, const Tangent &t, double s) {
            return objective.retract(p, t, s);
          },
          x, dir->zeta, fx, dir->slope, cfg);
      x = std::move(ls.next);
      fx = ls.cost;
      last_step = ls.step;
    } catch (const Error &e) {
      if (e.code() != ErrorCode::LineSearchFailed)
        throw;
      result.trace.status = SolveStatus::Stalled;
      break;
    }
  }
  return result;
}

} // namespace rprecon
