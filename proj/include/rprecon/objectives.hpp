#pragma once

// Adapters that expose each geometry to rsd_solve: cost, search direction
// for a given omega, retraction and the tracked error measure.

#include <cstdint>
#include <functional>
#include <optional>

#include "rprecon/fixedrank.hpp"
#include "rprecon/problems.hpp"
#include "rprecon/solver.hpp"
#include "rprecon/stiefel.hpp"

namespace rprecon {

class StiefelObjective {
public:
  using Point = StiefelPoint;
  using Tangent = StiefelTangent;

  /// The schedule's omega replaces the live weight of spec; the Euclidean
  /// family ignores it. Without a reference the error measure is NaN.
  StiefelObjective(const GeneralizedStiefel &manifold, StiefelMetricSpec spec,
                   std::optional<Matrix> reference = std::nullopt);

  double cost(const Point &x) const { return manifold_->cost(x); }
  Direction<Tangent> direction(const Point &x, double omega) const;
  Point retract(const Point &x, const Tangent &t, double step) const {
    return manifold_->retract(x, t, step);
  }
  double error_measure(const Point &x) const;

  StiefelMetricSpec spec_for(double omega) const;
  /// Seeded start from the initialization stream of the master seed.
  Point initial_point(std::uint64_t master_seed) const;

private:
  const GeneralizedStiefel *manifold_;
  StiefelMetricSpec spec_;
  std::optional<Matrix> reference_;
};

class PsdObjective {
public:
  using Point = Matrix;
  using Tangent = Matrix;

  /// With the preconditioned family the schedule's omega is the coupling
  /// weight. error_measure is the relative residual when prob is given.
  PsdObjective(const PsdGeometry &geometry, PsdMetricSpec::Family family,
               const LyapProblem *prob = nullptr, CgOptions cg = {});

  double cost(const Point &y) const { return geometry_->cost(y); }
  Direction<Tangent> direction(const Point &y, double omega) const;
  Point retract(const Point &y, const Tangent &t, double step) const {
    return geometry_->retract(y, t, step);
  }
  double error_measure(const Point &y) const;

  /// Standard-normal draw scaled to minimize the cost along its own ray.
  Point initial_point(std::uint64_t master_seed, Index r) const;

private:
  const PsdGeometry *geometry_;
  PsdMetricSpec::Family family_;
  const LyapProblem *prob_;
  CgOptions cg_;
};

class GhObjective {
public:
  using Point = FactorPair;
  using Tangent = GhTangent;

  /// The schedule's omega is the block coupling weight for the block family
  /// and is ignored otherwise.
  GhObjective(const GhGeometry &geometry, RankMetricSpec spec,
              std::function<double(const FactorPair &)> error = {},
              CgOptions cg = {});

  double cost(const Point &p) const { return geometry_->cost(p); }
  Direction<Tangent> direction(const Point &p, double omega) const;
  Point retract(const Point &p, const Tangent &t, double step) const {
    return geometry_->retract(p, t, step);
  }
  double error_measure(const Point &p) const;

  Point initial_point(std::uint64_t master_seed, Index r) const;

private:
  const GhGeometry *geometry_;
  RankMetricSpec spec_;
  std::function<double(const FactorPair &)> error_;
  CgOptions cg_;
};

} // namespace rprecon
