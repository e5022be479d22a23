#pragma once

// Fixed-rank quotient geometries.
//
//  * Two-factor X = G H^T on R*^{n x r} x R*^{m x r} / GL(r), cost
//      f = trace(H G^T A G H^T B) / 2 + trace(H G^T C).
//  * Symmetric X = Y Y^T on R*^{n x r} / O(r), energy-norm cost
//      f = trace(Y Y^T A Y Y^T B) - trace(Y Y^T C).
//
// Both total spaces are open, so tangent vectors are arbitrary ambient
// matrices and the retraction is the additive update.

#include <array>

#include "rprecon/numerics.hpp"
#include "rprecon/types.hpp"

namespace rprecon {

struct FactorPair {
  Matrix g; // n x r
  Matrix h; // m x r
};

using GhTangent = FactorPair;

double inner(const FactorPair &a, const FactorPair &b);

struct RankMetricSpec {
  enum class Family { EuclideanNatural, FullHessian, BlockDiagonal };

  Family family = Family::EuclideanNatural;
  double omega = 0.0; // coupling weight of the block family, in [0, 1)
  std::array<double, 4> weights{1.0, 0.0, 1.0, 0.0}; // full_hessian only

  static RankMetricSpec euclidean_natural();
  static RankMetricSpec block_diagonal(double omega);
  /// Requires w2 == w4, which is what makes the form symmetric.
  static RankMetricSpec full_hessian(double w1, double w2, double w3,
                                     double w4);

  /// (w1, w2, w3, w4) actually applied; block maps to (1, omega, 1, omega).
  std::array<double, 4> effective_weights() const;
  void validate() const;
};

struct CgOptions {
  int max_iters = 250;
  double tol = 1e-10;
};

class GhGeometry {
public:
  /// A n x n SPD, B m x m SPD, C n x m.
  GhGeometry(Matrix a, Matrix b, Matrix c);

  Index n() const { return a_.rows(); }
  Index m() const { return b_.rows(); }
  const Matrix &a() const { return a_; }
  const Matrix &b() const { return b_; }
  const Matrix &c() const { return c_; }

  /// Throws RankDeficient when either factor loses column rank.
  FactorPair make_point(Matrix g, Matrix h) const;

  double cost(const FactorPair &p) const;
  /// (S H, S^T G) with S = A G H^T B + C, never formed densely.
  GhTangent euclidean_gradient(const FactorPair &p) const;

  /// Riemannian gradient under the omega = 0 block metric:
  /// (A^{-1} S H (H^T B H)^{-1}, B^{-1} S^T G (G^T A G)^{-1}).
  GhTangent gradient_block(const FactorPair &p) const;
  GhTangent gradient_block(const FactorPair &p, const GhTangent &egrad) const;

  /// Riemannian gradient under the natural metric.
  GhTangent gradient_natural(const FactorPair &p, const GhTangent &egrad) const;

  /// Solves MetricOp(zeta) = f_x by preconditioned conjugate gradients.
  /// Throws IndefiniteMetric on non-positive curvature.
  GhTangent gradient_full(const FactorPair &p, const RankMetricSpec &spec,
                          const CgOptions &cg = {}) const;
  GhTangent gradient_full(const FactorPair &p, const RankMetricSpec &spec,
                          const GhTangent &egrad, const CgOptions &cg) const;

  /// Dispatches on the family (block with omega = 0 takes the closed form).
  GhTangent gradient(const FactorPair &p, const RankMetricSpec &spec,
                     const CgOptions &cg = {}) const;

  /// The self-adjoint metric operator, g(xi, eta) = <eta, apply(xi)>.
  GhTangent metric_apply(const RankMetricSpec &spec, const FactorPair &p,
                         const GhTangent &xi) const;
  double metric_eval(const RankMetricSpec &spec, const FactorPair &p,
                     const GhTangent &xi, const GhTangent &eta) const;

  FactorPair retract(const FactorPair &p, const GhTangent &xi,
                     double step) const;

private:
  void check_point(const FactorPair &p) const;
  void check_tangent(const FactorPair &p, const GhTangent &xi) const;

  Matrix a_, b_, c_;
  SpdFactorization a_factor_, b_factor_;
};

struct PsdMetricSpec {
  enum class Family { Euclidean, Preconditioned };

  Family family = Family::Euclidean;
  double omega = 0.0; // in [0, 1)

  static PsdMetricSpec euclidean();
  static PsdMetricSpec preconditioned(double omega);
  void validate() const;
};

class PsdGeometry {
public:
  /// A, B n x n SPD; C n x n symmetric.
  PsdGeometry(Matrix a, Matrix b, Matrix c);

  Index n() const { return a_.rows(); }
  const Matrix &a() const { return a_; }
  const Matrix &b() const { return b_; }
  const Matrix &c() const { return c_; }

  /// Throws RankDeficient unless Y has full column rank.
  Matrix make_point(Matrix y) const;

  double cost(const Matrix &y) const;
  /// 2 (A Y (Y^T B Y) + B Y (Y^T A Y) - C Y)
  Matrix euclidean_gradient(const Matrix &y) const;

  /// Solves A zeta (Y^T B Y) + B zeta (Y^T A Y) = f_Y.
  Matrix gradient_block(const Matrix &y) const;
  Matrix gradient_block(const Matrix &y, const Matrix &egrad) const;

  /// CG solve of the omega > 0 metric; throws IndefiniteMetric.
  Matrix gradient_full(const Matrix &y, const PsdMetricSpec &spec,
                       const Matrix &egrad, const CgOptions &cg = {}) const;

  Matrix gradient(const Matrix &y, const PsdMetricSpec &spec,
                  const CgOptions &cg = {}) const;

  /// The coupling term uses -C so that the operator is half the Hessian of
  /// the energy-norm cost above.
  Matrix metric_apply(const PsdMetricSpec &spec, const Matrix &y,
                      const Matrix &xi) const;
  double metric_eval(const PsdMetricSpec &spec, const Matrix &y,
                     const Matrix &xi, const Matrix &eta) const;

  Matrix retract(const Matrix &y, const Matrix &xi, double step) const;

private:
  void check_shape(const Matrix &y, const char *what) const;

  Matrix a_, b_, c_;
};

} // namespace rprecon
