#pragma once

// Generalized Stiefel manifold {X : X^T B X = I} with its O(r) quotient (the
// generalized Grassmann manifold), specialised to the cost
// f(X) = trace(X^T A X) / 2.
//
// Metrics are the Lagrangian-Hessian family
//   g_X(xi, eta) = w1 <xi, A eta> - w2 <xi, B eta lambda_X>
// where lambda_X = Sym((X^T B B X)^{-1} X^T B A X) is the least-squares
// Lagrange multiplier. The concave variant replaces -lambda_X by
// (lambda_X^T lambda_X)^{1/2}.

#include <cstdint>
#include <memory>
#include <vector>

#include "rprecon/numerics.hpp"
#include "rprecon/types.hpp"

namespace rprecon {

enum class StiefelMetricFamily { Euclidean, ConvexShifted, ConcaveShifted };

struct StiefelMetricSpec {
  StiefelMetricFamily family = StiefelMetricFamily::Euclidean;
  double omega1 = 1.0;
  double omega2 = 0.0;

  static StiefelMetricSpec euclidean();
  /// omega1 = 1, omega2 = omega
  static StiefelMetricSpec convex_shifted(double omega);
  /// omega1 = omega, omega2 = 1, lambda replaced by (lambda^T lambda)^{1/2}
  static StiefelMetricSpec concave_shifted(double omega);

  /// The weight a schedule steers: omega2 for convex, omega1 for concave.
  double live_omega() const;
  StiefelMetricSpec with_live_omega(double omega) const;

  /// Throws InvalidArgument when a weight leaves [0, 1] or a fixed weight
  /// differs from 1.
  void validate() const;
};

/// Immutable point handle. Copies share storage, so tangents can tell
/// whether they were built at the same base.
class StiefelPoint {
public:
  StiefelPoint() = default;

  const Matrix &x() const { return *x_; }
  Index rows() const { return x_->rows(); }
  Index cols() const { return x_->cols(); }
  bool same_base(const StiefelPoint &other) const;

private:
  explicit StiefelPoint(Matrix x)
      : x_(std::make_shared<const Matrix>(std::move(x))) {}

  std::shared_ptr<const Matrix> x_;
  friend class GeneralizedStiefel;
};

struct StiefelTangent {
  Matrix xi;
  StiefelPoint base;
};

struct StiefelSearchDirection {
  StiefelTangent zeta; // negative Riemannian gradient
  Matrix mu;           // multiplier of the tangency constraint
};

class GeneralizedStiefel {
public:
  /// A symmetric n x n, B SPD n x n, 1 <= r <= n.
  GeneralizedStiefel(Matrix a, Matrix b, Index r);

  const Matrix &a() const { return a_; }
  const Matrix &b() const { return b_; }
  Index n() const { return a_.rows(); }
  Index r() const { return r_; }
  bool b_is_identity() const { return b_identity_; }
  const SpdFactorization &b_factor() const { return b_factor_; }

  /// Wraps X, B-orthonormalizing it when ||X^T B X - I||_F exceeds 1e-10.
  StiefelPoint make_point(const Matrix &x) const;
  /// Seeded standard-normal draw, B-orthonormalized.
  StiefelPoint random_point(std::uint64_t seed) const;

  /// Throws PreconditionViolated unless Sym(X^T B xi) vanishes to
  /// tol * max(1, ||xi||).
  StiefelTangent make_tangent(const StiefelPoint &p, const Matrix &xi,
                              double tol = 1e-9) const;
  double tangency_defect(const StiefelPoint &p, const Matrix &xi) const;
  double feasibility_defect(const Matrix &x) const;

  double cost(const StiefelPoint &p) const;
  /// Euclidean derivative f_x = A X.
  Matrix euclidean_gradient(const StiefelPoint &p) const;
  Matrix bx(const StiefelPoint &p) const;

  Matrix lambda_ls(const StiefelPoint &p) const;

  double metric_eval(const StiefelMetricSpec &spec, const StiefelPoint &p,
                     const Matrix &lambda, const StiefelTangent &xi,
                     const StiefelTangent &eta) const;

  /// Metric-orthogonal projection under the Euclidean metric.
  StiefelTangent euclidean_project(const StiefelPoint &p,
                                   const Matrix &v) const;

  /// Solves the search-direction KKT system
  ///   w1 A zeta + B zeta Shift = B X mu - A X,  Sym(X^T B zeta) = 0
  /// with Shift = -w2 lambda (convex) or (lambda^T lambda)^{1/2} (concave).
  /// Throws SingularShift when a shift hits a generalized eigenvalue.
  StiefelSearchDirection search_direction(const StiefelPoint &p,
                                          const StiefelMetricSpec &spec) const;
  StiefelSearchDirection search_direction(const StiefelPoint &p,
                                          const StiefelMetricSpec &spec,
                                          const Matrix &lambda) const;

  /// B-weighted polar retraction: R^{-1} U V^T from the thin SVD of
  /// R (X + s xi), B = R^T R.
  StiefelPoint retract(const StiefelPoint &p, const StiefelTangent &xi,
                       double step) const;

  /// X Omega_k for the canonical skew basis of so(r).
  std::vector<StiefelTangent> vertical_basis(const StiefelPoint &p) const;

  /// (w1, Shift) so that the metric operator is w1 A eta + B eta Shift.
  struct MetricOperator {
    double a_weight;
    Matrix shift;
  };
  MetricOperator metric_operator(const StiefelMetricSpec &spec,
                                 const Matrix &lambda) const;

private:
  Matrix apply_b(const Matrix &m) const;

  Matrix a_;
  Matrix b_;
  Index r_;
  bool b_identity_;
  SpdFactorization b_factor_;
};

} // namespace rprecon
