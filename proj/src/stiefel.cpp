#include "rprecon/stiefel.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <string>

#include "rprecon/error.hpp"
#include "rprecon/kernels.hpp"
#include "rprecon/rng.hpp"

namespace rprecon {

namespace {

constexpr double kFeasibilityTol = 1e-10;

void check_weight(double w, const char *name) {
  if (!(w >= 0.0 && w <= 1.0))
    fail(ErrorCode::InvalidArgument, std::string(name) + " must lie in [0, 1]");
}

} // namespace

StiefelMetricSpec StiefelMetricSpec::euclidean() {
  return {StiefelMetricFamily::Euclidean, 1.0, 0.0};
}

StiefelMetricSpec StiefelMetricSpec::convex_shifted(double omega) {
  StiefelMetricSpec s{StiefelMetricFamily::ConvexShifted, 1.0, omega};
  s.validate();
  return s;
}

StiefelMetricSpec StiefelMetricSpec::concave_shifted(double omega) {
  StiefelMetricSpec s{StiefelMetricFamily::ConcaveShifted, omega, 1.0};
  s.validate();
  return s;
}

double StiefelMetricSpec::live_omega() const {
  switch (family) {
  case StiefelMetricFamily::ConvexShifted:
    return omega2;
  case StiefelMetricFamily::ConcaveShifted:
    return omega1;
  case StiefelMetricFamily::Euclidean:
    break;
  }
  return 0.0;
}

StiefelMetricSpec StiefelMetricSpec::with_live_omega(double omega) const {
  StiefelMetricSpec s = *this;
  if (family == StiefelMetricFamily::ConvexShifted)
    s.omega2 = omega;
  else if (family == StiefelMetricFamily::ConcaveShifted)
    s.omega1 = omega;
  s.validate();
  return s;
}

void StiefelMetricSpec::validate() const {
  check_weight(omega1, "omega1");
  check_weight(omega2, "omega2");
  if (family == StiefelMetricFamily::ConvexShifted && omega1 != 1.0)
    fail(ErrorCode::InvalidArgument, "convex_shifted fixes omega1 = 1");
  if (family == StiefelMetricFamily::ConcaveShifted && omega2 != 1.0)
    fail(ErrorCode::InvalidArgument, "concave_shifted fixes omega2 = 1");
}

bool StiefelPoint::same_base(const StiefelPoint &other) const {
  if (x_ == other.x_)
    return true;
  if (!x_ || !other.x_)
    return false;
  return x_->rows() == other.x_->rows() && x_->cols() == other.x_->cols() &&
         *x_ == *other.x_;
}

GeneralizedStiefel::GeneralizedStiefel(Matrix a, Matrix b, Index r)
    : a_(std::move(a)), b_(std::move(b)), r_(r),
      b_identity_(b_.isIdentity(0.0)), b_factor_(b_) {
  require_symmetric(a_, "A");
  if (b_.rows() != a_.rows())
    fail(ErrorCode::DimensionMismatch, "A and B differ in size");
  if (r_ < 1 || r_ > a_.rows())
    fail(ErrorCode::InvalidArgument, "need 1 <= r <= n");
}

Matrix GeneralizedStiefel::apply_b(const Matrix &m) const {
  return b_identity_ ? m : Matrix(b_ * m);
}

double GeneralizedStiefel::feasibility_defect(const Matrix &x) const {
  const Matrix gram = x.transpose() * apply_b(x);
  return (gram - Matrix::Identity(x.cols(), x.cols())).norm();
}

StiefelPoint GeneralizedStiefel::make_point(const Matrix &x) const {
  if (x.rows() != n() || x.cols() != r_)
    fail(ErrorCode::DimensionMismatch, "point must be n x r");
  if (!x.allFinite())
    fail(ErrorCode::InvalidArgument, "point has non-finite entries");
  if (feasibility_defect(x) > kFeasibilityTol)
    return StiefelPoint(b_orthonormalize(x, b_factor_));
  return StiefelPoint(x);
}

StiefelPoint GeneralizedStiefel::random_point(std::uint64_t seed) const {
  NormalSource normal(seed);
  return StiefelPoint(b_orthonormalize(normal.matrix(n(), r_), b_factor_));
}

double GeneralizedStiefel::tangency_defect(const StiefelPoint &p,
                                           const Matrix &xi) const {
  return sym(p.x().transpose() * apply_b(xi)).norm();
}

StiefelTangent GeneralizedStiefel::make_tangent(const StiefelPoint &p,
                                                const Matrix &xi,
                                                double tol) const {
  if (xi.rows() != p.rows() || xi.cols() != p.cols())
    fail(ErrorCode::DimensionMismatch, "tangent must match the point shape");
  if (tangency_defect(p, xi) > tol * std::max(1.0, xi.norm()))
    fail(ErrorCode::PreconditionViolated, "matrix is not tangent at X");
  return {xi, p};
}

double GeneralizedStiefel::cost(const StiefelPoint &p) const {
  return 0.5 * kernels::inner(p.x(), a_ * p.x());
}

Matrix GeneralizedStiefel::euclidean_gradient(const StiefelPoint &p) const {
  return a_ * p.x();
}

Matrix GeneralizedStiefel::bx(const StiefelPoint &p) const {
  return apply_b(p.x());
}

Matrix GeneralizedStiefel::lambda_ls(const StiefelPoint &p) const {
  const Matrix bxm = bx(p);
  const Matrix gram = bxm.transpose() * bxm;
  const Matrix rhs = bxm.transpose() * (a_ * p.x());
  Eigen::LLT<Matrix> llt(gram);
  if (llt.info() != Eigen::Success)
    fail(ErrorCode::SolveFailed, "X^T B B X is not invertible");
  return sym(llt.solve(rhs));
}

GeneralizedStiefel::MetricOperator
GeneralizedStiefel::metric_operator(const StiefelMetricSpec &spec,
                                    const Matrix &lambda) const {
  spec.validate();
  switch (spec.family) {
  case StiefelMetricFamily::ConvexShifted:
    return {spec.omega1, -spec.omega2 * lambda};
  case StiefelMetricFamily::ConcaveShifted: {
    Matrix ltl = sym(lambda.transpose() * lambda);
    const double scale = lambda.squaredNorm();
    Eigen::SelfAdjointEigenSolver<Matrix> eig(ltl, Eigen::EigenvaluesOnly);
    if (eig.eigenvalues().minCoeff() < 1e-12 * scale)
      ltl += 1e-12 * scale * Matrix::Identity(ltl.rows(), ltl.cols());
    return {spec.omega1, spec.omega2 * sqrt_psd(ltl)};
  }
  case StiefelMetricFamily::Euclidean:
    break;
  }
  fail(ErrorCode::InvalidArgument, "euclidean metric has no shift operator");
}

double GeneralizedStiefel::metric_eval(const StiefelMetricSpec &spec,
                                       const StiefelPoint &p,
                                       const Matrix &lambda,
                                       const StiefelTangent &xi,
                                       const StiefelTangent &eta) const {
  if (!xi.base.same_base(eta.base) || !xi.base.same_base(p))
    fail(ErrorCode::BaseMismatch, "tangents live at different points");
  if (spec.family == StiefelMetricFamily::Euclidean)
    return kernels::inner(xi.xi, eta.xi);
  const MetricOperator op = metric_operator(spec, lambda);
  double value = 0.0;
  if (op.a_weight != 0.0)
    value += op.a_weight * kernels::inner(xi.xi, a_ * eta.xi);
  value += kernels::inner(xi.xi, apply_b(eta.xi * op.shift));
  return value;
}

StiefelTangent GeneralizedStiefel::euclidean_project(const StiefelPoint &p,
                                                     const Matrix &v) const {
  if (v.rows() != n() || v.cols() != r_)
    fail(ErrorCode::DimensionMismatch, "projection input must be n x r");
  const Matrix bxm = bx(p);
  const Matrix gram = bxm.transpose() * bxm;
  const Matrix xbv = bxm.transpose() * v;
  const Matrix s = small_lyap_solve(gram, xbv + xbv.transpose());
  return {v - bxm * s, p};
}

StiefelSearchDirection
GeneralizedStiefel::search_direction(const StiefelPoint &p,
                                     const StiefelMetricSpec &spec) const {
  return search_direction(p, spec, lambda_ls(p));
}

StiefelSearchDirection
GeneralizedStiefel::search_direction(const StiefelPoint &p,
                                     const StiefelMetricSpec &spec,
                                     const Matrix &lambda) const {
  const Matrix ax = euclidean_gradient(p);
  if (spec.family == StiefelMetricFamily::Euclidean) {
    // zeta = -A X + B X S with S from the projection.
    const Matrix bxm = bx(p);
    const Matrix gram = bxm.transpose() * bxm;
    const Matrix xbv = -bxm.transpose() * ax;
    const Matrix s = small_lyap_solve(gram, xbv + xbv.transpose());
    return {{-ax - bxm * s, p}, s};
  }

  const MetricOperator op = metric_operator(spec, lambda);
  Eigen::SelfAdjointEigenSolver<Matrix> eig(sym(op.shift));
  if (eig.info() != Eigen::Success)
    fail(ErrorCode::SolveFailed, "shift eigendecomposition failed");
  const Matrix &q = eig.eigenvectors();
  const Vector &theta = eig.eigenvalues();

  // Rotate into the eigenbasis of the shift; columns then decouple into
  // (w1 A + theta_i B) zt_i = B Xt mu_i - (A Xt)_i.
  const Matrix xt = p.x() * q;
  const Matrix bxt = apply_b(xt);
  const Matrix axt = ax * q;

  const Index r = r_;
  std::vector<Matrix> kb(static_cast<std::size_t>(r));
  Matrix d(n(), r);
  std::map<double, ShiftedFactorization> factors;
  for (Index i = 0; i < r; ++i) {
    auto it = factors.find(theta(i));
    if (it == factors.end())
      it = factors
               .emplace(theta(i),
                        ShiftedFactorization(a_, b_, -theta(i), op.a_weight))
               .first;
    kb[static_cast<std::size_t>(i)] = it->second.solve(bxt);
    d.col(i) = it->second.solve(axt.col(i));
  }

  // Tangency in rotated coordinates: C = Xt^T B Zt with column i equal to
  // G_i mu_i - e_i, G_i = Xt^T B K_i^{-1} B Xt, e_i = Xt^T B d_i.
  std::vector<Matrix> g(static_cast<std::size_t>(r));
  for (Index i = 0; i < r; ++i)
    g[static_cast<std::size_t>(i)] =
        bxt.transpose() * kb[static_cast<std::size_t>(i)];
  const Matrix e = bxt.transpose() * d;

  const std::vector<Matrix> basis = symmetric_basis(r);
  const Index m = static_cast<Index>(basis.size());
  auto sym_entries = [r, m](const Matrix &c) {
    Vector out(m);
    Index k = 0;
    for (Index l = 0; l < r; ++l)
      for (Index j = 0; j <= l; ++j)
        out(k++) = c(j, l) + c(l, j);
    return out;
  };
  Matrix jac(m, m);
  for (Index k = 0; k < m; ++k) {
    const Matrix &ek = basis[static_cast<std::size_t>(k)];
    Matrix c(r, r);
    for (Index i = 0; i < r; ++i)
      c.col(i) = g[static_cast<std::size_t>(i)] * ek.col(i);
    jac.col(k) = sym_entries(c);
  }
  const Vector rhs = sym_entries(e);
  Eigen::FullPivLU<Matrix> lu(jac);
  if (!lu.isInvertible())
    fail(ErrorCode::SolveFailed, "multiplier system is singular");
  const Vector coeffs = lu.solve(rhs);
  if (!coeffs.allFinite())
    fail(ErrorCode::SolveFailed, "multiplier system produced non-finite");

  Matrix mu_t = Matrix::Zero(r, r);
  for (Index k = 0; k < m; ++k)
    mu_t += coeffs(k) * basis[static_cast<std::size_t>(k)];

  Matrix zeta_t(n(), r);
  for (Index i = 0; i < r; ++i)
    zeta_t.col(i) = kb[static_cast<std::size_t>(i)] * mu_t.col(i) - d.col(i);
  if (!zeta_t.allFinite())
    fail(ErrorCode::SolveFailed, "search direction is non-finite");

  return {{zeta_t * q.transpose(), p}, sym(q * mu_t * q.transpose())};
}

StiefelPoint GeneralizedStiefel::retract(const StiefelPoint &p,
                                         const StiefelTangent &xi,
                                         double step) const {
  if (!xi.base.same_base(p))
    fail(ErrorCode::BaseMismatch, "tangent does not live at this point");
  const Matrix moved = kernels::add_scaled(p.x(), step, xi.xi);
  const Matrix rm = b_identity_ ? moved : b_factor_.apply_upper(moved);
  Eigen::JacobiSVD<Matrix> svd(rm, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const Vector &sv = svd.singularValues();
  if (!rm.allFinite() || sv(0) <= 0.0 ||
      sv(sv.size() - 1) <= kDefaultTolerances.rank * sv(0))
    fail(ErrorCode::RankDeficient, "retraction lost column rank");
  const Matrix polar = svd.matrixU() * svd.matrixV().transpose();
  Matrix x = b_identity_ ? polar : b_factor_.solve_upper(polar);
  if (feasibility_defect(x) > kFeasibilityTol)
    x = b_orthonormalize(x, b_factor_);
  return StiefelPoint(std::move(x));
}

std::vector<StiefelTangent>
GeneralizedStiefel::vertical_basis(const StiefelPoint &p) const {
  std::vector<StiefelTangent> out;
  const Index r = p.cols();
  for (Index k = 0; k < r; ++k) {
    for (Index l = k + 1; l < r; ++l) {
      Matrix omega = Matrix::Zero(r, r);
      omega(k, l) = 1.0;
      omega(l, k) = -1.0;
      out.push_back({p.x() * omega, p});
    }
  }
  return out;
}

} // namespace rprecon
