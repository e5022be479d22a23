#include "rprecon/problems.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "rprecon/error.hpp"

namespace rprecon {

void EigProblem::validate() const {
  require_symmetric(a, "A", 1e-12);
  if (b.rows() != a.rows() || b.cols() != a.cols())
    fail(ErrorCode::DimensionMismatch, "A and B differ in size");
  SpdFactorization check(b);
  if (r < 1 || r > a.rows())
    fail(ErrorCode::InvalidArgument, "need 1 <= r <= n");
  if (known_solution &&
      (known_solution->rows() != a.rows() || known_solution->cols() != r))
    fail(ErrorCode::DimensionMismatch, "known solution must be n x r");
}

void LyapProblem::validate() const {
  SpdFactorization check_a(a);
  SpdFactorization check_b(b);
  if (b.rows() != a.rows() || c.rows() != a.rows())
    fail(ErrorCode::DimensionMismatch, "A, B, C differ in size");
  require_symmetric(c, "C");
  if (r < 1 || r > a.rows())
    fail(ErrorCode::InvalidArgument, "need 1 <= r <= n");
  if (c_factor.rows() != a.rows() || c_factor.cols() != c_signs.size())
    fail(ErrorCode::DimensionMismatch, "C factor does not conform");
}

EigProblem manton_eig(Index n, Index r) {
  if (n < 1 || r < 1 || r > n)
    fail(ErrorCode::InvalidArgument, "manton_eig needs n >= r >= 1");
  Vector diag(n);
  for (Index i = 0; i < n; ++i)
    diag(i) = n == 1 ? 10.0
                     : 10.0 + static_cast<double>(i) / static_cast<double>(n - 1);
  EigProblem p;
  p.a = diag.asDiagonal();
  p.b = Matrix::Identity(n, n);
  p.r = r;
  p.known_solution = Matrix::Identity(n, r);
  return p;
}

LyapProblem penzl_lyap(Index n, Index r) {
  if (n < 2 || r < 1 || r > n)
    fail(ErrorCode::InvalidArgument, "penzl_lyap needs n >= 2, 1 <= r <= n");
  LyapProblem p;
  p.a = Matrix::Zero(n, n);
  for (Index i = 0; i < n; ++i) {
    p.a(i, i) = 2.0;
    if (i + 1 < n) {
      p.a(i, i + 1) = -1.0;
      p.a(i + 1, i) = -1.0;
    }
  }
  p.b = Matrix::Identity(n, n);
  p.c = Matrix::Zero(n, n);
  p.c(n - 1, n - 1) = 1.0;
  p.r = r;
  p.c_factor = Matrix::Zero(n, 1);
  p.c_factor(n - 1, 0) = 1.0;
  p.c_signs = Vector::Ones(1);
  return p;
}

LyapProblem make_lyap_problem(Matrix a, Matrix b, Matrix c, Index r) {
  LyapProblem p;
  require_symmetric(c, "C");
  Eigen::SelfAdjointEigenSolver<Matrix> eig(sym(c));
  const Vector &w = eig.eigenvalues();
  const double scale = w.cwiseAbs().maxCoeff();
  std::vector<Index> keep;
  for (Index i = 0; i < w.size(); ++i)
    if (std::abs(w(i)) > 1e-12 * scale)
      keep.push_back(i);
  p.c_factor.resize(c.rows(), static_cast<Index>(keep.size()));
  p.c_signs.resize(static_cast<Index>(keep.size()));
  for (std::size_t k = 0; k < keep.size(); ++k) {
    const Index i = keep[k];
    const auto col = static_cast<Index>(k);
    p.c_factor.col(col) = std::sqrt(std::abs(w(i))) * eig.eigenvectors().col(i);
    p.c_signs(col) = w(i) > 0.0 ? 1.0 : -1.0;
  }
  p.a = std::move(a);
  p.b = std::move(b);
  p.c = std::move(c);
  p.r = r;
  p.validate();
  return p;
}

Matrix power_step(const Matrix &x, const Matrix &a) {
  if (a.cols() != x.rows())
    fail(ErrorCode::DimensionMismatch, "power_step shapes");
  return qf(a * x);
}

InverseIteration::InverseIteration(const Matrix &a) {
  require_square(a, "A");
  lu_.compute(a);
  const double scale = a.cwiseAbs().rowwise().sum().maxCoeff();
  if (!(lu_.matrixLU().diagonal().cwiseAbs().minCoeff() >
        kDefaultTolerances.pivot * scale))
    fail(ErrorCode::SingularShift, "A is singular");
}

Matrix InverseIteration::step(const Matrix &x) const {
  if (lu_.rows() != x.rows())
    fail(ErrorCode::DimensionMismatch, "inverse_step shapes");
  return qf(lu_.solve(x));
}

Matrix inverse_step(const Matrix &x, const Matrix &a) {
  return InverseIteration(a).step(x);
}

Matrix grqi_solve(const Matrix &x, const Matrix &a) {
  require_symmetric(a, "A");
  if (a.cols() != x.rows())
    fail(ErrorCode::DimensionMismatch, "grqi shapes");
  const Matrix ritz = sym(x.transpose() * a * x);
  Eigen::SelfAdjointEigenSolver<Matrix> eig(ritz);
  const Matrix &q = eig.eigenvectors();
  const Vector &theta = eig.eigenvalues();
  const Matrix xq = x * q;
  const Matrix identity = Matrix::Identity(a.rows(), a.cols());
  Matrix z(x.rows(), x.cols());
  for (Index i = 0; i < x.cols(); ++i)
    z.col(i) = shifted_solve(a, identity, theta(i), xq.col(i));
  return z * q.transpose();
}

Matrix grqi_step(const Matrix &x, const Matrix &a) {
  return qf(grqi_solve(x, a));
}

Vector canonical_angles(const Matrix &x, const Matrix &y) {
  if (x.rows() != y.rows())
    fail(ErrorCode::DimensionMismatch, "subspaces live in different spaces");
  const Matrix qx = qf(x);
  const Matrix qy = qf(y);
  const Index k = std::min(qx.cols(), qy.cols());
  // Cosines resolve large angles, sines resolve small ones.
  const Matrix cross = qx.transpose() * qy;
  Vector cosines = singular_values(cross).head(k); // descending
  const Matrix residual = qy - qx * cross;
  Vector sines = singular_values(residual);        // descending
  Vector angles(k);
  for (Index i = 0; i < k; ++i) {
    const double c = std::clamp(cosines(i), -1.0, 1.0);
    if (c * c < 0.5) {
      angles(i) = std::acos(c);
    } else {
      // i-th smallest angle pairs with the i-th smallest sine
      const Index j = sines.size() - 1 - i;
      const double s = j >= 0 ? std::clamp(sines(j), -1.0, 1.0) : 0.0;
      angles(i) = std::asin(s);
    }
  }
  std::sort(angles.data(), angles.data() + angles.size());
  return angles;
}

double subspace_distance(const Matrix &x, const Matrix &y) {
  return canonical_angles(x, y).norm();
}

double lyap_residual(const Matrix &y, const LyapProblem &prob) {
  const Index n = prob.a.rows();
  if (y.rows() != n)
    fail(ErrorCode::DimensionMismatch, "Y must have n rows");
  const double c_norm = prob.c.norm();
  if (c_norm == 0.0)
    fail(ErrorCode::ZeroRhs, "relative residual undefined for C = 0");
  const Index r = y.cols();
  const Index k = prob.c_factor.cols();
  Matrix u(n, 2 * r + k);
  u << prob.a * y, prob.b * y, prob.c_factor;
  Matrix mid = Matrix::Zero(2 * r + k, 2 * r + k);
  mid.block(0, r, r, r).setIdentity();
  mid.block(r, 0, r, r).setIdentity();
  for (Index i = 0; i < k; ++i)
    mid(2 * r + i, 2 * r + i) = -prob.c_signs(i);
  Eigen::HouseholderQR<Matrix> qr(u);
  const Index rows = std::min(n, u.cols());
  const Matrix t = qr.matrixQR().topRows(rows).triangularView<Eigen::Upper>();
  return (t * mid * t.transpose()).norm() / c_norm;
}

} // namespace rprecon
