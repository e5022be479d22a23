#include "rprecon/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "rprecon/error.hpp"

namespace rprecon {

void require_square(const Matrix &m, const char *what) {
  if (m.rows() != m.cols() || m.rows() == 0)
    fail(ErrorCode::NotSquare, std::string(what) + " must be square");
}

void require_symmetric(const Matrix &m, const char *what, double rel_tol) {
  require_square(m, what);
  const double scale = std::max(m.norm(), 1e-300);
  if ((m - m.transpose()).norm() > rel_tol * scale)
    fail(ErrorCode::NotSymmetric, std::string(what) + " must be symmetric");
}

bool all_finite(const Matrix &m) { return m.allFinite(); }

SpdFactorization::SpdFactorization(const Matrix &source) {
  require_symmetric(source, "SPD factorization input");
  Eigen::LLT<Matrix> llt(source);
  if (llt.info() != Eigen::Success)
    fail(ErrorCode::NotSpd, "Cholesky factorization failed");
  lower_ = llt.matrixL();
  if (!lower_.allFinite() || lower_.diagonal().minCoeff() <= 0.0)
    fail(ErrorCode::NotSpd, "Cholesky factor has a non-positive pivot");
}

Matrix SpdFactorization::solve(const Matrix &rhs) const {
  Matrix y = lower_.triangularView<Eigen::Lower>().solve(rhs);
  return lower_.transpose().triangularView<Eigen::Upper>().solve(y);
}

Matrix SpdFactorization::apply_upper(const Matrix &m) const {
  return lower_.transpose().triangularView<Eigen::Upper>() * m;
}

Matrix SpdFactorization::solve_upper(const Matrix &m) const {
  return lower_.transpose().triangularView<Eigen::Upper>().solve(m);
}

Vector singular_values(const Matrix &m) {
  if (m.size() == 0)
    return Vector();
  Eigen::JacobiSVD<Matrix> svd(m);
  return svd.singularValues();
}

double inverse_condition(const Matrix &m) {
  const Vector s = singular_values(m);
  if (s.size() == 0 || s(0) == 0.0)
    return 0.0;
  return s(s.size() - 1) / s(0);
}

bool has_full_column_rank(const Matrix &m, double rank_tol) {
  if (m.cols() == 0 || m.cols() > m.rows() || !m.allFinite())
    return false;
  return inverse_condition(m) > rank_tol;
}

Matrix qf(const Matrix &m, double rank_tol) {
  const Index n = m.rows();
  const Index r = m.cols();
  if (r == 0 || r > n)
    fail(ErrorCode::RankDeficient, "qf needs 1 <= cols <= rows");
  if (!m.allFinite())
    fail(ErrorCode::RankDeficient, "qf input has non-finite entries");

  Eigen::HouseholderQR<Matrix> qr(m);
  const Matrix rfac =
      qr.matrixQR().topRows(r).triangularView<Eigen::Upper>();
  if (inverse_condition(rfac) <= rank_tol)
    fail(ErrorCode::RankDeficient, "qf input is not of full column rank");

  Matrix q = qr.householderQ() * Matrix::Identity(n, r);
  for (Index j = 0; j < r; ++j) {
    if (rfac(j, j) < 0.0)
      q.col(j) = -q.col(j);
  }
  return q;
}

Matrix b_orthonormalize(const Matrix &m, const SpdFactorization &b,
                        double rank_tol) {
  if (m.rows() != b.size())
    fail(ErrorCode::DimensionMismatch, "b_orthonormalize: M and B disagree");
  const Matrix q = qf(b.apply_upper(m), rank_tol);
  return b.solve_upper(q);
}

Matrix b_orthonormalize(const Matrix &m, const Matrix &b, double rank_tol) {
  return b_orthonormalize(m, SpdFactorization(b), rank_tol);
}

Matrix sym(const Matrix &d) {
  require_square(d, "sym argument");
  return 0.5 * (d + d.transpose());
}

Matrix sqrt_psd(const Matrix &s, const Tolerances &tol) {
  require_symmetric(s, "sqrt_psd argument", tol.symmetry);
  Eigen::SelfAdjointEigenSolver<Matrix> eig(sym(s));
  if (eig.info() != Eigen::Success)
    fail(ErrorCode::SolveFailed, "sqrt_psd eigendecomposition failed");
  Vector w = eig.eigenvalues();
  const double scale = w.cwiseAbs().maxCoeff();
  if (w.minCoeff() < -tol.psd_clamp * scale)
    fail(ErrorCode::Indefinite, "sqrt_psd argument has a negative eigenvalue");
  w = w.cwiseMax(0.0).cwiseSqrt();
  const Matrix &v = eig.eigenvectors();
  return sym(v * w.asDiagonal() * v.transpose());
}

namespace {

void require_spd(const Matrix &m, const char *what) {
  require_symmetric(m, what);
  Eigen::LLT<Matrix> llt(m);
  if (llt.info() != Eigen::Success)
    fail(ErrorCode::NotSpd, std::string(what) + " is not positive definite");
}

} // namespace

GenEig gen_eig_spd(const Matrix &ma, const Matrix &mb) {
  if (ma.rows() != mb.rows() || ma.cols() != mb.cols())
    fail(ErrorCode::DimensionMismatch, "gen_eig_spd: sizes differ");
  require_spd(ma, "gen_eig_spd Ma");
  require_spd(mb, "gen_eig_spd Mb");
  Eigen::GeneralizedSelfAdjointEigenSolver<Matrix> ges(sym(ma), sym(mb));
  if (ges.info() != Eigen::Success)
    fail(ErrorCode::NotSpd, "generalized eigendecomposition failed");
  GenEig out{ges.eigenvectors(), ges.eigenvalues()};
  if (out.values.minCoeff() <= 0.0)
    fail(ErrorCode::NotSpd, "gen_eig_spd produced a non-positive eigenvalue");
  return out;
}

Matrix sylvester_pair_solve(const Matrix &a, const Matrix &b, const Matrix &mb,
                            const Matrix &ma, const Matrix &f) {
  const Index n = a.rows();
  const Index r = ma.rows();
  if (b.rows() != n || b.cols() != n || a.cols() != n || f.rows() != n ||
      f.cols() != r || mb.rows() != r || mb.cols() != r || ma.cols() != r)
    fail(ErrorCode::DimensionMismatch, "sylvester_pair_solve shapes");

  const GenEig ge = gen_eig_spd(ma, mb);
  const Matrix fw = f * ge.vectors;
  Matrix z(n, r);
  for (Index i = 0; i < r; ++i) {
    Eigen::LLT<Matrix> llt(a + ge.values(i) * b);
    if (llt.info() != Eigen::Success)
      fail(ErrorCode::NotSpd, "sylvester_pair_solve: A + d B not SPD");
    z.col(i) = llt.solve(fw.col(i));
  }
  if (!z.allFinite())
    fail(ErrorCode::SolveFailed, "sylvester_pair_solve produced non-finite");
  return z * ge.vectors.transpose();
}

Matrix small_lyap_solve(const Matrix &p, const Matrix &q) {
  require_symmetric(p, "small_lyap_solve P");
  require_symmetric(q, "small_lyap_solve Q");
  if (p.rows() != q.rows())
    fail(ErrorCode::DimensionMismatch, "small_lyap_solve: sizes differ");
  Eigen::SelfAdjointEigenSolver<Matrix> eig(sym(p));
  const Vector &w = eig.eigenvalues();
  if (w.minCoeff() <= 0.0)
    fail(ErrorCode::NotSpd, "small_lyap_solve: P is not positive definite");
  const Matrix &v = eig.eigenvectors();
  Matrix qt = v.transpose() * q * v;
  for (Index j = 0; j < qt.cols(); ++j)
    for (Index i = 0; i < qt.rows(); ++i)
      qt(i, j) /= w(i) + w(j);
  return sym(v * qt * v.transpose());
}

ShiftedFactorization::ShiftedFactorization(const Matrix &a, const Matrix &b,
                                           double sigma, double alpha,
                                           const Tolerances &tol)
    : sigma_(sigma) {
  require_square(a, "shifted system A");
  if (b.rows() != a.rows() || b.cols() != a.cols())
    fail(ErrorCode::DimensionMismatch, "shifted system: A and B differ");
  const Matrix k = alpha * a - sigma * b;
  if (!k.allFinite())
    fail(ErrorCode::SolveFailed, "shifted matrix has non-finite entries");
  const double scale = k.cwiseAbs().rowwise().sum().maxCoeff();
  lu_.compute(k);
  const double pivot = lu_.matrixLU().diagonal().cwiseAbs().minCoeff();
  if (!(pivot > tol.pivot * scale))
    fail(ErrorCode::SingularShift, "shift makes the system singular");
}

Matrix ShiftedFactorization::solve(const Matrix &rhs) const {
  Matrix x = lu_.solve(rhs);
  if (!x.allFinite())
    fail(ErrorCode::SolveFailed, "shifted solve produced non-finite values");
  return x;
}

Matrix shifted_solve(const Matrix &a, const Matrix &b, double sigma,
                     const Matrix &rhs, const Tolerances &tol) {
  return ShiftedFactorization(a, b, sigma, 1.0, tol).solve(rhs);
}

std::vector<Matrix> symmetric_basis(Index r) {
  std::vector<Matrix> basis;
  basis.reserve(static_cast<std::size_t>(r * (r + 1) / 2));
  for (Index l = 0; l < r; ++l) {
    for (Index k = 0; k <= l; ++k) {
      Matrix e = Matrix::Zero(r, r);
      e(k, l) = 1.0;
      e(l, k) = 1.0;
      basis.push_back(std::move(e));
    }
  }
  return basis;
}

} // namespace rprecon
