#include "rprecon_oracles/oracles.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace rprecon::oracle {

Matrix kron(const Matrix &a, const Matrix &b) {
  Matrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Index j = 0; j < a.cols(); ++j)
    for (Index i = 0; i < a.rows(); ++i)
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return out;
}

Vector vec(const Matrix &m) {
  return Eigen::Map<const Vector>(m.data(), m.size());
}

Matrix unvec(const Vector &v, Index rows, Index cols) {
  return Eigen::Map<const Matrix>(v.data(), rows, cols);
}

Matrix random_spd(Index n, NormalSource &normal, double shift) {
  const Matrix g = normal.matrix(n, n);
  Matrix s = g * g.transpose() / static_cast<double>(n);
  s.diagonal().array() += shift;
  return 0.5 * (s + s.transpose());
}

Matrix random_symmetric(Index n, NormalSource &normal) {
  const Matrix g = normal.matrix(n, n);
  return 0.5 * (g + g.transpose());
}

Matrix random_orthogonal(Index r, NormalSource &normal) {
  Eigen::HouseholderQR<Matrix> qr(normal.matrix(r, r));
  return qr.householderQ() * Matrix::Identity(r, r);
}

Matrix random_invertible(Index r, NormalSource &normal) {
  const Matrix u = random_orthogonal(r, normal);
  const Matrix v = random_orthogonal(r, normal);
  Vector s(r);
  for (Index i = 0; i < r; ++i)
    s(i) = r == 1 ? 1.5 : 0.5 + 1.5 * static_cast<double>(i) / (r - 1);
  return u * s.asDiagonal() * v.transpose();
}

Matrix kron_sylvester_pair(const Matrix &a, const Matrix &b, const Matrix &mb,
                           const Matrix &ma, const Matrix &f) {
  const Matrix k = kron(mb.transpose(), a) + kron(ma.transpose(), b);
  return unvec(k.fullPivLu().solve(vec(f)), f.rows(), f.cols());
}

Matrix kron_sylvester(const Matrix &a, const Matrix &s, const Matrix &x) {
  const Index r = s.rows();
  const Index n = a.rows();
  const Matrix k = kron(Matrix::Identity(r, r), a) -
                   kron(s.transpose(), Matrix::Identity(n, n));
  return unvec(k.fullPivLu().solve(vec(x)), x.rows(), x.cols());
}

Matrix mgs_b_orthonormalize(const Matrix &m, const Matrix &b) {
  Matrix u = m;
  for (Index j = 0; j < u.cols(); ++j) {
    for (Index i = 0; i < j; ++i) {
      const double proj = u.col(i).dot(b * u.col(j));
      u.col(j) -= proj * u.col(i);
    }
    const double norm = std::sqrt(u.col(j).dot(b * u.col(j)));
    u.col(j) /= norm;
  }
  return u;
}

Matrix b_projector(const Matrix &x, const Matrix &b) {
  const Matrix gram = x.transpose() * b * x;
  return x * gram.fullPivLu().solve(x.transpose() * b);
}

Matrix lambda_least_squares(const Matrix &x, const Matrix &a, const Matrix &b) {
  const Matrix bx = b * x;
  const Matrix l = bx.colPivHouseholderQr().solve(a * x);
  return 0.5 * (l + l.transpose());
}

Matrix sqrtm_psd(const Matrix &s) {
  Eigen::SelfAdjointEigenSolver<Matrix> eig(0.5 * (s + s.transpose()));
  const Vector w = eig.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  return eig.eigenvectors() * w.asDiagonal() * eig.eigenvectors().transpose();
}

KktSolution kkt_monolithic(const Matrix &k, const Matrix &bx,
                           const Matrix &rhs) {
  const Index n = bx.rows();
  const Index r = bx.cols();
  const Index nr = n * r;
  std::vector<Matrix> basis;
  for (Index l = 0; l < r; ++l)
    for (Index i = 0; i <= l; ++i) {
      Matrix e = Matrix::Zero(r, r);
      e(i, l) = 1.0;
      e(l, i) = 1.0;
      basis.push_back(e);
    }
  const auto nb = static_cast<Index>(basis.size());
  Matrix w(nr, nb);
  for (Index q = 0; q < nb; ++q)
    w.col(q) = vec(bx * basis[q]);
  Matrix sys = Matrix::Zero(nr + nb, nr + nb);
  sys.topLeftCorner(nr, nr) = k;
  sys.topRightCorner(nr, nb) = -w;
  sys.bottomLeftCorner(nb, nr) = w.transpose();
  Vector full = Vector::Zero(nr + nb);
  full.head(nr) = vec(rhs);
  const Vector sol = sys.fullPivLu().solve(full);
  Matrix mu = Matrix::Zero(r, r);
  for (Index q = 0; q < nb; ++q)
    mu += sol(nr + q) * basis[q];
  return {unvec(sol.head(nr), n, r), mu};
}

KktSolution search_direction_oracle(const Matrix &a, const Matrix &b,
                                    const Matrix &x, double a_weight,
                                    const Matrix &shift) {
  const Index r = x.cols();
  const Matrix k = kron(Matrix::Identity(r, r), a_weight * a) +
                   kron(shift.transpose(), b);
  return kkt_monolithic(k, b * x, -a * x);
}

Matrix euclidean_project_oracle(const Matrix &x, const Matrix &b,
                                const Matrix &v) {
  const Index nr = x.size();
  return kkt_monolithic(Matrix::Identity(nr, nr), b * x, v).zeta;
}

Matrix dense_lyap(const Matrix &a, const Matrix &b, const Matrix &c) {
  Eigen::GeneralizedSelfAdjointEigenSolver<Matrix> ges(a, b);
  const Matrix &v = ges.eigenvectors();
  const Vector &d = ges.eigenvalues();
  Matrix t = v.transpose() * c * v;
  for (Index j = 0; j < t.cols(); ++j)
    for (Index i = 0; i < t.rows(); ++i)
      t(i, j) /= d(i) + d(j);
  const Matrix x = v * t * v.transpose();
  return 0.5 * (x + x.transpose());
}

Matrix dense_lyap_kron(const Matrix &a, const Matrix &b, const Matrix &c) {
  const Matrix k = kron(b.transpose(), a) + kron(a.transpose(), b);
  return unvec(k.fullPivLu().solve(vec(c)), c.rows(), c.cols());
}

Matrix best_psd_factor(const Matrix &x, Index r) {
  Eigen::SelfAdjointEigenSolver<Matrix> eig(0.5 * (x + x.transpose()));
  const Index n = x.rows();
  Matrix y(n, r);
  for (Index j = 0; j < r; ++j) {
    const Index idx = n - 1 - j; // largest first
    y.col(j) = std::sqrt(std::max(eig.eigenvalues()(idx), 0.0)) *
               eig.eigenvectors().col(idx);
  }
  return y;
}

double lyap_residual_dense(const Matrix &y, const Matrix &a, const Matrix &b,
                           const Matrix &c) {
  const Matrix x = y * y.transpose();
  return (a * x * b + b * x * a - c).norm() / c.norm();
}

Matrix psd_block_metric_dense(const Matrix &y, const Matrix &a,
                              const Matrix &b) {
  const Matrix mb = y.transpose() * b * y;
  const Matrix ma = y.transpose() * a * y;
  return kron(mb.transpose(), a) + kron(ma.transpose(), b);
}

Matrix commutation(Index rows, Index cols) {
  Matrix k = Matrix::Zero(rows * cols, rows * cols);
  for (Index j = 0; j < cols; ++j)
    for (Index i = 0; i < rows; ++i)
      k(j + i * cols, i + j * rows) = 1.0;
  return k;
}

namespace {

// vec(L 2Sym(R^T xi)) as a matrix acting on vec(xi), for L, R n x r.
Matrix coupled_sym_dense(const Matrix &l, const Matrix &rgt) {
  const Index r = l.cols();
  const Matrix id = Matrix::Identity(r, r);
  const Matrix sym2 = Matrix::Identity(r * r, r * r) + commutation(r, r);
  return kron(id, l) * sym2 * kron(id, rgt.transpose());
}

} // namespace

Matrix psd_metric_dense(const Matrix &y, const Matrix &a, const Matrix &b,
                        const Matrix &c, double omega) {
  Matrix out = psd_block_metric_dense(y, a, b);
  if (omega != 0.0) {
    const Matrix ay = a * y;
    const Matrix by = b * y;
    const Matrix id = Matrix::Identity(y.cols(), y.cols());
    out += omega * (coupled_sym_dense(ay, by) + coupled_sym_dense(by, ay) -
                    kron(id, c));
  }
  return out;
}

Matrix gh_metric_dense(const Matrix &a, const Matrix &b, const Matrix &c,
                       const Matrix &g, const Matrix &h,
                       const std::array<double, 4> &w) {
  const Index ng = g.size();
  const Index nh = h.size();
  const Matrix ag = a * g;
  const Matrix bh = b * h;
  const Matrix id = Matrix::Identity(g.cols(), g.cols());
  Matrix out = Matrix::Zero(ng + nh, ng + nh);
  out.topLeftCorner(ng, ng) = w[0] * kron((h.transpose() * bh).transpose(), a);
  out.topRightCorner(ng, nh) =
      w[1] * (coupled_sym_dense(ag, bh) + kron(id, c));
  out.bottomRightCorner(nh, nh) =
      w[2] * kron((g.transpose() * ag).transpose(), b);
  out.bottomLeftCorner(nh, ng) =
      w[3] * (coupled_sym_dense(bh, ag) + kron(id, c.transpose()));
  return out;
}

Matrix gh_natural_metric_dense(const Matrix &g, const Matrix &h) {
  const Index ng = g.size();
  const Index nh = h.size();
  Matrix out = Matrix::Zero(ng + nh, ng + nh);
  const Matrix gi = (g.transpose() * g).inverse();
  const Matrix hi = (h.transpose() * h).inverse();
  out.topLeftCorner(ng, ng) =
      kron(gi.transpose(), Matrix::Identity(g.rows(), g.rows()));
  out.bottomRightCorner(nh, nh) =
      kron(hi.transpose(), Matrix::Identity(h.rows(), h.rows()));
  return out;
}

double rel_error(const Matrix &a, const Matrix &b) {
  return (a - b).norm() / std::max(b.norm(), 1e-300);
}

double rel_error(double a, double b) {
  return std::abs(a - b) / std::max(std::abs(b), 1e-300);
}

} // namespace rprecon::oracle
