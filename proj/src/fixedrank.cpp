#include "rprecon/fixedrank.hpp"

#include <cmath>
#include <string>
#include <vector>

#include "rprecon/error.hpp"
#include "rprecon/kernels.hpp"

namespace rprecon {

double inner(const FactorPair &a, const FactorPair &b) {
  return kernels::inner(a.g, b.g) + kernels::inner(a.h, b.h);
}

namespace {

double dot_of(const Matrix &a, const Matrix &b) { return kernels::inner(a, b); }
double dot_of(const FactorPair &a, const FactorPair &b) { return inner(a, b); }

void axpy_into(double alpha, const Matrix &x, Matrix &y) {
  kernels::axpy(alpha, {x.data(), static_cast<std::size_t>(x.size())},
                {y.data(), static_cast<std::size_t>(y.size())});
}
void axpy_into(double alpha, const FactorPair &x, FactorPair &y) {
  axpy_into(alpha, x.g, y.g);
  axpy_into(alpha, x.h, y.h);
}

Matrix zeros_like(const Matrix &m) { return Matrix::Zero(m.rows(), m.cols()); }
FactorPair zeros_like(const FactorPair &p) {
  return {zeros_like(p.g), zeros_like(p.h)};
}

// Preconditioned CG for a self-adjoint operator that should be positive
// definite; non-positive curvature is reported as IndefiniteMetric.
template <class V, class Op, class Prec>
V conjugate_gradient(const Op &apply, const Prec &precondition, const V &rhs,
                     const CgOptions &opts) {
  V x = zeros_like(rhs);
  V res = rhs;
  const double rhs_norm = std::sqrt(dot_of(rhs, rhs));
  if (rhs_norm == 0.0)
    return x;
  V z = precondition(res);
  V dir = z;
  double rz = dot_of(res, z);
  for (int it = 0; it < opts.max_iters; ++it) {
    const V adir = apply(dir);
    const double curvature = dot_of(dir, adir);
    if (!(curvature > 0.0))
      fail(ErrorCode::IndefiniteMetric,
           "metric operator has non-positive curvature");
    const double alpha = rz / curvature;
    axpy_into(alpha, dir, x);
    axpy_into(-alpha, adir, res);
    if (std::sqrt(dot_of(res, res)) <= opts.tol * rhs_norm)
      break;
    z = precondition(res);
    const double rz_next = dot_of(res, z);
    const double beta = rz_next / rz;
    rz = rz_next;
    V next = z;
    axpy_into(beta, dir, next);
    dir = std::move(next);
  }
  return x;
}

void check_weight(double w, const char *name) {
  if (!(w >= 0.0 && w <= 1.0))
    fail(ErrorCode::InvalidArgument, std::string(name) + " must lie in [0, 1]");
}

// Solves A Z (Y^T B Y) + B Z (Y^T A Y) = F for many right-hand sides.
// With Y = Q R the Gram matrices are R^T (Q^T B Q) R and R^T (Q^T A Q) R, so
// solving for Z R^T keeps the small pencil well conditioned when Y is close
// to losing rank.
class PsdBlockSolver {
public:
  PsdBlockSolver(const Matrix &a, const Matrix &b, const Matrix &y) {
    const Index r = y.cols();
    Eigen::HouseholderQR<Matrix> qr(y);
    const Matrix q = qr.householderQ() * Matrix::Identity(y.rows(), r);
    rf_ = qr.matrixQR().topRows(r).triangularView<Eigen::Upper>();
    const GenEig ge = gen_eig_spd(sym(q.transpose() * a * q),
                                  sym(q.transpose() * b * q));
    vectors_ = ge.vectors;
    factors_.reserve(static_cast<std::size_t>(r));
    for (Index i = 0; i < r; ++i) {
      factors_.emplace_back(a + ge.values(i) * b);
      if (factors_.back().info() != Eigen::Success)
        fail(ErrorCode::NotSpd, "A + d B is not positive definite");
    }
  }

  Matrix solve(const Matrix &f) const {
    // F R^{-1} in the generalized eigenbasis, one SPD solve per column.
    const Matrix rhs =
        rf_.transpose().triangularView<Eigen::Lower>().solve(f.transpose())
            .transpose() *
        vectors_;
    Matrix w(f.rows(), f.cols());
    for (Index i = 0; i < f.cols(); ++i)
      w.col(i) = factors_[static_cast<std::size_t>(i)].solve(rhs.col(i));
    w = w * vectors_.transpose();
    if (!w.allFinite())
      fail(ErrorCode::SolveFailed, "block metric solve produced non-finite");
    // Z = W R^{-T}
    return rf_.triangularView<Eigen::Upper>().solve(w.transpose()).transpose();
  }

private:
  Matrix rf_;
  Matrix vectors_;
  std::vector<Eigen::LLT<Matrix>> factors_;
};

Matrix spd_inverse_right(const Matrix &m, const Matrix &gram) {
  // m * gram^{-1} for SPD gram
  Eigen::LLT<Matrix> llt(gram);
  if (llt.info() != Eigen::Success)
    fail(ErrorCode::SolveFailed, "Gram matrix is not positive definite");
  return llt.solve(m.transpose()).transpose();
}

} // namespace

// ---------------------------------------------------------------------------
// RankMetricSpec

RankMetricSpec RankMetricSpec::euclidean_natural() { return {}; }

RankMetricSpec RankMetricSpec::block_diagonal(double omega) {
  RankMetricSpec s;
  s.family = Family::BlockDiagonal;
  s.omega = omega;
  s.validate();
  return s;
}

RankMetricSpec RankMetricSpec::full_hessian(double w1, double w2, double w3,
                                            double w4) {
  RankMetricSpec s;
  s.family = Family::FullHessian;
  s.weights = {w1, w2, w3, w4};
  s.validate();
  return s;
}

std::array<double, 4> RankMetricSpec::effective_weights() const {
  if (family == Family::BlockDiagonal)
    return {1.0, omega, 1.0, omega};
  return weights;
}

void RankMetricSpec::validate() const {
  if (!(omega >= 0.0 && omega < 1.0))
    fail(ErrorCode::InvalidArgument, "omega must lie in [0, 1)");
  check_weight(weights[0], "w1");
  check_weight(weights[1], "w2");
  check_weight(weights[2], "w3");
  check_weight(weights[3], "w4");
  if (family == Family::FullHessian && weights[1] != weights[3])
    fail(ErrorCode::InvalidArgument,
         "full_hessian needs w2 == w4 for a symmetric form");
}

// ---------------------------------------------------------------------------
// GhGeometry

GhGeometry::GhGeometry(Matrix a, Matrix b, Matrix c)
    : a_(std::move(a)), b_(std::move(b)), c_(std::move(c)), a_factor_(a_),
      b_factor_(b_) {
  if (c_.rows() != a_.rows() || c_.cols() != b_.rows())
    fail(ErrorCode::DimensionMismatch, "C must be n x m");
}

void GhGeometry::check_point(const FactorPair &p) const {
  if (p.g.rows() != n() || p.h.rows() != m() || p.g.cols() != p.h.cols())
    fail(ErrorCode::DimensionMismatch, "factor pair shapes do not conform");
}

void GhGeometry::check_tangent(const FactorPair &p, const GhTangent &xi) const {
  if (xi.g.rows() != p.g.rows() || xi.g.cols() != p.g.cols() ||
      xi.h.rows() != p.h.rows() || xi.h.cols() != p.h.cols())
    fail(ErrorCode::DimensionMismatch, "tangent shapes do not conform");
}

FactorPair GhGeometry::make_point(Matrix g, Matrix h) const {
  FactorPair p{std::move(g), std::move(h)};
  check_point(p);
  if (!has_full_column_rank(p.g) || !has_full_column_rank(p.h))
    fail(ErrorCode::RankDeficient, "factors must have full column rank");
  return p;
}

double GhGeometry::cost(const FactorPair &p) const {
  check_point(p);
  const Matrix ma = p.g.transpose() * a_ * p.g;
  const Matrix mb = p.h.transpose() * b_ * p.h;
  return 0.5 * kernels::inner(ma, mb) +
         kernels::inner(p.g, c_ * p.h);
}

GhTangent GhGeometry::euclidean_gradient(const FactorPair &p) const {
  check_point(p);
  const Matrix ag = a_ * p.g;
  const Matrix bh = b_ * p.h;
  const Matrix ma = p.g.transpose() * ag;
  const Matrix mb = p.h.transpose() * bh;
  return {ag * mb + c_ * p.h, bh * ma + c_.transpose() * p.g};
}

GhTangent GhGeometry::gradient_block(const FactorPair &p) const {
  return gradient_block(p, euclidean_gradient(p));
}

GhTangent GhGeometry::gradient_block(const FactorPair &p,
                                     const GhTangent &egrad) const {
  const Matrix ma = p.g.transpose() * a_ * p.g;
  const Matrix mb = p.h.transpose() * b_ * p.h;
  return {spd_inverse_right(a_factor_.solve(egrad.g), mb),
          spd_inverse_right(b_factor_.solve(egrad.h), ma)};
}

GhTangent GhGeometry::gradient_natural(const FactorPair &p,
                                       const GhTangent &egrad) const {
  return {egrad.g * (p.g.transpose() * p.g), egrad.h * (p.h.transpose() * p.h)};
}

GhTangent GhGeometry::metric_apply(const RankMetricSpec &spec,
                                   const FactorPair &p,
                                   const GhTangent &xi) const {
  spec.validate();
  check_point(p);
  check_tangent(p, xi);
  if (spec.family == RankMetricSpec::Family::EuclideanNatural) {
    return {spd_inverse_right(xi.g, p.g.transpose() * p.g),
            spd_inverse_right(xi.h, p.h.transpose() * p.h)};
  }
  const auto w = spec.effective_weights();
  const Matrix ag = a_ * p.g;
  const Matrix bh = b_ * p.h;
  const Matrix ma = p.g.transpose() * ag;
  const Matrix mb = p.h.transpose() * bh;
  GhTangent out{Matrix::Zero(n(), p.g.cols()), Matrix::Zero(m(), p.h.cols())};
  if (w[0] != 0.0)
    out.g += w[0] * (a_ * xi.g * mb);
  if (w[1] != 0.0)
    out.g += w[1] * (2.0 * ag * sym(bh.transpose() * xi.h) + c_ * xi.h);
  if (w[2] != 0.0)
    out.h += w[2] * (b_ * xi.h * ma);
  if (w[3] != 0.0)
    out.h += w[3] * (2.0 * bh * sym(ag.transpose() * xi.g) +
                     c_.transpose() * xi.g);
  return out;
}

double GhGeometry::metric_eval(const RankMetricSpec &spec, const FactorPair &p,
                               const GhTangent &xi,
                               const GhTangent &eta) const {
  check_tangent(p, eta);
  return inner(eta, metric_apply(spec, p, xi));
}

GhTangent GhGeometry::gradient_full(const FactorPair &p,
                                    const RankMetricSpec &spec,
                                    const CgOptions &cg) const {
  return gradient_full(p, spec, euclidean_gradient(p), cg);
}

GhTangent GhGeometry::gradient_full(const FactorPair &p,
                                    const RankMetricSpec &spec,
                                    const GhTangent &egrad,
                                    const CgOptions &cg) const {
  spec.validate();
  const auto w = spec.effective_weights();
  auto apply = [&](const GhTangent &v) { return metric_apply(spec, p, v); };
  if (w[0] > 0.0 && w[2] > 0.0) {
    const Matrix ma = p.g.transpose() * a_ * p.g;
    const Matrix mb = p.h.transpose() * b_ * p.h;
    auto precondition = [&](const GhTangent &v) -> GhTangent {
      return {spd_inverse_right(a_factor_.solve(v.g), mb) / w[0],
              spd_inverse_right(b_factor_.solve(v.h), ma) / w[2]};
    };
    return conjugate_gradient(apply, precondition, egrad, cg);
  }
  auto identity = [](const GhTangent &v) { return v; };
  return conjugate_gradient(apply, identity, egrad, cg);
}

GhTangent GhGeometry::gradient(const FactorPair &p, const RankMetricSpec &spec,
                               const CgOptions &cg) const {
  spec.validate();
  const GhTangent egrad = euclidean_gradient(p);
  switch (spec.family) {
  case RankMetricSpec::Family::EuclideanNatural:
    return gradient_natural(p, egrad);
  case RankMetricSpec::Family::BlockDiagonal:
    if (spec.omega == 0.0)
      return gradient_block(p, egrad);
    return gradient_full(p, spec, egrad, cg);
  case RankMetricSpec::Family::FullHessian:
    return gradient_full(p, spec, egrad, cg);
  }
  fail(ErrorCode::InvalidArgument, "unknown metric family");
}

FactorPair GhGeometry::retract(const FactorPair &p, const GhTangent &xi,
                               double step) const {
  check_tangent(p, xi);
  FactorPair out{kernels::add_scaled(p.g, step, xi.g),
                 kernels::add_scaled(p.h, step, xi.h)};
  if (!has_full_column_rank(out.g) || !has_full_column_rank(out.h))
    fail(ErrorCode::RankDeficient, "retraction lost column rank");
  return out;
}

// ---------------------------------------------------------------------------
// PsdMetricSpec / PsdGeometry

PsdMetricSpec PsdMetricSpec::euclidean() { return {}; }

PsdMetricSpec PsdMetricSpec::preconditioned(double omega) {
  PsdMetricSpec s{Family::Preconditioned, omega};
  s.validate();
  return s;
}

void PsdMetricSpec::validate() const {
  if (!(omega >= 0.0 && omega < 1.0))
    fail(ErrorCode::InvalidArgument, "omega must lie in [0, 1)");
}

PsdGeometry::PsdGeometry(Matrix a, Matrix b, Matrix c)
    : a_(std::move(a)), b_(std::move(b)), c_(std::move(c)) {
  // Validates SPD-ness up front; the factors themselves are not kept.
  SpdFactorization check_a(a_);
  SpdFactorization check_b(b_);
  if (b_.rows() != a_.rows())
    fail(ErrorCode::DimensionMismatch, "A and B differ in size");
  if (c_.rows() != a_.rows())
    fail(ErrorCode::DimensionMismatch, "C must be n x n");
  require_symmetric(c_, "C");
}

void PsdGeometry::check_shape(const Matrix &y, const char *what) const {
  if (y.rows() != n() || y.cols() < 1)
    fail(ErrorCode::DimensionMismatch, std::string(what) + " must be n x r");
}

Matrix PsdGeometry::make_point(Matrix y) const {
  check_shape(y, "Y");
  if (!has_full_column_rank(y))
    fail(ErrorCode::RankDeficient, "Y must have full column rank");
  return y;
}

double PsdGeometry::cost(const Matrix &y) const {
  check_shape(y, "Y");
  const Matrix ay = a_ * y;
  const Matrix by = b_ * y;
  const Matrix ma = y.transpose() * ay;
  const Matrix mb = y.transpose() * by;
  return kernels::inner(ma, mb) - kernels::inner(y, c_ * y);
}

Matrix PsdGeometry::euclidean_gradient(const Matrix &y) const {
  check_shape(y, "Y");
  const Matrix ay = a_ * y;
  const Matrix by = b_ * y;
  const Matrix ma = y.transpose() * ay;
  const Matrix mb = y.transpose() * by;
  return 2.0 * (ay * mb + by * ma - c_ * y);
}

Matrix PsdGeometry::gradient_block(const Matrix &y) const {
  return gradient_block(y, euclidean_gradient(y));
}

Matrix PsdGeometry::gradient_block(const Matrix &y, const Matrix &egrad) const {
  check_shape(y, "Y");
  return PsdBlockSolver(a_, b_, y).solve(egrad);
}

Matrix PsdGeometry::metric_apply(const PsdMetricSpec &spec, const Matrix &y,
                                 const Matrix &xi) const {
  spec.validate();
  check_shape(y, "Y");
  if (xi.rows() != y.rows() || xi.cols() != y.cols())
    fail(ErrorCode::DimensionMismatch, "tangent must match Y");
  if (spec.family == PsdMetricSpec::Family::Euclidean)
    return xi;
  const Matrix ay = a_ * y;
  const Matrix by = b_ * y;
  Matrix out = a_ * xi * (y.transpose() * by) + b_ * xi * (y.transpose() * ay);
  if (spec.omega != 0.0)
    out += spec.omega * (2.0 * ay * sym(by.transpose() * xi) +
                         2.0 * by * sym(ay.transpose() * xi) - c_ * xi);
  return out;
}

double PsdGeometry::metric_eval(const PsdMetricSpec &spec, const Matrix &y,
                                const Matrix &xi, const Matrix &eta) const {
  if (eta.rows() != y.rows() || eta.cols() != y.cols())
    fail(ErrorCode::DimensionMismatch, "tangent must match Y");
  return kernels::inner(eta, metric_apply(spec, y, xi));
}

Matrix PsdGeometry::gradient_full(const Matrix &y, const PsdMetricSpec &spec,
                                  const Matrix &egrad,
                                  const CgOptions &cg) const {
  auto apply = [&](const Matrix &v) { return metric_apply(spec, y, v); };
  const PsdBlockSolver block(a_, b_, y);
  auto precondition = [&](const Matrix &v) { return block.solve(v); };
  return conjugate_gradient(apply, precondition, egrad, cg);
}

Matrix PsdGeometry::gradient(const Matrix &y, const PsdMetricSpec &spec,
                             const CgOptions &cg) const {
  spec.validate();
  const Matrix egrad = euclidean_gradient(y);
  if (spec.family == PsdMetricSpec::Family::Euclidean)
    return egrad;
  if (spec.omega == 0.0)
    return gradient_block(y, egrad);
  return gradient_full(y, spec, egrad, cg);
}

Matrix PsdGeometry::retract(const Matrix &y, const Matrix &xi,
                            double step) const {
  check_shape(y, "Y");
  if (xi.rows() != y.rows() || xi.cols() != y.cols())
    fail(ErrorCode::DimensionMismatch, "tangent must match Y");
  Matrix out = kernels::add_scaled(y, step, xi);
  if (!has_full_column_rank(out))
    fail(ErrorCode::RankDeficient, "retraction lost column rank");
  return out;
}

} // namespace rprecon
