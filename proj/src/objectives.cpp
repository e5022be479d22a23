#include "rprecon/objectives.hpp"

#include <cmath>
#include <limits>

#include "rprecon/kernels.hpp"
#include "rprecon/rng.hpp"

namespace rprecon {

StiefelObjective::StiefelObjective(const GeneralizedStiefel &manifold,
                                   StiefelMetricSpec spec,
                                   std::optional<Matrix> reference)
    : manifold_(&manifold), spec_(spec), reference_(std::move(reference)) {
  spec_.validate();
  if (reference_ && (reference_->rows() != manifold.n() ||
                     reference_->cols() != manifold.r()))
    fail(ErrorCode::DimensionMismatch, "reference must be n x r");
}

StiefelMetricSpec StiefelObjective::spec_for(double omega) const {
  if (spec_.family == StiefelMetricFamily::Euclidean)
    return spec_;
  return spec_.with_live_omega(omega);
}

Direction<StiefelTangent> StiefelObjective::direction(const StiefelPoint &x,
                                                      double omega) const {
  const Matrix lambda = manifold_->lambda_ls(x);
  auto sd = manifold_->search_direction(x, spec_for(omega), lambda);
  // <A X, zeta> equals <A X - B X lambda, zeta> on tangents; the residual
  // form keeps the sign reliable once zeta is at round-off scale.
  const Matrix residual =
      manifold_->euclidean_gradient(x) - manifold_->bx(x) * lambda;
  const double slope = kernels::inner(residual, sd.zeta.xi);
  return {std::move(sd.zeta), slope};
}

double StiefelObjective::error_measure(const StiefelPoint &x) const {
  if (!reference_)
    return std::numeric_limits<double>::quiet_NaN();
  return subspace_distance(x.x(), *reference_);
}

StiefelPoint StiefelObjective::initial_point(std::uint64_t master_seed) const {
  return manifold_->random_point(stream_seed(master_seed, Stream::Initialization));
}

PsdObjective::PsdObjective(const PsdGeometry &geometry,
                           PsdMetricSpec::Family family,
                           const LyapProblem *prob, CgOptions cg)
    : geometry_(&geometry), family_(family), prob_(prob), cg_(cg) {}

Direction<Matrix> PsdObjective::direction(const Matrix &y, double omega) const {
  const Matrix egrad = geometry_->euclidean_gradient(y);
  Matrix grad;
  if (family_ == PsdMetricSpec::Family::Euclidean)
    grad = egrad;
  else if (omega == 0.0)
    grad = geometry_->gradient_block(y, egrad);
  else
    grad = geometry_->gradient_full(y, PsdMetricSpec::preconditioned(omega),
                                    egrad, cg_);
  grad *= -1.0;
  const double slope = kernels::inner(egrad, grad);
  return {std::move(grad), slope};
}

double PsdObjective::error_measure(const Matrix &y) const {
  if (!prob_)
    return std::numeric_limits<double>::quiet_NaN();
  return lyap_residual(y, *prob_);
}

Matrix PsdObjective::initial_point(std::uint64_t master_seed, Index r) const {
  NormalSource normal(stream_seed(master_seed, Stream::Initialization));
  Matrix y = normal.matrix(geometry_->n(), r);
  y /= std::sqrt(static_cast<double>(geometry_->n()));
  // f(tY) = t^4 q - t^2 c; start at the minimizer along the ray when c > 0.
  const Matrix yty_a = y.transpose() * geometry_->a() * y;
  const Matrix yty_b = y.transpose() * geometry_->b() * y;
  const double q = kernels::inner(yty_a, yty_b);
  const double c = (y.transpose() * geometry_->c() * y).trace();
  if (c > 0.0 && q > 0.0)
    y *= std::sqrt(c / (2.0 * q));
  return geometry_->make_point(std::move(y));
}

GhObjective::GhObjective(const GhGeometry &geometry, RankMetricSpec spec,
                         std::function<double(const FactorPair &)> error,
                         CgOptions cg)
    : geometry_(&geometry), spec_(spec), error_(std::move(error)), cg_(cg) {
  spec_.validate();
}

Direction<GhTangent> GhObjective::direction(const FactorPair &p,
                                            double omega) const {
  RankMetricSpec spec = spec_;
  if (spec.family == RankMetricSpec::Family::BlockDiagonal)
    spec.omega = omega;
  const GhTangent egrad = geometry_->euclidean_gradient(p);
  GhTangent grad;
  switch (spec.family) {
  case RankMetricSpec::Family::EuclideanNatural:
    grad = geometry_->gradient_natural(p, egrad);
    break;
  case RankMetricSpec::Family::BlockDiagonal:
    grad = spec.omega == 0.0 ? geometry_->gradient_block(p, egrad)
                             : geometry_->gradient_full(p, spec, egrad, cg_);
    break;
  case RankMetricSpec::Family::FullHessian:
    grad = geometry_->gradient_full(p, spec, egrad, cg_);
    break;
  }
  grad.g *= -1.0;
  grad.h *= -1.0;
  const double slope = inner(egrad, grad);
  return {std::move(grad), slope};
}

double GhObjective::error_measure(const FactorPair &p) const {
  if (!error_)
    return std::numeric_limits<double>::quiet_NaN();
  return error_(p);
}

FactorPair GhObjective::initial_point(std::uint64_t master_seed,
                                      Index r) const {
  NormalSource normal(stream_seed(master_seed, Stream::Initialization));
  Matrix g = normal.matrix(geometry_->n(), r);
  Matrix h = normal.matrix(geometry_->m(), r);
  g /= std::sqrt(static_cast<double>(geometry_->n()));
  h /= std::sqrt(static_cast<double>(geometry_->m()));
  return geometry_->make_point(std::move(g), std::move(h));
}

} // namespace rprecon
