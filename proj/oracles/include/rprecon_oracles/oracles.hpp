#pragma once

// Brute-force reference computations for tests and the self-test command.
// Everything here is dense and Kronecker-sized, independent of the library
// routines it checks, and meant only for n of a few dozen.

#include <array>
#include <functional>

#include "rprecon/rng.hpp"
#include "rprecon/types.hpp"

namespace rprecon::oracle {

Matrix kron(const Matrix &a, const Matrix &b);
Vector vec(const Matrix &m);
Matrix unvec(const Vector &v, Index rows, Index cols);

/// Test-instance generators drawing from the given source.
Matrix random_spd(Index n, NormalSource &normal, double shift = 1.0);
Matrix random_symmetric(Index n, NormalSource &normal);
Matrix random_orthogonal(Index r, NormalSource &normal);
/// Random r x r matrix with singular values in [1/2, 2].
Matrix random_invertible(Index r, NormalSource &normal);

/// Z with A Z Mb + B Z Ma = F through the Kronecker system.
Matrix kron_sylvester_pair(const Matrix &a, const Matrix &b, const Matrix &mb,
                           const Matrix &ma, const Matrix &f);
/// Z with A Z - Z S = X through the Kronecker system.
Matrix kron_sylvester(const Matrix &a, const Matrix &s, const Matrix &x);

/// Modified Gram-Schmidt in the B inner product.
Matrix mgs_b_orthonormalize(const Matrix &m, const Matrix &b);
/// Oblique projector X (X^T B X)^{-1} X^T B onto span(X).
Matrix b_projector(const Matrix &x, const Matrix &b);

/// Least-squares multiplier: argmin ||B X L - A X||_F, symmetrized.
Matrix lambda_least_squares(const Matrix &x, const Matrix &a, const Matrix &b);
/// Principal square root of a symmetric PSD matrix by eigendecomposition.
Matrix sqrtm_psd(const Matrix &s);

struct KktSolution {
  Matrix zeta;
  Matrix mu;
};

/// Monolithic saddle-point solve of
///   K vec(zeta) - sum_k m_k vec(B X E_k) = rhs,  <B X E_k, zeta> = 0
/// over the symmetric basis E_k; mu = sum_k m_k E_k.
KktSolution kkt_monolithic(const Matrix &k, const Matrix &bx, const Matrix &rhs);

/// Search direction of the metric a_weight <xi, A eta> + <xi, B eta Shift>.
KktSolution search_direction_oracle(const Matrix &a, const Matrix &b,
                                    const Matrix &x, double a_weight,
                                    const Matrix &shift);
/// Orthogonal projection of V onto {zeta : Sym(X^T B zeta) = 0}.
Matrix euclidean_project_oracle(const Matrix &x, const Matrix &b,
                                const Matrix &v);

/// Dense solution of A X B + B X A = C by the generalized eigenbasis of
/// (A, B).
Matrix dense_lyap(const Matrix &a, const Matrix &b, const Matrix &c);
/// Same through the n^2 x n^2 Kronecker system.
Matrix dense_lyap_kron(const Matrix &a, const Matrix &b, const Matrix &c);
/// Y with Y Y^T the best rank-r PSD approximation of symmetric X.
Matrix best_psd_factor(const Matrix &x, Index r);
double lyap_residual_dense(const Matrix &y, const Matrix &a, const Matrix &b,
                           const Matrix &c);

/// Dense matrix of the PSD block metric (omega = 0) acting on vec(xi).
Matrix psd_block_metric_dense(const Matrix &y, const Matrix &a,
                              const Matrix &b);

/// Commutation matrix K with K vec(W) = vec(W^T) for W rows x cols.
Matrix commutation(Index rows, Index cols);

/// Dense matrix of the PSD metric with coupling weight omega acting on
/// vec(xi), coupling term taken with -C.
Matrix psd_metric_dense(const Matrix &y, const Matrix &a, const Matrix &b,
                        const Matrix &c, double omega);

/// Dense matrix of the two-factor weighted metric acting on
/// [vec(xi_G); vec(xi_H)].
Matrix gh_metric_dense(const Matrix &a, const Matrix &b, const Matrix &c,
                       const Matrix &g, const Matrix &h,
                       const std::array<double, 4> &w);
/// Same for the natural metric (xi_G (G^T G)^{-1}, xi_H (H^T H)^{-1}).
Matrix gh_natural_metric_dense(const Matrix &g, const Matrix &h);

/// (f(x + h d) - f(x - h d)) / (2h)
template <class Point>
double central_difference(const std::function<double(const Point &)> &f,
                          const Point &x, const Point &d, double h,
                          const std::function<Point(const Point &, double,
                                                    const Point &)> &axpy) {
  return (f(axpy(x, h, d)) - f(axpy(x, -h, d))) / (2.0 * h);
}

inline double central_difference(const std::function<double(const Matrix &)> &f,
                                 const Matrix &x, const Matrix &d, double h) {
  return (f(x + h * d) - f(x - h * d)) / (2.0 * h);
}

/// ||a - b||_F / max(||b||_F, tiny)
double rel_error(const Matrix &a, const Matrix &b);
double rel_error(double a, double b);

} // namespace rprecon::oracle
