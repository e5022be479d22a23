#pragma once

// Dense kernels shared by the geometries: orthonormalization, symmetric
// decompositions, shifted solves and small Sylvester-type solvers.

#include <vector>

#include "rprecon/types.hpp"

namespace rprecon {

/// Default thresholds. Every routine that uses one also accepts an override.
struct Tolerances {
  double rank = 1e-12;      // smallest/largest singular value
  double psd_clamp = 1e-12; // relative negative-eigenvalue clamp in sqrt_psd
  double symmetry = 1e-10;  // relative asymmetry accepted as round-off
  double pivot = 1e-14;     // relative LU pivot for shifted solves
};

inline constexpr Tolerances kDefaultTolerances{};

/// Throws NotSquare / NotSymmetric / DimensionMismatch on failure.
void require_square(const Matrix &m, const char *what);
void require_symmetric(const Matrix &m, const char *what,
                       double rel_tol = kDefaultTolerances.symmetry);
bool all_finite(const Matrix &m);

/// Cholesky factor of an SPD matrix, source = factor * factor^T.
class SpdFactorization {
public:
  explicit SpdFactorization(const Matrix &source);

  Index size() const { return lower_.rows(); }
  const Matrix &lower() const { return lower_; }

  /// source^{-1} * rhs
  Matrix solve(const Matrix &rhs) const;
  /// R * m, where source = R^T R and R = lower^T.
  Matrix apply_upper(const Matrix &m) const;
  /// R^{-1} * m
  Matrix solve_upper(const Matrix &m) const;

private:
  Matrix lower_;
};

/// Q factor of the thin QR of M with the R diagonal made strictly positive.
Matrix qf(const Matrix &m, double rank_tol = kDefaultTolerances.rank);

/// Returns U with U^T B U = I and span(U) = span(M).
Matrix b_orthonormalize(const Matrix &m, const Matrix &b,
                        double rank_tol = kDefaultTolerances.rank);
Matrix b_orthonormalize(const Matrix &m, const SpdFactorization &b,
                        double rank_tol = kDefaultTolerances.rank);

/// (D + D^T) / 2
Matrix sym(const Matrix &d);

/// Symmetric PSD square root with tiny negative eigenvalues clamped to zero.
Matrix sqrt_psd(const Matrix &s, const Tolerances &tol = kDefaultTolerances);

struct GenEig {
  Matrix vectors; // W
  Vector values;  // d, ascending
};

/// W^T Mb W = I and W^T Ma W = diag(d), d > 0 ascending.
GenEig gen_eig_spd(const Matrix &ma, const Matrix &mb);

/// Solves A Z Mb + B Z Ma = F for Z (A, B n x n SPD; Mb, Ma r x r SPD).
Matrix sylvester_pair_solve(const Matrix &a, const Matrix &b, const Matrix &mb,
                            const Matrix &ma, const Matrix &f);

/// Symmetric S with P S + S P = Q (P SPD, Q symmetric).
Matrix small_lyap_solve(const Matrix &p, const Matrix &q);

/// LU factorization of (alpha * A - sigma * B) with partial pivoting. Works
/// for indefinite shifts; singular shifts are reported, not masked.
class ShiftedFactorization {
public:
  ShiftedFactorization(const Matrix &a, const Matrix &b, double sigma,
                       double alpha = 1.0,
                       const Tolerances &tol = kDefaultTolerances);

  Matrix solve(const Matrix &rhs) const;
  double sigma() const { return sigma_; }

private:
  Eigen::PartialPivLU<Matrix> lu_;
  double sigma_;
};

/// (A - sigma B)^{-1} rhs
Matrix shifted_solve(const Matrix &a, const Matrix &b, double sigma,
                     const Matrix &rhs,
                     const Tolerances &tol = kDefaultTolerances);

/// Smallest singular value over largest; 0 for an all-zero matrix.
double inverse_condition(const Matrix &m);

/// Singular values of the thin SVD, descending.
Vector singular_values(const Matrix &m);

/// Full-column-rank check used by factor geometries and retractions.
bool has_full_column_rank(const Matrix &m,
                          double rank_tol = kDefaultTolerances.rank);

/// Basis of the symmetric r x r matrices: e_k e_k^T on the diagonal and
/// e_k e_l^T + e_l e_k^T for k < l. Ordered by column l, then row k <= l.
std::vector<Matrix> symmetric_basis(Index r);

} // namespace rprecon
