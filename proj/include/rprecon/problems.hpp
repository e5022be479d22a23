#pragma once

// Problem builders, classical eigen-iterations and error measures for the
// generalized eigenvalue and low-rank Lyapunov experiments.

#include <optional>

#include "rprecon/numerics.hpp"
#include "rprecon/types.hpp"

namespace rprecon {

/// min trace(X^T A X) / 2 subject to X^T B X = I.
struct EigProblem {
  Matrix a;
  Matrix b;
  Index r = 1;
  std::optional<Matrix> known_solution; // B-orthonormal minimizer, n x r

  void validate() const;
};

/// Low-rank solution of A X B + B X A = C.
struct LyapProblem {
  Matrix a;
  Matrix b;
  Matrix c;
  Index r = 1;
  /// C = c_factor * diag(c_signs) * c_factor^T
  Matrix c_factor;
  Vector c_signs;

  void validate() const;
};

/// A = diag(10 + (i-1)/(n-1)), B = I, solution = first r columns of I.
EigProblem manton_eig(Index n, Index r);

/// A = tridiag(-1, 2, -1), B = I, C = e_n e_n^T.
LyapProblem penzl_lyap(Index n, Index r);

/// Builds a Lyapunov problem from dense matrices, factoring C by its
/// eigendecomposition (eigenvalues below 1e-12 ||C|| are dropped).
LyapProblem make_lyap_problem(Matrix a, Matrix b, Matrix c, Index r);

/// qf(A X)
Matrix power_step(const Matrix &x, const Matrix &a);

/// qf(A^{-1} X) with A factorized once.
class InverseIteration {
public:
  explicit InverseIteration(const Matrix &a);
  Matrix step(const Matrix &x) const;

private:
  Eigen::PartialPivLU<Matrix> lu_;
};

Matrix inverse_step(const Matrix &x, const Matrix &a);

/// Solves A Z - Z (X^T A X) = X column-decoupled; returns Z.
Matrix grqi_solve(const Matrix &x, const Matrix &a);
/// qf of the solution above. Throws SingularShift at invariant subspaces.
Matrix grqi_step(const Matrix &x, const Matrix &a);

/// Principal angles between span(X) and span(Y), ascending.
Vector canonical_angles(const Matrix &x, const Matrix &y);

/// sqrt of the sum of squared canonical angles.
double subspace_distance(const Matrix &x, const Matrix &y);

/// ||A X B + B X A - C||_F / ||C||_F for X = Y Y^T, assembled through a
/// thin QR of the low-rank residual factors.
double lyap_residual(const Matrix &y, const LyapProblem &prob);

} // namespace rprecon
