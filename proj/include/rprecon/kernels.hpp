#pragma once

// Flat double-precision reductions and updates used by every metric
// evaluation, slope test and additive retraction. Each kernel has a portable
// scalar reference and vector variants (AVX2+FMA on x86-64, NEON on AArch64);
// the variant is picked once at first use from the running CPU.
//
// Setting RPRECON_SIMD=scalar in the environment pins the scalar path.

#include <cstddef>
#include <span>
#include <string_view>

#include "rprecon/types.hpp"

namespace rprecon::kernels {

enum class Isa { Scalar, Avx2, Neon };

std::string_view to_string(Isa isa);

/// ISA selected for this process.
Isa active_isa();

/// Whether the given ISA can run on this machine (Scalar always can).
bool isa_available(Isa isa);

double dot(std::span<const double> a, std::span<const double> b);
double sum_squares(std::span<const double> a);
/// y += alpha * x
void axpy(double alpha, std::span<const double> x, std::span<double> y);

// Explicit variants, for equivalence testing and benchmarks.
namespace scalar {
double dot(const double *a, const double *b, std::size_t n);
double sum_squares(const double *a, std::size_t n);
void axpy(double alpha, const double *x, double *y, std::size_t n);
} // namespace scalar

#if defined(__x86_64__) || defined(_M_X64)
namespace avx2 {
double dot(const double *a, const double *b, std::size_t n);
double sum_squares(const double *a, std::size_t n);
void axpy(double alpha, const double *x, double *y, std::size_t n);
} // namespace avx2
#endif

#if defined(__aarch64__)
namespace neon {
double dot(const double *a, const double *b, std::size_t n);
double sum_squares(const double *a, std::size_t n);
void axpy(double alpha, const double *x, double *y, std::size_t n);
} // namespace neon
#endif

/// Frobenius inner product <a, b> = trace(a^T b).
double inner(const Matrix &a, const Matrix &b);
double frobenius_norm(const Matrix &a);
/// a + alpha * b, same shape.
Matrix add_scaled(const Matrix &a, double alpha, const Matrix &b);

} // namespace rprecon::kernels
