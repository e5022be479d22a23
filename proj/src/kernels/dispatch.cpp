#include "rprecon/kernels.hpp"

#include <cmath>
#include <cstdlib>
#include <string>

#include "rprecon/error.hpp"

namespace rprecon::kernels {

namespace {

struct Table {
  Isa isa;
  double (*dot)(const double *, const double *, std::size_t);
  double (*sum_squares)(const double *, std::size_t);
  void (*axpy)(double, const double *, double *, std::size_t);
};

Table make_table(Isa isa) {
  switch (isa) {
#if defined(__x86_64__) || defined(_M_X64)
  case Isa::Avx2:
    return {Isa::Avx2, &avx2::dot, &avx2::sum_squares, &avx2::axpy};
#endif
#if defined(__aarch64__)
  case Isa::Neon:
    return {Isa::Neon, &neon::dot, &neon::sum_squares, &neon::axpy};
#endif
  default:
    return {Isa::Scalar, &scalar::dot, &scalar::sum_squares, &scalar::axpy};
  }
}

Isa detect() {
  if (const char *env = std::getenv("RPRECON_SIMD")) {
    const std::string want(env);
    if (want == "scalar")
      return Isa::Scalar;
  }
  if (isa_available(Isa::Avx2))
    return Isa::Avx2;
  if (isa_available(Isa::Neon))
    return Isa::Neon;
  return Isa::Scalar;
}

const Table &table() {
  static const Table t = make_table(detect());
  return t;
}

void check_same_size(std::size_t a, std::size_t b) {
  if (a != b)
    fail(ErrorCode::DimensionMismatch, "kernel operands differ in length");
}

} // namespace

std::string_view to_string(Isa isa) {
  switch (isa) {
  case Isa::Scalar:
    return "scalar";
  case Isa::Avx2:
    return "avx2";
  case Isa::Neon:
    return "neon";
  }
  return "unknown";
}

bool isa_available(Isa isa) {
  switch (isa) {
  case Isa::Scalar:
    return true;
  case Isa::Avx2:
#if (defined(__x86_64__) || defined(_M_X64)) && defined(__GNUC__)
    return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
    return false;
#endif
  case Isa::Neon:
#if defined(__aarch64__)
    return true;
#else
    return false;
#endif
  }
  return false;
}

Isa active_isa() { return table().isa; }

double dot(std::span<const double> a, std::span<const double> b) {
  check_same_size(a.size(), b.size());
  return table().dot(a.data(), b.data(), a.size());
}

double sum_squares(std::span<const double> a) {
  return table().sum_squares(a.data(), a.size());
}

void axpy(double alpha, std::span<const double> x, std::span<double> y) {
  check_same_size(x.size(), y.size());
  table().axpy(alpha, x.data(), y.data(), x.size());
}

double inner(const Matrix &a, const Matrix &b) {
  if (a.rows() != b.rows() || a.cols() != b.cols())
    fail(ErrorCode::DimensionMismatch, "inner: shapes differ");
  return table().dot(a.data(), b.data(), static_cast<std::size_t>(a.size()));
}

double frobenius_norm(const Matrix &a) {
  return std::sqrt(
      table().sum_squares(a.data(), static_cast<std::size_t>(a.size())));
}

Matrix add_scaled(const Matrix &a, double alpha, const Matrix &b) {
  if (a.rows() != b.rows() || a.cols() != b.cols())
    fail(ErrorCode::DimensionMismatch, "add_scaled: shapes differ");
  Matrix out = a;
  table().axpy(alpha, b.data(), out.data(), static_cast<std::size_t>(a.size()));
  return out;
}

} // namespace rprecon::kernels
