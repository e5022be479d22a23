#include "rprecon/kernels.hpp"

namespace rprecon::kernels::scalar {

double dot(const double *a, const double *b, std::size_t n) {
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i)
    acc += a[i] * b[i];
  return acc;
}

double sum_squares(const double *a, std::size_t n) {
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i)
    acc += a[i] * a[i];
  return acc;
}

void axpy(double alpha, const double *x, double *y, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i)
    y[i] += alpha * x[i];
}

} // namespace rprecon::kernels::scalar
