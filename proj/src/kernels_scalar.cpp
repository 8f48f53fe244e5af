#include "fracdiff/kernels.hpp"

#include <cmath>

namespace fracdiff::kernels::scalar {

// The reduction mirrors the 8-lane layout of the vector variants (two 4-wide
// fused multiply-add accumulators, fixed pairwise horizontal sum, sequential
// tail) so every backend produces bit-identical results.
double dot(const double* a, const double* b, std::size_t n) noexcept {
  double acc[8] = {0, 0, 0, 0, 0, 0, 0, 0};
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    for (int k = 0; k < 8; ++k) acc[k] = std::fma(a[i + k], b[i + k], acc[k]);
  }
  const double s0 = acc[0] + acc[4];
  const double s1 = acc[1] + acc[5];
  const double s2 = acc[2] + acc[6];
  const double s3 = acc[3] + acc[7];
  double r = (s0 + s2) + (s1 + s3);
  for (; i < n; ++i) r = std::fma(a[i], b[i], r);
  return r;
}

void axpy(double alpha, const double* x, double* y, std::size_t n) noexcept {
  for (std::size_t i = 0; i < n; ++i) y[i] = std::fma(alpha, x[i], y[i]);
}

void combine(double a, const double* x1, double b, const double* x2, double* y,
             std::size_t n) noexcept {
  for (std::size_t i = 0; i < n; ++i) y[i] = std::fma(a, x1[i], b * x2[i]);
}

}  // namespace fracdiff::kernels::scalar
