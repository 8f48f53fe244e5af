#include "fracdiff/kernels.hpp"

#include <immintrin.h>

#include <cmath>

namespace fracdiff::kernels::avx2 {

double dot(const double* a, const double* b, std::size_t n) noexcept {
  __m256d acc0 = _mm256_setzero_pd();
  __m256d acc1 = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i), acc0);
    acc1 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i + 4), _mm256_loadu_pd(b + i + 4), acc1);
  }
  alignas(32) double s[4];
  _mm256_store_pd(s, _mm256_add_pd(acc0, acc1));
  double r = (s[0] + s[2]) + (s[1] + s[3]);
  for (; i < n; ++i) r = std::fma(a[i], b[i], r);
  return r;
}

void axpy(double alpha, const double* x, double* y, std::size_t n) noexcept {
  const __m256d va = _mm256_set1_pd(alpha);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    _mm256_storeu_pd(y + i, _mm256_fmadd_pd(va, _mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i)));
  }
  for (; i < n; ++i) y[i] = std::fma(alpha, x[i], y[i]);
}

void combine(double a, const double* x1, double b, const double* x2, double* y,
             std::size_t n) noexcept {
  const __m256d va = _mm256_set1_pd(a);
  const __m256d vb = _mm256_set1_pd(b);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d t = _mm256_mul_pd(vb, _mm256_loadu_pd(x2 + i));
    _mm256_storeu_pd(y + i, _mm256_fmadd_pd(va, _mm256_loadu_pd(x1 + i), t));
  }
  for (; i < n; ++i) y[i] = std::fma(a, x1[i], b * x2[i]);
}

}  // namespace fracdiff::kernels::avx2
