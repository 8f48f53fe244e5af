#include "fracdiff/kernels.hpp"

#include <arm_neon.h>

#include <cmath>

namespace fracdiff::kernels::neon {

// Four 2-wide accumulators reproduce the 8-lane layout of the scalar variant.
double dot(const double* a, const double* b, std::size_t n) noexcept {
  float64x2_t acc0 = vdupq_n_f64(0.0);
  float64x2_t acc1 = vdupq_n_f64(0.0);
  float64x2_t acc2 = vdupq_n_f64(0.0);
  float64x2_t acc3 = vdupq_n_f64(0.0);
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    acc0 = vfmaq_f64(acc0, vld1q_f64(a + i), vld1q_f64(b + i));
    acc1 = vfmaq_f64(acc1, vld1q_f64(a + i + 2), vld1q_f64(b + i + 2));
    acc2 = vfmaq_f64(acc2, vld1q_f64(a + i + 4), vld1q_f64(b + i + 4));
    acc3 = vfmaq_f64(acc3, vld1q_f64(a + i + 6), vld1q_f64(b + i + 6));
  }
  const float64x2_t s01 = vaddq_f64(acc0, acc2);
  const float64x2_t s23 = vaddq_f64(acc1, acc3);
  const double s0 = vgetq_lane_f64(s01, 0);
  const double s1 = vgetq_lane_f64(s01, 1);
  const double s2 = vgetq_lane_f64(s23, 0);
  const double s3 = vgetq_lane_f64(s23, 1);
  double r = (s0 + s2) + (s1 + s3);
  for (; i < n; ++i) r = std::fma(a[i], b[i], r);
  return r;
}

void axpy(double alpha, const double* x, double* y, std::size_t n) noexcept {
  const float64x2_t va = vdupq_n_f64(alpha);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    vst1q_f64(y + i, vfmaq_f64(vld1q_f64(y + i), va, vld1q_f64(x + i)));
  }
  for (; i < n; ++i) y[i] = std::fma(alpha, x[i], y[i]);
}

void combine(double a, const double* x1, double b, const double* x2, double* y,
             std::size_t n) noexcept {
  const float64x2_t va = vdupq_n_f64(a);
  const float64x2_t vb = vdupq_n_f64(b);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    const float64x2_t t = vmulq_f64(vb, vld1q_f64(x2 + i));
    vst1q_f64(y + i, vfmaq_f64(t, va, vld1q_f64(x1 + i)));
  }
  for (; i < n; ++i) y[i] = std::fma(a, x1[i], b * x2[i]);
}

}  // namespace fracdiff::kernels::neon
