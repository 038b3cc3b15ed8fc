#include <arm_neon.h>

#include <cmath>

#include "kernels_impl.hpp"

namespace hck::kernels::neon {

void square(const double* in, double* out, std::size_t count) {
  std::size_t i = 0;
  for (; i + 2 <= count; i += 2) {
    const float64x2_t a = vld1q_f64(in + i);
    vst1q_f64(out + i, vmulq_f64(a, a));
  }
  for (; i < count; ++i) out[i] = in[i] * in[i];
}

double dot(const double* a, const double* b, std::size_t count) {
  float64x2_t acc0 = vdupq_n_f64(0.0);
  float64x2_t acc1 = vdupq_n_f64(0.0);
  std::size_t i = 0;
  for (; i + 4 <= count; i += 4) {
    acc0 = vfmaq_f64(acc0, vld1q_f64(a + i), vld1q_f64(b + i));
    acc1 = vfmaq_f64(acc1, vld1q_f64(a + i + 2), vld1q_f64(b + i + 2));
  }
  double s = vaddvq_f64(vaddq_f64(acc0, acc1));
  for (; i < count; ++i) s += a[i] * b[i];
  return s;
}

double dot3(const double* a, const double* b, const double* c, std::size_t count) {
  float64x2_t acc0 = vdupq_n_f64(0.0);
  float64x2_t acc1 = vdupq_n_f64(0.0);
  std::size_t i = 0;
  for (; i + 4 <= count; i += 4) {
    acc0 = vfmaq_f64(acc0, vmulq_f64(vld1q_f64(a + i), vld1q_f64(b + i)), vld1q_f64(c + i));
    acc1 = vfmaq_f64(acc1, vmulq_f64(vld1q_f64(a + i + 2), vld1q_f64(b + i + 2)),
                     vld1q_f64(c + i + 2));
  }
  double s = vaddvq_f64(vaddq_f64(acc0, acc1));
  for (; i < count; ++i) s += a[i] * b[i] * c[i];
  return s;
}

double max_abs_diff(const double* a, const double* b, std::size_t count) {
  // vmaxq_f64 propagates NaN, matching the scalar reference.
  float64x2_t acc = vdupq_n_f64(0.0);
  std::size_t i = 0;
  for (; i + 2 <= count; i += 2) {
    acc = vmaxq_f64(acc, vabdq_f64(vld1q_f64(a + i), vld1q_f64(b + i)));
  }
  double m = vmaxvq_f64(acc);
  for (; i < count; ++i) {
    const double d = std::fabs(a[i] - b[i]);
    if (d > m || std::isnan(d)) m = d;
  }
  return m;
}

}  // namespace hck::kernels::neon
