#include <immintrin.h>

#include "kernels_impl.hpp"

namespace hck::kernels::avx2 {
namespace {

inline double hsum(__m256d v) {
  const __m128d lo = _mm256_castpd256_pd128(v);
  const __m128d hi = _mm256_extractf128_pd(v, 1);
  const __m128d s = _mm_add_pd(lo, hi);
  return _mm_cvtsd_f64(_mm_add_sd(s, _mm_unpackhi_pd(s, s)));
}

inline double hmax(__m256d v) {
  const __m128d lo = _mm256_castpd256_pd128(v);
  const __m128d hi = _mm256_extractf128_pd(v, 1);
  const __m128d m = _mm_max_pd(lo, hi);
  return _mm_cvtsd_f64(_mm_max_sd(m, _mm_unpackhi_pd(m, m)));
}

}  // namespace

void square(const double* in, double* out, std::size_t count) {
  std::size_t i = 0;
  for (; i + 8 <= count; i += 8) {
    const __m256d a = _mm256_loadu_pd(in + i);
    const __m256d b = _mm256_loadu_pd(in + i + 4);
    _mm256_storeu_pd(out + i, _mm256_mul_pd(a, a));
    _mm256_storeu_pd(out + i + 4, _mm256_mul_pd(b, b));
  }
  for (; i + 4 <= count; i += 4) {
    const __m256d a = _mm256_loadu_pd(in + i);
    _mm256_storeu_pd(out + i, _mm256_mul_pd(a, a));
  }
  for (; i < count; ++i) out[i] = in[i] * in[i];
}

double dot(const double* a, const double* b, std::size_t count) {
  __m256d acc0 = _mm256_setzero_pd();
  __m256d acc1 = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 8 <= count; i += 8) {
    acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i), acc0);
    acc1 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i + 4), _mm256_loadu_pd(b + i + 4), acc1);
  }
  for (; i + 4 <= count; i += 4) {
    acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i), acc0);
  }
  double s = hsum(_mm256_add_pd(acc0, acc1));
  for (; i < count; ++i) s += a[i] * b[i];
  return s;
}

double dot3(const double* a, const double* b, const double* c, std::size_t count) {
  __m256d acc0 = _mm256_setzero_pd();
  __m256d acc1 = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 8 <= count; i += 8) {
    const __m256d p0 = _mm256_mul_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i));
    const __m256d p1 = _mm256_mul_pd(_mm256_loadu_pd(a + i + 4), _mm256_loadu_pd(b + i + 4));
    acc0 = _mm256_fmadd_pd(p0, _mm256_loadu_pd(c + i), acc0);
    acc1 = _mm256_fmadd_pd(p1, _mm256_loadu_pd(c + i + 4), acc1);
  }
  for (; i + 4 <= count; i += 4) {
    const __m256d p0 = _mm256_mul_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i));
    acc0 = _mm256_fmadd_pd(p0, _mm256_loadu_pd(c + i), acc0);
  }
  double s = hsum(_mm256_add_pd(acc0, acc1));
  for (; i < count; ++i) s += a[i] * b[i] * c[i];
  return s;
}

double max_abs_diff(const double* a, const double* b, std::size_t count) {
  const __m256d sign = _mm256_set1_pd(-0.0);
  __m256d acc = _mm256_setzero_pd();
  __m256d nan_seen = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= count; i += 4) {
    const __m256d d = _mm256_andnot_pd(sign, _mm256_sub_pd(_mm256_loadu_pd(a + i),
                                                          _mm256_loadu_pd(b + i)));
    nan_seen = _mm256_or_pd(nan_seen, _mm256_cmp_pd(d, d, _CMP_UNORD_Q));
    acc = _mm256_max_pd(acc, d);
  }
  if (_mm256_movemask_pd(nan_seen) != 0) return __builtin_nan("");
  double m = hmax(acc);
  for (; i < count; ++i) {
    double d = a[i] - b[i];
    d = d < 0 ? -d : d;
    if (d != d) return d;
    if (d > m) m = d;
  }
  return m;
}

}  // namespace hck::kernels::avx2
