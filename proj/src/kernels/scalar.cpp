#include <cmath>

#include "kernels_impl.hpp"

namespace hck::kernels::scalar {

void square(const double* in, double* out, std::size_t count) {
  for (std::size_t i = 0; i < count; ++i) out[i] = in[i] * in[i];
}

double dot(const double* a, const double* b, std::size_t count) {
  double s = 0.0;
  for (std::size_t i = 0; i < count; ++i) s += a[i] * b[i];
  return s;
}

double dot3(const double* a, const double* b, const double* c, std::size_t count) {
  double s = 0.0;
  for (std::size_t i = 0; i < count; ++i) s += a[i] * b[i] * c[i];
  return s;
}

double max_abs_diff(const double* a, const double* b, std::size_t count) {
  double m = 0.0;
  for (std::size_t i = 0; i < count; ++i) {
    const double d = std::fabs(a[i] - b[i]);
    if (d > m || std::isnan(d)) m = d;
  }
  return m;
}

}  // namespace hck::kernels::scalar
