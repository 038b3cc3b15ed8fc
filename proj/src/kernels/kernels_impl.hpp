#pragma once

// Internal declarations of the per-ISA kernels. Kept free of Eigen and the
// standard containers so the SIMD translation units share no inline code with
// the rest of the library.

#include <cstddef>

#define HCK_DECLARE_KERNELS                                                          \
  void square(const double* in, double* out, std::size_t count);                   \
  double dot(const double* a, const double* b, std::size_t count);                 \
  double dot3(const double* a, const double* b, const double* c, std::size_t count); \
  double max_abs_diff(const double* a, const double* b, std::size_t count);

namespace hck::kernels::scalar {
HCK_DECLARE_KERNELS
}

namespace hck::kernels::avx2 {
HCK_DECLARE_KERNELS
}

namespace hck::kernels::neon {
HCK_DECLARE_KERNELS
}

#undef HCK_DECLARE_KERNELS
