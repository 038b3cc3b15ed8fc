#include <cstdlib>
#include <stdexcept>
#include <string_view>

#include "hck/kernels.hpp"
#include "kernels_impl.hpp"

namespace hck::kernels {
namespace {

#if defined(__x86_64__) || defined(_M_X64)
#define HCK_HAVE_AVX2_TU 1
#endif
#if defined(__aarch64__) || defined(_M_ARM64)
#define HCK_HAVE_NEON_TU 1
#endif

constexpr KernelTable kScalar{Isa::kScalar, scalar::square, scalar::dot, scalar::dot3,
                              scalar::max_abs_diff};
#ifdef HCK_HAVE_AVX2_TU
constexpr KernelTable kAvx2{Isa::kAvx2, avx2::square, avx2::dot, avx2::dot3,
                            avx2::max_abs_diff};
#endif
#ifdef HCK_HAVE_NEON_TU
constexpr KernelTable kNeon{Isa::kNeon, neon::square, neon::dot, neon::dot3,
                            neon::max_abs_diff};
#endif

bool cpu_has_avx2() {
#ifdef HCK_HAVE_AVX2_TU
  __builtin_cpu_init();
  return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
  return false;
#endif
}

const KernelTable& select() {
  const KernelTable* best = &kScalar;
  for (Isa isa : available()) best = table_for(isa);
  if (const char* env = std::getenv("HCK_KERNELS")) {
    const std::string_view want(env);
    for (Isa isa : available()) {
      if (want == to_string(isa)) return *table_for(isa);
    }
  }
  return *best;
}

void require(bool ok, const char* what) {
  if (!ok) throw std::invalid_argument(what);
}

}  // namespace

const char* to_string(Isa isa) {
  switch (isa) {
    case Isa::kScalar: return "scalar";
    case Isa::kAvx2: return "avx2";
    case Isa::kNeon: return "neon";
  }
  return "unknown";
}

const KernelTable& scalar_table() { return kScalar; }

const KernelTable* table_for(Isa isa) {
  switch (isa) {
    case Isa::kScalar: return &kScalar;
    case Isa::kAvx2:
#ifdef HCK_HAVE_AVX2_TU
      if (cpu_has_avx2()) return &kAvx2;
#endif
      return nullptr;
    case Isa::kNeon:
#ifdef HCK_HAVE_NEON_TU
      return &kNeon;
#else
      return nullptr;
#endif
  }
  return nullptr;
}

std::vector<Isa> available() {
  std::vector<Isa> out{Isa::kScalar};
  if (table_for(Isa::kAvx2)) out.push_back(Isa::kAvx2);
  if (table_for(Isa::kNeon)) out.push_back(Isa::kNeon);
  return out;
}

const KernelTable& active() {
  static const KernelTable& table = select();
  return table;
}

void hadamard_square(std::span<const double> a, std::span<double> out, const KernelTable& k) {
  require(a.size() == out.size(), "hadamard_square: size mismatch");
  k.square(a.data(), out.data(), a.size());
}

void hadamard_square_matvec(std::span<const double> m, std::size_t n,
                            std::span<const double> x, std::span<double> y,
                            const KernelTable& k) {
  require(m.size() == n * n && x.size() == n && y.size() == n,
          "hadamard_square_matvec: size mismatch");
  // Row i of a symmetric matrix is column i, which is contiguous.
  for (std::size_t i = 0; i < n; ++i) {
    const double* col = m.data() + i * n;
    y[i] = k.dot3(col, col, x.data(), n);
  }
}

void row_sum_squares(std::span<const double> m, std::size_t n, std::span<double> out,
                     const KernelTable& k) {
  require(m.size() == n * n && out.size() == n, "row_sum_squares: size mismatch");
  for (std::size_t i = 0; i < n; ++i) {
    const double* col = m.data() + i * n;
    out[i] = k.dot(col, col, n);
  }
}

void weighted_gram(std::span<const double> v, std::size_t n, std::size_t d,
                   std::span<const double> w, std::span<double> out, const KernelTable& k) {
  require(v.size() == n * d && w.size() == n && out.size() == d * d,
          "weighted_gram: size mismatch");
  for (std::size_t a = 0; a < d; ++a) {
    for (std::size_t b = 0; b <= a; ++b) {
      const double s = k.dot3(v.data() + a * n, v.data() + b * n, w.data(), n);
      out[a + b * d] = s;
      out[b + a * d] = s;
    }
  }
}

}  // namespace hck::kernels
