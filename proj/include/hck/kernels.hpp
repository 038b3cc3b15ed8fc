#pragma once

// Data-parallel inner loops used by the estimators. Each kernel has a scalar
// reference implementation and SIMD variants; the variant is selected once at
// runtime from the CPU's features. Setting HCK_KERNELS=scalar in the
// environment forces the reference path.

#include <cstddef>
#include <span>
#include <vector>

namespace hck::kernels {

enum class Isa { kScalar, kAvx2, kNeon };

const char* to_string(Isa isa);

struct KernelTable {
  Isa isa;
  // out[i] = in[i] * in[i]
  void (*square)(const double* in, double* out, std::size_t count);
  // sum_i a[i] * b[i]
  double (*dot)(const double* a, const double* b, std::size_t count);
  // sum_i a[i] * b[i] * c[i]
  double (*dot3)(const double* a, const double* b, const double* c, std::size_t count);
  // max_i |a[i] - b[i]|
  double (*max_abs_diff)(const double* a, const double* b, std::size_t count);
};

const KernelTable& scalar_table();

// Kernel table for `isa`, or nullptr when it is not compiled in or the CPU
// lacks the instructions.
const KernelTable* table_for(Isa isa);

// Variants usable on this machine, scalar first.
std::vector<Isa> available();

// The table every library call uses.
const KernelTable& active();

// ---- composed operations over column-major storage ----

// out = a (*) a elementwise, for arrays of equal length.
void hadamard_square(std::span<const double> a, std::span<double> out,
                     const KernelTable& k = active());

// y = (M (*) M) x for a symmetric n x n column-major M, without forming M (*) M.
void hadamard_square_matvec(std::span<const double> m, std::size_t n,
                            std::span<const double> x, std::span<double> y,
                            const KernelTable& k = active());

// out[i] = sum_j M_ij^2 for a symmetric n x n column-major M.
void row_sum_squares(std::span<const double> m, std::size_t n, std::span<double> out,
                     const KernelTable& k = active());

// out (d x d, column-major) = sum_i w[i] v_i v_i', where v is n x d column-major.
void weighted_gram(std::span<const double> v, std::size_t n, std::size_t d,
                   std::span<const double> w, std::span<double> out,
                   const KernelTable& k = active());

}  // namespace hck::kernels
