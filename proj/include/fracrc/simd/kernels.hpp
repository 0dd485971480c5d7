#pragma once

// Data-parallel inner loops. Each kernel has a scalar reference
// implementation and, where the build and CPU allow it, an AVX2/FMA variant
// picked once at startup. Both variants are covered by equivalence tests.

#include <cstddef>
#include <string_view>

namespace fracrc::simd {

enum class Isa { Scalar, Avx2 };

struct KernelTable {
  Isa isa;

  // sum_i a[i] * b[i]
  double (*dot)(const double* a, const double* b, std::size_t n);

  // y[i] += alpha * x[i]
  void (*axpy)(double alpha, const double* x, double* y, std::size_t n);

  // y = A x, A row-major rows x cols.
  void (*gemv)(const double* a, std::size_t rows, std::size_t cols, const double* x, double* y);

  // Upper triangle (j >= i) of the row-major n x n matrix G accumulates
  // S^T S, where S is `count` rows of length n, row-major.
  void (*syrk_upper)(double* g, std::size_t n, const double* s, std::size_t count);

  // out[i] = sum_c (q[c] - pts[c*stride + i])^2 for i < n, accumulated in
  // coordinate order with separate multiply and add (no FMA) so that every
  // variant returns bit-identical distances. `pts` is structure-of-arrays.
  void (*sq_dist_soa)(const double* q, const double* pts, std::size_t stride, std::size_t dim,
                      std::size_t n, double* out);
};

const KernelTable& scalar_kernels();
#if defined(FRACRC_HAVE_AVX2)
const KernelTable& avx2_kernels();
#endif

/// Kernels for the active ISA. Resolved on first use from CPU support, unless
/// overridden with FRACRC_ISA=scalar in the environment or force_isa().
const KernelTable& kernels();

/// Returns false if the ISA is not available in this build or on this CPU.
bool force_isa(Isa isa);

bool isa_available(Isa isa);

std::string_view isa_name(Isa isa);

}  // namespace fracrc::simd
