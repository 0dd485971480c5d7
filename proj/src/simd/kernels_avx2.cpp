#include "fracrc/simd/kernels.hpp"

#include <immintrin.h>

namespace fracrc::simd {
namespace {

inline double hsum(__m256d v) {
  __m128d lo = _mm256_castpd256_pd128(v);
  __m128d hi = _mm256_extractf128_pd(v, 1);
  lo = _mm_add_pd(lo, hi);
  __m128d sh = _mm_unpackhi_pd(lo, lo);
  return _mm_cvtsd_f64(_mm_add_sd(lo, sh));
}

double dot_avx2(const double* a, const double* b, std::size_t n) {
  __m256d acc0 = _mm256_setzero_pd();
  __m256d acc1 = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i), acc0);
    acc1 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i + 4), _mm256_loadu_pd(b + i + 4), acc1);
  }
  for (; i + 4 <= n; i += 4) acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i), acc0);
  double s = hsum(_mm256_add_pd(acc0, acc1));
  for (; i < n; ++i) s += a[i] * b[i];
  return s;
}

void axpy_avx2(double alpha, const double* x, double* y, std::size_t n) {
  const __m256d va = _mm256_set1_pd(alpha);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    _mm256_storeu_pd(y + i, _mm256_fmadd_pd(va, _mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i)));
  }
  for (; i < n; ++i) y[i] += alpha * x[i];
}

void gemv_avx2(const double* a, std::size_t rows, std::size_t cols, const double* x, double* y) {
  for (std::size_t r = 0; r < rows; ++r) y[r] = dot_avx2(a + r * cols, x, cols);
}

// Rows of S are consumed in blocks so that a block stays cache resident
// while every row of G streams through once per block.
constexpr std::size_t kSyrkBlock = 32;

void syrk_upper_avx2(double* g, std::size_t n, const double* s, std::size_t count) {
  for (std::size_t k0 = 0; k0 < count; k0 += kSyrkBlock) {
    const std::size_t kn = (count - k0 < kSyrkBlock) ? count - k0 : kSyrkBlock;
    const double* blk = s + k0 * n;
    for (std::size_t i = 0; i < n; ++i) {
      double* gi = g + i * n;
      std::size_t j = i;
      for (; j + 16 <= n; j += 16) {
        __m256d c0 = _mm256_loadu_pd(gi + j);
        __m256d c1 = _mm256_loadu_pd(gi + j + 4);
        __m256d c2 = _mm256_loadu_pd(gi + j + 8);
        __m256d c3 = _mm256_loadu_pd(gi + j + 12);
        for (std::size_t k = 0; k < kn; ++k) {
          const double* row = blk + k * n;
          const __m256d si = _mm256_broadcast_sd(row + i);
          c0 = _mm256_fmadd_pd(si, _mm256_loadu_pd(row + j), c0);
          c1 = _mm256_fmadd_pd(si, _mm256_loadu_pd(row + j + 4), c1);
          c2 = _mm256_fmadd_pd(si, _mm256_loadu_pd(row + j + 8), c2);
          c3 = _mm256_fmadd_pd(si, _mm256_loadu_pd(row + j + 12), c3);
        }
        _mm256_storeu_pd(gi + j, c0);
        _mm256_storeu_pd(gi + j + 4, c1);
        _mm256_storeu_pd(gi + j + 8, c2);
        _mm256_storeu_pd(gi + j + 12, c3);
      }
      for (; j + 4 <= n; j += 4) {
        __m256d c0 = _mm256_loadu_pd(gi + j);
        for (std::size_t k = 0; k < kn; ++k) {
          const double* row = blk + k * n;
          c0 = _mm256_fmadd_pd(_mm256_broadcast_sd(row + i), _mm256_loadu_pd(row + j), c0);
        }
        _mm256_storeu_pd(gi + j, c0);
      }
      for (; j < n; ++j) {
        double c = gi[j];
        for (std::size_t k = 0; k < kn; ++k) c += blk[k * n + i] * blk[k * n + j];
        gi[j] = c;
      }
    }
  }
}

void sq_dist_soa_avx2(const double* q, const double* pts, std::size_t stride, std::size_t dim,
                      std::size_t n, double* out) {
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    __m256d d = _mm256_sub_pd(_mm256_set1_pd(q[0]), _mm256_loadu_pd(pts + i));
    __m256d acc = _mm256_mul_pd(d, d);
    for (std::size_t c = 1; c < dim; ++c) {
      d = _mm256_sub_pd(_mm256_set1_pd(q[c]), _mm256_loadu_pd(pts + c * stride + i));
      acc = _mm256_add_pd(acc, _mm256_mul_pd(d, d));
    }
    _mm256_storeu_pd(out + i, acc);
  }
  for (; i < n; ++i) {
    double d = q[0] - pts[i];
    double acc = d * d;
    for (std::size_t c = 1; c < dim; ++c) {
      d = q[c] - pts[c * stride + i];
      acc = acc + d * d;
    }
    out[i] = acc;
  }
}

}  // namespace

const KernelTable& avx2_kernels() {
  static const KernelTable table{Isa::Avx2, dot_avx2, axpy_avx2, gemv_avx2, syrk_upper_avx2, sq_dist_soa_avx2};
  return table;
}

}  // namespace fracrc::simd
