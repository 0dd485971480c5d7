#include "fracrc/simd/kernels.hpp"

namespace fracrc::simd {
namespace {

double dot_scalar(const double* a, const double* b, std::size_t n) {
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) s += a[i] * b[i];
  return s;
}

void axpy_scalar(double alpha, const double* x, double* y, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] += alpha * x[i];
}

void gemv_scalar(const double* a, std::size_t rows, std::size_t cols, const double* x, double* y) {
  for (std::size_t r = 0; r < rows; ++r) y[r] = dot_scalar(a + r * cols, x, cols);
}

void syrk_upper_scalar(double* g, std::size_t n, const double* s, std::size_t count) {
  for (std::size_t k = 0; k < count; ++k) {
    const double* row = s + k * n;
    for (std::size_t i = 0; i < n; ++i) {
      const double si = row[i];
      if (si == 0.0) continue;
      double* gi = g + i * n;
      for (std::size_t j = i; j < n; ++j) gi[j] += si * row[j];
    }
  }
}

void sq_dist_soa_scalar(const double* q, const double* pts, std::size_t stride, std::size_t dim,
                        std::size_t n, double* out) {
  for (std::size_t i = 0; i < n; ++i) {
    const double d = q[0] - pts[i];
    out[i] = d * d;
  }
  for (std::size_t c = 1; c < dim; ++c) {
    const double qc = q[c];
    const double* col = pts + c * stride;
    for (std::size_t i = 0; i < n; ++i) {
      const double d = qc - col[i];
      out[i] = out[i] + d * d;
    }
  }
}

}  // namespace

const KernelTable& scalar_kernels() {
  static const KernelTable table{Isa::Scalar, dot_scalar, axpy_scalar, gemv_scalar, syrk_upper_scalar,
                                 sq_dist_soa_scalar};
  return table;
}

}  // namespace fracrc::simd
