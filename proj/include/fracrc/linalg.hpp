#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace fracrc {

/// Linear readout W_out, outputs x features, row-major.
struct Readout {
  std::size_t outputs = 0;
  std::size_t features = 0;
  std::vector<double> weights;

  /// y = W_out * feature
  void apply(std::span<const double> feature, std::span<double> y) const;

  friend bool operator==(const Readout&, const Readout&) = default;
};

/// Streams (feature, target) pairs into the normal-equation sums
/// G = sum f f^T and B = sum x f^T, then solves the ridge problem
/// W (G + beta 1) = B.
class RidgeAccumulator {
 public:
  RidgeAccumulator(std::size_t features, std::size_t outputs);

  void add(std::span<const double> feature, std::span<const double> target);

  std::size_t count() const { return count_; }
  std::size_t features() const { return features_; }
  std::size_t outputs() const { return outputs_; }

  /// Full symmetric G (row-major features x features).
  std::vector<double> gram() const;
  /// B, row-major outputs x features.
  std::vector<double> cross() const;

  /// Symmetric positive-definite factorization of the Jacobi-scaled system;
  /// falls back to a rank-revealing solve if the factorization fails.
  Readout solve(double beta) const;

 private:
  void flush() const;

  std::size_t features_;
  std::size_t outputs_;
  std::size_t count_ = 0;
  mutable std::vector<double> g_upper_;
  std::vector<double> cross_;
  mutable std::vector<double> pending_;
  mutable std::size_t pending_rows_ = 0;
};

/// Solve W (G + beta 1) = B for W given full symmetric G (n x n, row-major)
/// and B (m x n, row-major).
Readout ridge_solve(std::span<const double> gram, std::span<const double> cross, std::size_t features,
                    std::size_t outputs, double beta);

}  // namespace fracrc
