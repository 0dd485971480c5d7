#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "fracrc/core.hpp"
#include "fracrc/reservoir.hpp"

namespace fracrc {

enum class WeightDistribution { Uniform, Constant };

struct ClassicRCConfig {
  std::size_t input_dim = 3;
  std::size_t reservoir_dim = 100;
  double spectral_radius = 0.2;
  double ridge = 1e-4;
  double edge_probability = 0.1;
  /// Uniform draws on [-1, 1]; Constant puts weight 1 on every edge.
  WeightDistribution weights = WeightDistribution::Uniform;
  double input_scale = 0.5;
  /// Readout library; empty means the plain state r.
  std::vector<FracExponent> library;
  std::uint64_t seed = 0;

  void validate() const;
};

/// Exponents 1, then four fractional steps per integer gap, up to max_power:
/// {1, 54/50, 66/50, 78/50, 90/50, 2, 104/50, ..., 140/50, 3} for max_power 3.
/// Shared integer endpoints appear once.
std::vector<FracExponent> default_fractional_library(int max_power = 3);

/// Strictly increasing and starting at exponent 1.
void validate_library(std::span<const FracExponent> library);

/// Compressed sparse row matrix.
struct SparseMatrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<std::size_t> row_ptr;
  std::vector<std::size_t> col_idx;
  std::vector<double> values;

  void multiply(std::span<const double> x, std::span<double> y) const;
  std::vector<double> to_dense() const;
  friend bool operator==(const SparseMatrix&, const SparseMatrix&) = default;
};

struct SpectralRadiusEstimate {
  double value = 0.0;
  bool converged = false;
  std::size_t iterations = 0;
  bool used_dense_fallback = false;
};

/// Block power iteration (orthogonal iteration with a Rayleigh-Ritz step),
/// which also resolves complex-conjugate dominant pairs. Stops when the
/// estimate changes by less than `tol` (relative) for three consecutive
/// iterations.
SpectralRadiusEstimate estimate_spectral_radius(const SparseMatrix& a, std::uint64_t seed, double tol = 1e-13,
                                                std::size_t max_iter = 4000, std::size_t block = 8);

/// Echo-state network: random sparse reservoir, tanh activation, optional
/// fractional readout library.
class ClassicRC {
 public:
  const ClassicRCConfig& config() const { return config_; }
  const SparseMatrix& adjacency() const { return adjacency_; }
  /// reservoir_dim x input_dim, row-major.
  const std::vector<double>& input_matrix() const { return w_in_; }
  /// Largest |eigenvalue| of the unscaled adjacency.
  double unscaled_spectral_radius() const { return lambda_max_; }
  /// Seed actually used after any resampling.
  std::uint64_t effective_seed() const { return effective_seed_; }

  std::size_t input_dim() const { return config_.input_dim; }
  std::size_t state_dim() const { return config_.reservoir_dim; }
  std::size_t feature_dim() const {
    return config_.reservoir_dim * (config_.library.empty() ? 1 : config_.library.size());
  }
  double ridge() const { return config_.ridge; }

  /// r <- tanh(A r + W_in x)
  void advance(std::span<double> r, std::span<const double> x, std::span<double> scratch) const;
  void generalize(std::span<const double> r, std::span<double> out) const;

  std::vector<double> step(std::span<const double> r, std::span<const double> x) const;

  friend ClassicRC build_classic(const ClassicRCConfig& config);

 private:
  ClassicRCConfig config_;
  SparseMatrix adjacency_;
  std::vector<double> w_in_;
  double lambda_max_ = 0.0;
  std::uint64_t effective_seed_ = 0;
};

/// Samples the network from config.seed; if the spectral radius of a draw is
/// numerically zero, resamples with seed+1, up to 5 retries.
ClassicRC build_classic(const ClassicRCConfig& config);

std::vector<double> generalize_classic(std::span<const double> r, std::span<const FracExponent> library);

}  // namespace fracrc
