#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "fracrc/core.hpp"
#include "fracrc/linalg.hpp"
#include "fracrc/reservoir.hpp"
#include "fracrc/trajectory.hpp"

namespace fracrc {

struct MinRCConfig {
  std::size_t input_dim = 3;
  std::size_t block_size = 3;
  double spectral_radius = 1e-3;
  double ridge = 1e-6;
  /// Readout nonlinearities. One entry is the reduced setup, {2,...,eta_max}
  /// the classic one, empty a purely linear readout.
  std::vector<FracExponent> exponents{FracExponent(100)};

  void validate() const;
};

/// Copy weights (1, sqrt((b-2)/(b-1)), ..., sqrt(1/(b-1)), 0).
std::vector<double> weight_vector(std::size_t block_size);

/// Non-empty coordinate subsets ordered by size, then lexicographically.
/// For three coordinates: {0},{1},{2},{0,1},{0,2},{1,2},{0,1,2}.
std::vector<std::vector<std::size_t>> feature_subsets(std::size_t input_dim);

struct InputMatrix {
  std::vector<std::vector<std::size_t>> subsets;
  std::vector<double> weights;
  /// Materialized ((2^D - 1) * b) x D, row-major.
  std::vector<double> matrix;
  std::size_t rows = 0;
  std::size_t cols = 0;
};

/// A = (rho*/b) blockdiag(J, ..., J) with J the b x b all-ones matrix. Kept
/// implicit; materialize() exists for tests and inspection.
struct BlockReservoir {
  std::size_t block_count = 0;
  std::size_t block_size = 0;
  double scale = 0.0;

  std::vector<double> materialize() const;
};

/// Deterministic minimal reservoir computer: subset-sum input features,
/// block-diagonal all-ones reservoir, linear state evolution, and a readout
/// over [r, |r|^eta_1, ...].
class MinRC {
 public:
  explicit MinRC(MinRCConfig config);

  const MinRCConfig& config() const { return config_; }
  const InputMatrix& input_matrix() const { return input_; }
  const BlockReservoir& reservoir() const { return reservoir_; }

  std::size_t input_dim() const { return config_.input_dim; }
  std::size_t state_dim() const { return reservoir_.block_count * reservoir_.block_size; }
  std::size_t feature_dim() const { return (1 + config_.exponents.size()) * state_dim(); }
  double ridge() const { return config_.ridge; }

  /// r <- A r + W_in x, in place, using the block structure. Cost O(2^D b).
  void advance(std::span<double> r, std::span<const double> x, std::span<double> scratch) const;

  /// r~ = [r, frac_pow(r, eta_1), ...]
  void generalize(std::span<const double> r, std::span<double> out) const;

  std::vector<double> step(std::span<const double> r, std::span<const double> x) const;

 private:
  MinRCConfig config_;
  InputMatrix input_;
  BlockReservoir reservoir_;
};

MinRC build(const MinRCConfig& config);

/// Stand-alone generalized state for an arbitrary exponent list.
std::vector<double> generalize(std::span<const double> r, std::span<const FracExponent> exponents);

}  // namespace fracrc
