#include "fracrc/minimal_rc.hpp"

#include <cmath>

namespace fracrc {

void MinRCConfig::validate() const {
  if (input_dim < 1) throw ConfigError("minimal RC: input_dim must be >= 1");
  if (input_dim > 16) throw ConfigError("minimal RC: input_dim > 16 would need more than 65535 feature blocks");
  if (block_size < 2) throw ConfigError("minimal RC: block_size must be >= 2");
  if (!(spectral_radius >= 0.0) || !std::isfinite(spectral_radius)) {
    throw ConfigError("minimal RC: spectral_radius must be finite and >= 0");
  }
  if (!(ridge > 0.0) || !std::isfinite(ridge)) throw ConfigError("minimal RC: ridge must be > 0");
}

std::vector<double> weight_vector(std::size_t block_size) {
  if (block_size < 2) throw ConfigError("weight_vector: block_size must be >= 2");
  const double denom = static_cast<double>(block_size - 1);
  std::vector<double> w(block_size);
  w.front() = 1.0;
  for (std::size_t k = 1; k + 1 < block_size; ++k) w[k] = std::sqrt(static_cast<double>(block_size - 1 - k) / denom);
  w.back() = 0.0;
  return w;
}

std::vector<std::vector<std::size_t>> feature_subsets(std::size_t input_dim) {
  std::vector<std::vector<std::size_t>> out;
  for (std::size_t size = 1; size <= input_dim; ++size) {
    // Lexicographic k-combinations of {0, ..., D-1}.
    std::vector<std::size_t> comb(size);
    for (std::size_t i = 0; i < size; ++i) comb[i] = i;
    while (true) {
      out.push_back(comb);
      std::size_t i = size;
      while (i > 0 && comb[i - 1] == input_dim - size + (i - 1)) --i;
      if (i == 0) break;
      ++comb[i - 1];
      for (std::size_t j = i; j < size; ++j) comb[j] = comb[j - 1] + 1;
    }
  }
  return out;
}

std::vector<double> BlockReservoir::materialize() const {
  const std::size_t n = block_count * block_size;
  std::vector<double> a(n * n, 0.0);
  for (std::size_t f = 0; f < block_count; ++f) {
    for (std::size_t i = 0; i < block_size; ++i) {
      for (std::size_t j = 0; j < block_size; ++j) a[(f * block_size + i) * n + f * block_size + j] = scale;
    }
  }
  return a;
}

MinRC::MinRC(MinRCConfig config) : config_(std::move(config)) {
  config_.validate();
  const std::size_t b = config_.block_size;
  input_.subsets = feature_subsets(config_.input_dim);
  input_.weights = weight_vector(b);
  input_.rows = input_.subsets.size() * b;
  input_.cols = config_.input_dim;
  input_.matrix.assign(input_.rows * input_.cols, 0.0);
  for (std::size_t f = 0; f < input_.subsets.size(); ++f) {
    for (std::size_t j : input_.subsets[f]) {
      for (std::size_t i = 0; i < b; ++i) input_.matrix[(f * b + i) * input_.cols + j] = input_.weights[i];
    }
  }
  reservoir_.block_count = input_.subsets.size();
  reservoir_.block_size = b;
  reservoir_.scale = config_.spectral_radius / static_cast<double>(b);
}

void MinRC::advance(std::span<double> r, std::span<const double> x, std::span<double> /*scratch*/) const {
  const std::size_t b = reservoir_.block_size;
  const auto& w = input_.weights;
  for (std::size_t f = 0; f < reservoir_.block_count; ++f) {
    double* blk = r.data() + f * b;
    double block_sum = 0.0;
    for (std::size_t i = 0; i < b; ++i) block_sum += blk[i];
    double feature = 0.0;
    for (std::size_t j : input_.subsets[f]) feature += x[j];
    const double recurrent = reservoir_.scale * block_sum;
    for (std::size_t i = 0; i < b; ++i) blk[i] = recurrent + w[i] * feature;
  }
}

void MinRC::generalize(std::span<const double> r, std::span<double> out) const {
  const std::size_t n = r.size();
  std::copy(r.begin(), r.end(), out.begin());
  for (std::size_t k = 0; k < config_.exponents.size(); ++k) {
    frac_pow(r, config_.exponents[k], out.subspan((k + 1) * n, n));
  }
}

std::vector<double> MinRC::step(std::span<const double> r, std::span<const double> x) const {
  if (r.size() != state_dim() || x.size() != input_dim()) throw ConfigError("MinRC::step: shape mismatch");
  for (double v : x) {
    if (!std::isfinite(v)) throw NumericalError("MinRC::step: non-finite input");
  }
  std::vector<double> next(r.begin(), r.end());
  advance(next, x, {});
  return next;
}

MinRC build(const MinRCConfig& config) { return MinRC(config); }

std::vector<double> generalize(std::span<const double> r, std::span<const FracExponent> exponents) {
  std::vector<double> out((1 + exponents.size()) * r.size());
  std::copy(r.begin(), r.end(), out.begin());
  for (std::size_t k = 0; k < exponents.size(); ++k) {
    frac_pow(r, exponents[k], std::span<double>(out).subspan((k + 1) * r.size(), r.size()));
  }
  return out;
}

}  // namespace fracrc
