#include "fracrc/classic_rc.hpp"

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>

namespace fracrc {

void ClassicRCConfig::validate() const {
  if (input_dim < 1) throw ConfigError("classic RC: input_dim must be >= 1");
  if (reservoir_dim < 1) throw ConfigError("classic RC: reservoir_dim must be >= 1");
  if (!(spectral_radius > 0.0) || !std::isfinite(spectral_radius)) {
    throw ConfigError("classic RC: spectral_radius must be > 0");
  }
  if (!(ridge > 0.0) || !std::isfinite(ridge)) throw ConfigError("classic RC: ridge must be > 0");
  if (!(edge_probability > 0.0 && edge_probability <= 1.0)) {
    throw ConfigError("classic RC: edge_probability must lie in (0, 1]");
  }
  if (!(input_scale >= 0.0) || !std::isfinite(input_scale)) throw ConfigError("classic RC: input_scale must be >= 0");
  if (!library.empty()) validate_library(library);
}

std::vector<FracExponent> default_fractional_library(int max_power) {
  if (max_power < 1) throw ConfigError("fractional library: max_power must be >= 1");
  constexpr int d = FracExponent::kDefaultDenominator;
  std::vector<FracExponent> lib{FracExponent::linear(d)};
  for (int p = 1; p < max_power; ++p) {
    for (int step : {4, 16, 28, 40}) lib.emplace_back(p * d + step, d);
    lib.emplace_back((p + 1) * d, d);
  }
  return lib;
}

void validate_library(std::span<const FracExponent> library) {
  if (library.empty()) return;
  if (!library.front().is_linear()) throw ConfigError("fractional library must start with exponent 1");
  for (std::size_t i = 1; i < library.size(); ++i) {
    if (!(library[i - 1] < library[i])) throw ConfigError("fractional library must be strictly increasing");
  }
}

void SparseMatrix::multiply(std::span<const double> x, std::span<double> y) const {
  for (std::size_t r = 0; r < rows; ++r) {
    double s = 0.0;
    for (std::size_t k = row_ptr[r]; k < row_ptr[r + 1]; ++k) s += values[k] * x[col_idx[k]];
    y[r] = s;
  }
}

std::vector<double> SparseMatrix::to_dense() const {
  std::vector<double> out(rows * cols, 0.0);
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t k = row_ptr[r]; k < row_ptr[r + 1]; ++k) out[r * cols + col_idx[k]] = values[k];
  }
  return out;
}

SpectralRadiusEstimate estimate_spectral_radius(const SparseMatrix& a, std::uint64_t seed, double tol,
                                                std::size_t max_iter, std::size_t block) {
  const auto n = static_cast<Eigen::Index>(a.rows);
  const auto p = static_cast<Eigen::Index>(std::min<std::size_t>(block, a.rows));
  Rng rng(derive_seed(seed, {0x5e}));
  Eigen::MatrixXd q(n, p);
  for (Eigen::Index j = 0; j < p; ++j) {
    for (Eigen::Index i = 0; i < n; ++i) q(i, j) = rng.uniform(-1.0, 1.0);
  }
  q = Eigen::HouseholderQR<Eigen::MatrixXd>(q).householderQ() * Eigen::MatrixXd::Identity(n, p);

  SpectralRadiusEstimate est;
  Eigen::MatrixXd z(n, p);
  double prev = -1.0;
  int stable = 0;
  for (std::size_t it = 1; it <= max_iter; ++it) {
    for (Eigen::Index j = 0; j < p; ++j) {
      a.multiply({q.col(j).data(), a.rows}, {z.col(j).data(), a.rows});
    }
    const Eigen::MatrixXd h = q.transpose() * z;
    const Eigen::VectorXcd ritz = Eigen::EigenSolver<Eigen::MatrixXd>(h, false).eigenvalues();
    double rho = 0.0;
    for (Eigen::Index k = 0; k < ritz.size(); ++k) rho = std::max(rho, std::abs(ritz(k)));
    est.value = rho;
    est.iterations = it;
    if (!std::isfinite(rho)) break;
    if (rho == 0.0 && z.norm() == 0.0) {
      est.converged = true;  // nilpotent on the start block; caller resamples
      return est;
    }
    if (prev >= 0.0 && std::fabs(rho - prev) <= tol * rho) {
      if (++stable >= 3) {
        est.converged = true;
        return est;
      }
    } else {
      stable = 0;
    }
    prev = rho;
    q = Eigen::HouseholderQR<Eigen::MatrixXd>(z).householderQ() * Eigen::MatrixXd::Identity(n, p);
  }

  // Clustered dominant moduli: settle it with a dense eigenvalue solve.
  const std::vector<double> dense = a.to_dense();
  const Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>> m(dense.data(), n, n);
  const Eigen::VectorXcd ev = Eigen::EigenSolver<Eigen::MatrixXd>(Eigen::MatrixXd(m), false).eigenvalues();
  double rho = 0.0;
  for (Eigen::Index k = 0; k < ev.size(); ++k) rho = std::max(rho, std::abs(ev(k)));
  est.value = rho;
  est.converged = true;
  est.used_dense_fallback = true;
  return est;
}

namespace {

SparseMatrix sample_network(const ClassicRCConfig& cfg, Rng& rng) {
  SparseMatrix a;
  a.rows = a.cols = cfg.reservoir_dim;
  a.row_ptr.reserve(a.rows + 1);
  a.row_ptr.push_back(0);
  for (std::size_t i = 0; i < a.rows; ++i) {
    for (std::size_t j = 0; j < a.cols; ++j) {
      if (cfg.edge_probability < 1.0 && rng.uniform() >= cfg.edge_probability) continue;
      a.col_idx.push_back(j);
      a.values.push_back(cfg.weights == WeightDistribution::Constant ? 1.0 : rng.uniform(-1.0, 1.0));
    }
    a.row_ptr.push_back(a.col_idx.size());
  }
  return a;
}

}  // namespace

ClassicRC build_classic(const ClassicRCConfig& config) {
  config.validate();
  constexpr int kMaxRetries = 5;
  for (int attempt = 0; attempt <= kMaxRetries; ++attempt) {
    const std::uint64_t seed = config.seed + static_cast<std::uint64_t>(attempt);
    Rng rng(derive_seed(seed, {0xc1a5}));
    Rng net_rng = rng.split(1);
    Rng in_rng = rng.split(2);
    SparseMatrix a = sample_network(config, net_rng);
    const SpectralRadiusEstimate est = estimate_spectral_radius(a, seed);
    if (!est.converged || !(est.value > 1e-12) || !std::isfinite(est.value)) continue;

    ClassicRC rc;
    rc.config_ = config;
    rc.lambda_max_ = est.value;
    rc.effective_seed_ = seed;
    const double factor = config.spectral_radius / est.value;
    for (double& v : a.values) v *= factor;
    rc.adjacency_ = std::move(a);
    rc.w_in_.resize(config.reservoir_dim * config.input_dim);
    for (double& v : rc.w_in_) v = in_rng.uniform(-config.input_scale, config.input_scale);
    return rc;
  }
  throw NumericalError("build_classic: spectral radius estimate failed after " + std::to_string(kMaxRetries) +
                       " resamples");
}

void ClassicRC::advance(std::span<double> r, std::span<const double> x, std::span<double> scratch) const {
  adjacency_.multiply(r, scratch);
  const std::size_t d = config_.reservoir_dim;
  const std::size_t D = config_.input_dim;
  for (std::size_t i = 0; i < d; ++i) {
    double s = scratch[i];
    for (std::size_t j = 0; j < D; ++j) s += w_in_[i * D + j] * x[j];
    r[i] = std::tanh(s);
  }
}

void ClassicRC::generalize(std::span<const double> r, std::span<double> out) const {
  if (config_.library.empty()) {
    std::copy(r.begin(), r.end(), out.begin());
    return;
  }
  const std::size_t n = r.size();
  for (std::size_t k = 0; k < config_.library.size(); ++k) library_pow(r, config_.library[k], out.subspan(k * n, n));
}

std::vector<double> ClassicRC::step(std::span<const double> r, std::span<const double> x) const {
  if (r.size() != state_dim() || x.size() != input_dim()) throw ConfigError("ClassicRC::step: shape mismatch");
  for (double v : x) {
    if (!std::isfinite(v)) throw NumericalError("ClassicRC::step: non-finite input");
  }
  std::vector<double> next(r.begin(), r.end());
  std::vector<double> scratch(state_dim());
  advance(next, x, scratch);
  return next;
}

std::vector<double> generalize_classic(std::span<const double> r, std::span<const FracExponent> library) {
  if (library.empty()) return {r.begin(), r.end()};
  std::vector<double> out(library.size() * r.size());
  for (std::size_t k = 0; k < library.size(); ++k) {
    library_pow(r, library[k], std::span<double>(out).subspan(k * r.size(), r.size()));
  }
  return out;
}

}  // namespace fracrc
