#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "fracrc/core.hpp"
#include "fracrc/metrics.hpp"
#include "fracrc/minimal_rc.hpp"
#include "fracrc/trajectory.hpp"

namespace fracrc {

/// Exponents first/den, (first+step)/den, ..., last/den.
std::vector<FracExponent> eta_grid(int first = 52, int last = 280, int step = 2, int den = 50);

struct ProbeConfig {
  std::vector<FracExponent> eta_grid = fracrc::eta_grid();
  /// Template; its exponent list is replaced by the single swept eta.
  MinRCConfig minrc{3, 3, 0.1, 1e-6, {}};
  std::size_t sync_len = 100;
  std::size_t train_len = 1000;
  std::size_t predict_len = 5000;
  std::size_t surrogates = 20;
  double match_tol = 0.15;
  std::uint64_t seed = 0;
  std::size_t jobs = 1;
  CorrelationDimensionConfig correlation;

  void validate() const;
};

/// b=3, rho*=0.1, 100 sync, 1000 train.
ProbeConfig chaotic_probe_config(std::size_t input_dim = 3);
/// b=5, rho*=0.99, 500 sync, univariate.
ProbeConfig financial_probe_config();

struct ProbeRecord {
  FracExponent eta = FracExponent::linear();
  double cdim_pred = 0.0;  // NaN if the prediction diverged or had no computable dimension
  bool diverged = false;
  double surrogate_mean = 0.0;  // NaN if the background could not be formed
  double surrogate_std = 0.0;
  std::size_t surrogate_failures = 0;
  bool outside_band = false;
  bool matches_true = false;
};

struct ProbeReport {
  double cdim_true = 0.0;
  std::vector<ProbeRecord> records;
  std::optional<FracExponent> mu_recon;
  bool found() const { return mu_recon.has_value(); }
};

/// Train the reduced minimal RC with exponent eta on the first
/// sync_len + train_len + 1 rows, synchronize on the last sync_len of those,
/// predict predict_len steps and return the prediction's correlation
/// dimension. NaN when the prediction diverges or has no computable dimension.
double probe_measure(const Trajectory& series, const FracExponent& eta, const ProbeConfig& cfg,
                     bool* diverged = nullptr);

ProbeReport probe_smallest_nonlinearity(const Trajectory& series, const ProbeConfig& cfg);

/// First grid record that matches the true dimension and lies outside the
/// surrogate band.
std::optional<FracExponent> select_mu(const std::vector<ProbeRecord>& records);

/// Header `eta_num,eta_den,cdim_pred,sur_mean,sur_std,outside,match`.
void write_probe_csv(std::ostream& os, const ProbeReport& report);

struct ReturnsSeries {
  Trajectory returns;
  std::size_t dropped_rows = 0;
};

/// Daily returns (p_t - p_{t-1}) / p_{t-1} of a price column (by header name
/// or 0-based index) as a univariate trajectory with dt = 1. Rows whose price
/// is missing or unparseable are dropped and counted.
ReturnsSeries ingest_returns(const std::string& csv_path, const std::string& column);

}  // namespace fracrc
