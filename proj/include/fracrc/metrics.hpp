#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "fracrc/trajectory.hpp"

namespace fracrc {

struct ForecastHorizon {
  std::size_t steps = 0;
  /// steps * dt * lambda; NaN when lambda <= 0.
  double lyapunov_times = 0.0;
};

/// Number of leading steps for which every coordinate of `pred` stays
/// strictly within one standard deviation (of `truth`) of `truth`. The
/// prediction may be shorter than the truth (a diverged run).
ForecastHorizon forecast_horizon(const Trajectory& truth, const Trajectory& pred, double lambda);

struct RosensteinConfig {
  // The mean period is the reciprocal of the power-weighted mean frequency
  // of coordinate 1.
  std::size_t theiler_window = 0;  // 0: one mean period
  double follow_periods = 3.0;
  std::size_t follow_steps = 0;  // 0: follow_periods mean periods
  // The line is fitted to [skip, skip + fit) of the divergence curve, both
  // given as fractions of the follow horizon. Skipping the first quarter
  // period drops the fast alignment onto the unstable direction.
  double fit_fraction = 1.0 / 3.0;
  double skip_fraction = 1.0 / 12.0;
  // Delay embedding, used only for univariate input.
  std::size_t embedding_dim = 3;
  std::size_t embedding_lag = 0;  // 0: a quarter period
  std::size_t min_pairs = 10;

  void validate() const;
};

/// Largest Lyapunov exponent in inverse time units.
double lyapunov_rosenstein(const Trajectory& traj, const RosensteinConfig& cfg = {});

/// Mean divergence curve <ln d(k)> used by lyapunov_rosenstein, exposed for tests and plots.
struct DivergenceCurve {
  std::vector<double> mean_log_distance;
  std::size_t theiler_window = 0;
  std::size_t fit_begin = 0;
  std::size_t fit_end = 0;
  std::size_t pairs = 0;
};
DivergenceCurve rosenstein_curve(const Trajectory& traj, const RosensteinConfig& cfg = {});

/// True if every coordinate's standard deviation is at most rel_tol times
/// max(1, max |x|): the run has settled on a fixed point.
bool collapsed(const Trajectory& traj, double rel_tol = 1e-8);

/// Mean period in samples: the reciprocal of the power-weighted mean
/// frequency of coordinate 1.
std::size_t mean_period(const Trajectory& traj);

struct CorrelationDimensionConfig {
  static constexpr std::size_t kAutoWindow = static_cast<std::size_t>(-1);

  std::size_t radii = 24;
  /// Pairs at most this many samples apart are left out of the correlation
  /// sum; kAutoWindow means one mean period.
  std::size_t theiler_window = kAutoWindow;
  double low_percentile = 1.0;
  double high_percentile = 5.0;
  std::size_t percentile_sample = 1000;
  std::size_t max_points = 20000;
  std::size_t min_points = 100;
  std::size_t leaf_size = 32;

  void validate() const;
};

struct CorrelationSum {
  std::vector<double> radii;
  std::vector<std::uint64_t> pairs;
  std::size_t points = 0;
  /// Pairs eligible for counting once the Theiler window is applied.
  std::uint64_t total_pairs = 0;
  std::size_t theiler_window = 0;
  std::size_t fit_begin = 0;
  std::size_t fit_end = 0;
};

/// Radius grid and exact pair counts on the (sub-sampled) point set.
CorrelationSum correlation_sum(const Trajectory& traj, const CorrelationDimensionConfig& cfg = {});

/// Slope of log C(r) against log r over the central half of the radius grid.
double correlation_dimension(const Trajectory& traj, const CorrelationDimensionConfig& cfg = {});

/// Least-squares slope of y against x.
double fit_slope(const std::vector<double>& x, const std::vector<double>& y);

struct ClimateConfig {
  RosensteinConfig lyapunov;
  CorrelationDimensionConfig correlation;
  double tolerance = 0.1;
};

struct ClimateReport {
  double lyapunov_true = 0.0;
  double lyapunov_pred = 0.0;
  double correlation_dim_true = 0.0;
  double correlation_dim_pred = 0.0;
  bool success = false;
};

ClimateReport climate_check(const Trajectory& truth, const Trajectory& pred, const ClimateConfig& cfg = {});

}  // namespace fracrc
