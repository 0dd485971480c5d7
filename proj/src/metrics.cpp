#include "fracrc/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "fracrc/core.hpp"
#include "fracrc/fft.hpp"
#include "fracrc/kdtree.hpp"

namespace fracrc {

ForecastHorizon forecast_horizon(const Trajectory& truth, const Trajectory& pred, double lambda) {
  if (truth.dim() != pred.dim()) throw ConfigError("forecast_horizon: dimension mismatch");
  if (!pred.empty() && truth.dt() != pred.dt()) throw ConfigError("forecast_horizon: dt mismatch");
  const std::vector<double> delta = column_std(truth);
  const std::size_t n = std::min(truth.size(), pred.size());
  std::size_t v = 0;
  for (; v < n; ++v) {
    bool inside = true;
    for (std::size_t c = 0; c < truth.dim() && inside; ++c) inside = std::fabs(truth(v, c) - pred(v, c)) < delta[c];
    if (!inside) break;
  }
  ForecastHorizon fh;
  fh.steps = v;
  fh.lyapunov_times = lambda > 0.0 ? static_cast<double>(v) * truth.dt() * lambda
                                   : std::numeric_limits<double>::quiet_NaN();
  return fh;
}

double fit_slope(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2) throw ConfigError("fit_slope: need at least two paired samples");
  const auto n = static_cast<double>(x.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
  }
  if (!(sxx > 0.0)) throw NumericalError("fit_slope: abscissae are all equal");
  return sxy / sxx;
}

// ---------------------------------------------------------------- Rosenstein

void RosensteinConfig::validate() const {
  if (!(follow_periods > 0.0) || !std::isfinite(follow_periods)) throw ConfigError("rosenstein: follow_periods must be > 0");
  if (!(fit_fraction > 0.0 && fit_fraction <= 1.0)) throw ConfigError("rosenstein: fit_fraction must lie in (0, 1]");
  if (!(skip_fraction >= 0.0 && skip_fraction + fit_fraction <= 1.0)) {
    throw ConfigError("rosenstein: skip_fraction must be >= 0 with skip_fraction + fit_fraction <= 1");
  }
  if (embedding_dim < 1) throw ConfigError("rosenstein: embedding_dim must be >= 1");
  if (min_pairs < 1) throw ConfigError("rosenstein: min_pairs must be >= 1");
}

std::size_t mean_period(const Trajectory& traj) {
  const std::vector<double> x = traj.column(0);
  const double bin = fft::mean_frequency_bin(x);
  if (!(bin > 0.0)) throw NumericalError("rosenstein: series has no oscillatory component");
  return std::max<std::size_t>(1, static_cast<std::size_t>(std::lround(static_cast<double>(x.size()) / bin)));
}

namespace {

// Row-major points: full state for multivariate input, delay vectors otherwise.
std::vector<double> embed(const Trajectory& traj, std::size_t period, const RosensteinConfig& cfg, std::size_t& dim) {
  if (traj.dim() > 1) {
    dim = traj.dim();
    return {traj.values().begin(), traj.values().end()};
  }
  const std::size_t lag = cfg.embedding_lag > 0 ? cfg.embedding_lag : std::max<std::size_t>(1, period / 4);
  const std::size_t span = (cfg.embedding_dim - 1) * lag;
  if (traj.size() <= span) throw ConfigError("rosenstein: series too short for the delay embedding");
  const std::size_t m = traj.size() - span;
  dim = cfg.embedding_dim;
  std::vector<double> pts(m * dim);
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t e = 0; e < dim; ++e) pts[i * dim + e] = traj(i + e * lag, 0);
  }
  return pts;
}

}  // namespace

bool collapsed(const Trajectory& traj, double rel_tol) {
  double scale = 1.0;
  for (double v : traj.values()) scale = std::max(scale, std::fabs(v));
  for (double sd : column_std(traj)) {
    if (sd > rel_tol * scale) return false;
  }
  return true;
}

DivergenceCurve rosenstein_curve(const Trajectory& traj, const RosensteinConfig& cfg) {
  cfg.validate();
  if (traj.size() < 16) throw ConfigError("rosenstein: trajectory too short");
  if (collapsed(traj)) throw NumericalError("rosenstein: trajectory has collapsed onto a fixed point");
  const std::size_t period = mean_period(traj);
  std::size_t dim = 0;
  const std::vector<double> pts = embed(traj, period, cfg, dim);
  const std::size_t m = pts.size() / dim;

  DivergenceCurve curve;
  curve.theiler_window = cfg.theiler_window > 0 ? cfg.theiler_window : period;
  const std::size_t follow =
      cfg.follow_steps > 0
          ? cfg.follow_steps
          : std::max<std::size_t>(2, static_cast<std::size_t>(std::lround(cfg.follow_periods * period)));
  if (m <= follow + curve.theiler_window + 1) {
    throw ConfigError("rosenstein: trajectory too short for the follow horizon and Theiler window");
  }
  const auto frac = [&](double f) {
    return static_cast<std::size_t>(std::lround(f * static_cast<double>(follow)));
  };
  curve.fit_begin = std::min(frac(cfg.skip_fraction), follow - 2);
  curve.fit_end = std::clamp(curve.fit_begin + frac(cfg.fit_fraction), curve.fit_begin + 2, follow);

  // Reference points need `follow` successors, so only they enter the tree.
  const std::size_t usable = m - follow;
  const KdTree tree(std::span<const double>(pts.data(), usable * dim), dim);
  std::vector<double> sum(follow, 0.0);
  std::vector<std::size_t> count(follow, 0);
  for (std::size_t i = 0; i < usable; ++i) {
    const auto nb = tree.nearest_outside_window({pts.data() + i * dim, dim}, i, curve.theiler_window);
    if (!nb.found) continue;
    ++curve.pairs;
    for (std::size_t k = 0; k < follow; ++k) {
      const double* a = pts.data() + (i + k) * dim;
      const double* b = pts.data() + (nb.index + k) * dim;
      double d2 = 0.0;
      for (std::size_t c = 0; c < dim; ++c) d2 += (a[c] - b[c]) * (a[c] - b[c]);
      if (d2 > 0.0) {
        sum[k] += 0.5 * std::log(d2);
        ++count[k];
      }
    }
  }
  if (curve.pairs < cfg.min_pairs) {
    throw NumericalError("rosenstein: only " + std::to_string(curve.pairs) + " valid neighbour pairs");
  }
  curve.mean_log_distance.resize(follow);
  for (std::size_t k = 0; k < follow; ++k) {
    curve.mean_log_distance[k] =
        count[k] > 0 ? sum[k] / static_cast<double>(count[k]) : std::numeric_limits<double>::quiet_NaN();
  }
  return curve;
}

double lyapunov_rosenstein(const Trajectory& traj, const RosensteinConfig& cfg) {
  const DivergenceCurve curve = rosenstein_curve(traj, cfg);
  std::vector<double> x, y;
  for (std::size_t k = curve.fit_begin; k < curve.fit_end; ++k) {
    if (!std::isfinite(curve.mean_log_distance[k])) continue;
    x.push_back(static_cast<double>(k));
    y.push_back(curve.mean_log_distance[k]);
  }
  if (x.size() < 2) throw NumericalError("rosenstein: divergence curve has too few finite points");
  return fit_slope(x, y) / traj.dt();
}

// ------------------------------------------------------ correlation dimension

void CorrelationDimensionConfig::validate() const {
  if (radii < 4) throw ConfigError("correlation dimension: need at least 4 radii");
  if (!(low_percentile > 0.0 && low_percentile < high_percentile && high_percentile <= 100.0)) {
    throw ConfigError("correlation dimension: percentiles must satisfy 0 < low < high <= 100");
  }
  if (percentile_sample < 2) throw ConfigError("correlation dimension: percentile_sample must be >= 2");
  if (max_points < 2 || min_points < 2) throw ConfigError("correlation dimension: point limits must be >= 2");
}

namespace {

std::vector<std::size_t> strided(std::size_t n, std::size_t cap) {
  const std::size_t m = std::min(n, cap);
  std::vector<std::size_t> idx(m);
  for (std::size_t k = 0; k < m; ++k) idx[k] = static_cast<std::size_t>((static_cast<unsigned __int128>(k) * n) / m);
  return idx;
}

}  // namespace

CorrelationSum correlation_sum(const Trajectory& traj, const CorrelationDimensionConfig& cfg) {
  cfg.validate();
  if (traj.size() < cfg.min_points) {
    throw ConfigError("correlation dimension: need at least " + std::to_string(cfg.min_points) + " points");
  }
  if (collapsed(traj)) throw NumericalError("correlation dimension: trajectory has collapsed onto a fixed point");
  const std::size_t dim = traj.dim();

  // Percentile-based radius range from a small strided sample.
  const std::vector<std::size_t> ps = strided(traj.size(), cfg.percentile_sample);
  std::vector<double> dists;
  dists.reserve(ps.size() * (ps.size() - 1) / 2);
  for (std::size_t a = 0; a < ps.size(); ++a) {
    for (std::size_t b = a + 1; b < ps.size(); ++b) {
      double d2 = 0.0;
      for (std::size_t c = 0; c < dim; ++c) {
        const double d = traj(ps[a], c) - traj(ps[b], c);
        d2 += d * d;
      }
      dists.push_back(std::sqrt(d2));
    }
  }
  std::sort(dists.begin(), dists.end());
  const auto pct = [&](double p) {
    const auto i = static_cast<std::size_t>(std::floor(p / 100.0 * static_cast<double>(dists.size() - 1)));
    return dists[i];
  };
  const double r_hi = pct(cfg.high_percentile);
  if (!(r_hi > 0.0)) throw NumericalError("correlation dimension: degenerate point set (all points coincide)");
  double r_lo = pct(cfg.low_percentile);
  if (!(r_lo > 0.0)) r_lo = *std::upper_bound(dists.begin(), dists.end(), 0.0);
  if (!(r_lo < r_hi)) throw NumericalError("correlation dimension: degenerate radius range");

  CorrelationSum cs;
  cs.radii.resize(cfg.radii);
  const double llo = std::log(r_lo), lhi = std::log(r_hi);
  for (std::size_t k = 0; k < cfg.radii; ++k) {
    cs.radii[k] = std::exp(llo + (lhi - llo) * static_cast<double>(k) / static_cast<double>(cfg.radii - 1));
  }
  for (std::size_t k = 1; k < cfg.radii; ++k) cs.radii[k] = std::max(cs.radii[k], std::nextafter(cs.radii[k - 1], 1e308));

  const std::vector<std::size_t> idx = strided(traj.size(), cfg.max_points);
  std::vector<double> pts(idx.size() * dim);
  for (std::size_t i = 0; i < idx.size(); ++i) {
    for (std::size_t c = 0; c < dim; ++c) pts[i * dim + c] = traj(idx[i], c);
  }
  const KdTree tree(pts, dim, cfg.leaf_size);
  cs.pairs = tree.pair_counts(cs.radii);
  cs.points = idx.size();
  const std::uint64_t n = idx.size();
  cs.total_pairs = n * (n - 1) / 2;

  // Remove temporally close pairs. The distance is formed exactly as in the
  // tree's kernel so the subtraction cancels the same pairs it counted.
  cs.theiler_window = cfg.theiler_window == CorrelationDimensionConfig::kAutoWindow ? mean_period(traj)
                                                                                     : cfg.theiler_window;
  if (cs.theiler_window > 0) {
    std::vector<double> r2(cs.radii.size());
    for (std::size_t k = 0; k < r2.size(); ++k) r2[k] = cs.radii[k] * cs.radii[k];
    std::vector<std::uint64_t> first_bin(r2.size() + 1, 0);
    for (std::size_t i = 0; i < idx.size(); ++i) {
      for (std::size_t j = i + 1; j < idx.size() && idx[j] - idx[i] <= cs.theiler_window; ++j) {
        double acc = 0.0;
        for (std::size_t c = 0; c < dim; ++c) {
          const double d = pts[i * dim + c] - pts[j * dim + c];
          acc = (c == 0) ? d * d : acc + d * d;
        }
        ++first_bin[static_cast<std::size_t>(std::upper_bound(r2.begin(), r2.end(), acc) - r2.begin())];
        --cs.total_pairs;
      }
    }
    std::uint64_t running = 0;
    for (std::size_t k = 0; k < r2.size(); ++k) {
      running += first_bin[k];
      cs.pairs[k] -= running;
    }
  }
  if (cs.total_pairs == 0) throw NumericalError("correlation dimension: Theiler window leaves no pairs");
  cs.fit_begin = cfg.radii / 4;
  cs.fit_end = cfg.radii - cfg.radii / 4;
  return cs;
}

double correlation_dimension(const Trajectory& traj, const CorrelationDimensionConfig& cfg) {
  const CorrelationSum cs = correlation_sum(traj, cfg);
  const auto total = static_cast<double>(cs.total_pairs);
  std::vector<double> x, y;
  for (std::size_t k = cs.fit_begin; k < cs.fit_end; ++k) {
    if (cs.pairs[k] == 0) continue;
    x.push_back(std::log(cs.radii[k]));
    y.push_back(std::log(static_cast<double>(cs.pairs[k]) / total));
  }
  if (x.size() < 2) throw NumericalError("correlation dimension: scaling region holds too few non-empty radii");
  return fit_slope(x, y);
}

ClimateReport climate_check(const Trajectory& truth, const Trajectory& pred, const ClimateConfig& cfg) {
  if (!(cfg.tolerance > 0.0)) throw ConfigError("climate_check: tolerance must be > 0");
  ClimateReport rep;
  rep.lyapunov_true = lyapunov_rosenstein(truth, cfg.lyapunov);
  rep.lyapunov_pred = lyapunov_rosenstein(pred, cfg.lyapunov);
  rep.correlation_dim_true = correlation_dimension(truth, cfg.correlation);
  rep.correlation_dim_pred = correlation_dimension(pred, cfg.correlation);
  rep.success = std::fabs(rep.lyapunov_pred - rep.lyapunov_true) <= cfg.tolerance &&
                std::fabs(rep.correlation_dim_pred - rep.correlation_dim_true) <= cfg.tolerance;
  return rep;
}

}  // namespace fracrc
