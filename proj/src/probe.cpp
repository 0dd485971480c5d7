#include "fracrc/probe.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <ostream>

#include "fracrc/harness/thread_pool.hpp"
#include "fracrc/reservoir.hpp"
#include "fracrc/surrogates.hpp"

namespace fracrc {

std::vector<FracExponent> eta_grid(int first, int last, int step, int den) {
  if (step <= 0 || last < first) throw ConfigError("eta grid: need first <= last and step > 0");
  std::vector<FracExponent> grid;
  for (int n = first; n <= last; n += step) grid.emplace_back(n, den);
  return grid;
}

void ProbeConfig::validate() const {
  if (eta_grid.empty()) throw ConfigError("probe: empty eta grid");
  for (std::size_t i = 1; i < eta_grid.size(); ++i) {
    if (!(eta_grid[i - 1] < eta_grid[i])) throw ConfigError("probe: eta grid must be strictly increasing");
  }
  if (!(match_tol > 0.0)) throw ConfigError("probe: match_tol must be > 0");
  if (sync_len < 1 || train_len < 1 || predict_len < 2) throw ConfigError("probe: sync/train/predict lengths too small");
  if (surrogates < 2) throw ConfigError("probe: need at least 2 surrogate realizations");
  MinRCConfig m = minrc;
  m.exponents = {eta_grid.front()};
  m.validate();
  correlation.validate();
}

ProbeConfig chaotic_probe_config(std::size_t input_dim) {
  ProbeConfig cfg;
  cfg.minrc = MinRCConfig{input_dim, 3, 0.1, 1e-6, {}};
  cfg.sync_len = 100;
  cfg.train_len = 1000;
  return cfg;
}

ProbeConfig financial_probe_config() {
  ProbeConfig cfg;
  cfg.minrc = MinRCConfig{1, 5, 0.99, 1e-6, {}};
  cfg.sync_len = 500;
  cfg.train_len = 1000;
  return cfg;
}

double probe_measure(const Trajectory& series, const FracExponent& eta, const ProbeConfig& cfg, bool* diverged) {
  if (diverged != nullptr) *diverged = false;
  const std::size_t train_rows = cfg.sync_len + cfg.train_len + 1;
  if (series.size() < train_rows) throw ConfigError("probe: series shorter than sync_len + train_len + 1");
  MinRCConfig mc = cfg.minrc;
  mc.input_dim = series.dim();
  mc.exponents = {eta};
  const MinRC machine(mc);
  try {
    const Readout readout = train(machine, series.slice(0, train_rows), cfg.sync_len);
    const Prediction pred =
        predict(machine, readout, series.slice(train_rows - cfg.sync_len, cfg.sync_len), cfg.predict_len);
    if (pred.diverged) {
      if (diverged != nullptr) *diverged = true;
      return std::nan("");
    }
    return correlation_dimension(pred.trajectory, cfg.correlation);
  } catch (const NumericalError&) {
    return std::nan("");
  }
}

std::optional<FracExponent> select_mu(const std::vector<ProbeRecord>& records) {
  for (const ProbeRecord& r : records) {
    if (r.matches_true && r.outside_band) return r.eta;
  }
  return std::nullopt;
}

ProbeReport probe_smallest_nonlinearity(const Trajectory& series, const ProbeConfig& cfg) {
  cfg.validate();
  if (series.size() < cfg.sync_len + cfg.train_len + 1) {
    throw ConfigError("probe: series shorter than sync_len + train_len + 1");
  }
  ProbeReport report;
  report.cdim_true = correlation_dimension(series, cfg.correlation);

  // One surrogate ensemble shared by every eta.
  const std::size_t m_count = cfg.surrogates;
  std::vector<Trajectory> surrogates(m_count);
  for (std::size_t m = 0; m < m_count; ++m) {
    surrogates[m] = surrogate_trajectory(series, surrogate_seed(derive_seed(cfg.seed, {0x9b0e}), m));
  }

  const std::size_t n_eta = cfg.eta_grid.size();
  const std::size_t per_eta = 1 + m_count;
  std::vector<double> values(n_eta * per_eta, std::nan(""));
  std::vector<char> diverged(n_eta, 0);
  parallel_for(n_eta * per_eta, cfg.jobs, [&](std::size_t item) {
    const std::size_t e = item / per_eta;
    const std::size_t m = item % per_eta;
    if (m == 0) {
      bool div = false;
      values[item] = probe_measure(series, cfg.eta_grid[e], cfg, &div);
      diverged[e] = div ? 1 : 0;
    } else {
      values[item] = probe_measure(surrogates[m - 1], cfg.eta_grid[e], cfg);
    }
  });

  for (std::size_t e = 0; e < n_eta; ++e) {
    ProbeRecord rec;
    rec.eta = cfg.eta_grid[e];
    rec.cdim_pred = values[e * per_eta];
    rec.diverged = diverged[e] != 0;
    const std::span<const double> bg_values(values.data() + e * per_eta + 1, m_count);
    bool band_defined = true;
    try {
      const SurrogateBackground bg = summarize_background(bg_values);
      rec.surrogate_mean = bg.mean;
      rec.surrogate_std = bg.std;
      rec.surrogate_failures = bg.failed.size();
    } catch (const NumericalError&) {
      band_defined = false;
      rec.surrogate_mean = std::nan("");
      rec.surrogate_std = std::nan("");
      rec.surrogate_failures = static_cast<std::size_t>(
          std::count_if(bg_values.begin(), bg_values.end(), [](double v) { return !std::isfinite(v); }));
    }
    const bool computable = std::isfinite(rec.cdim_pred);
    rec.matches_true = computable && std::fabs(rec.cdim_pred - report.cdim_true) <= cfg.match_tol;
    // Without a band the surrogates have no computable dimension at all,
    // which a computable prediction stands out from.
    rec.outside_band = computable && (!band_defined || !(std::fabs(rec.cdim_pred - rec.surrogate_mean) <= rec.surrogate_std));
    report.records.push_back(rec);
  }
  report.mu_recon = select_mu(report.records);
  return report;
}

void write_probe_csv(std::ostream& os, const ProbeReport& report) {
  os << "eta_num,eta_den,cdim_pred,sur_mean,sur_std,outside,match\n";
  for (const ProbeRecord& r : report.records) {
    os << r.eta.numerator() << ',' << r.eta.denominator() << ',' << format_double(r.cdim_pred) << ','
       << format_double(r.surrogate_mean) << ',' << format_double(r.surrogate_std) << ',' << (r.outside_band ? 1 : 0)
       << ',' << (r.matches_true ? 1 : 0) << '\n';
  }
}

ReturnsSeries ingest_returns(const std::string& csv_path, const std::string& column) {
  std::ifstream in(csv_path);
  if (!in) throw ConfigError("ingest_returns: cannot open " + csv_path);
  std::string line;
  if (!std::getline(in, line)) throw ConfigError("ingest_returns: empty file " + csv_path);
  if (!line.empty() && line.back() == '\r') line.pop_back();
  const std::vector<std::string> header = split_csv_line(line);
  std::size_t col = header.size();
  for (std::size_t i = 0; i < header.size(); ++i) {
    if (header[i] == column) col = i;
  }
  if (col == header.size()) {
    try {
      const double idx = parse_double(column);
      if (idx >= 0 && idx == std::floor(idx) && idx < static_cast<double>(header.size())) col = static_cast<std::size_t>(idx);
    } catch (const ConfigError&) {
    }
  }
  if (col == header.size()) throw ConfigError("ingest_returns: no column '" + column + "' in " + csv_path);

  std::vector<double> prices;
  ReturnsSeries out;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const std::vector<std::string> fields = split_csv_line(line);
    double p = 0.0;
    bool ok = col < fields.size();
    if (ok) {
      try {
        p = parse_double(fields[col]);
        ok = std::isfinite(p) && p != 0.0;
      } catch (const ConfigError&) {
        ok = false;
      }
    }
    if (ok) {
      prices.push_back(p);
    } else {
      ++out.dropped_rows;
    }
  }
  if (prices.empty()) throw ConfigError("ingest_returns: column '" + column + "' holds no numeric prices");
  if (prices.size() < 3) throw ConfigError("ingest_returns: need at least 3 prices");
  std::vector<double> r(prices.size() - 1);
  for (std::size_t t = 1; t < prices.size(); ++t) r[t - 1] = (prices[t] - prices[t - 1]) / prices[t - 1];
  out.returns = Trajectory(std::move(r), 1, 1.0);
  return out;
}

}  // namespace fracrc
