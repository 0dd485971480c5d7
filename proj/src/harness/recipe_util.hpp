#pragma once

#include <cmath>
#include <mutex>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "fracrc/harness/recipes.hpp"
#include "fracrc/harness/results_table.hpp"

namespace fracrc::recipe_detail {

inline double nan() { return std::nan(""); }

/// Progress output serialized across workers.
class Log {
 public:
  explicit Log(std::ostream* os) : os_(os) {}
  template <class... A>
  void operator()(const A&... parts) {
    if (os_ == nullptr) return;
    std::lock_guard lock(m_);
    ((*os_) << ... << parts) << '\n';
    os_->flush();
  }

 private:
  std::ostream* os_;
  std::mutex m_;
};

/// CSV-safe free text.
inline std::string clean(std::string s) {
  for (char& c : s) {
    if (c == ',' || c == '\n' || c == '\r' || c == '"') c = ';';
  }
  return s;
}

std::string join(const std::string& dir, const std::string& file);

/// Starts a run: checks a resumed run's manifest, then writes a fresh one
/// marked "running".
void begin_run(const std::string& recipe, const Json& config, const RunOptions& opt);
void end_run(const std::string& recipe, const Json& config, const RunOptions& opt, RunSummary& summary);

struct CellResult {
  /// No forecast could be scored (training failed).
  bool diverged = false;
  std::string reason;
  /// Step at which the closed-loop prediction left bounds; the forecast
  /// horizon is then scored on the finite prefix and climate is not computed.
  std::optional<std::size_t> blowup;
  ForecastHorizon fh;
  double lyap_pred = nan();
  double cdim_pred = nan();
  bool success = false;
};

/// True when every coordinate's spread is within a hundred times the
/// integrator's own error at that magnitude: the flow has settled on a fixed
/// point and what is left is solver noise.
bool settled(const Trajectory& t, const IntegratorConfig& integ);

/// Rows a sweep segment needs: sync + train + 1 + predict.
std::size_t segment_rows(const SweepModel& m);

/// Train the minimal RC with the single exponent `eta` on a segment, predict
/// the held-out tail and score it.
CellResult evaluate_minrc(const Trajectory& segment, const FracExponent& eta, double spectral_radius,
                          const SweepModel& m, double lyap_true, double cdim_true);

/// NaN instead of an exception for metrics on data that may be degenerate.
double safe_lyapunov(const Trajectory& t, const RosensteinConfig& cfg);
double safe_cdim(const Trajectory& t, const CorrelationDimensionConfig& cfg);

Json to_json(const SweepModel& m);
SweepModel sweep_model_from_json(const Json& j, SweepModel base);

double median(std::vector<double> v);

}  // namespace fracrc::recipe_detail
