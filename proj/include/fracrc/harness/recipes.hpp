#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "fracrc/classic_rc.hpp"
#include "fracrc/dynamics.hpp"
#include "fracrc/metrics.hpp"
#include "fracrc/minimal_rc.hpp"
#include "fracrc/probe.hpp"
#include "fracrc/serialization.hpp"

namespace fracrc {

struct RunOptions {
  std::string out_dir = ".";
  std::uint64_t seed = 0;
  std::size_t jobs = 1;
  bool resume = false;
  std::ostream* log = nullptr;  // progress messages; null for silence
};

struct RunSummary {
  std::size_t cells = 0;
  std::size_t skipped = 0;  // already present when resuming
  std::size_t failed = 0;   // cells that raised an error other than divergence
  bool partial = false;
  std::vector<std::string> warnings;
  std::vector<std::string> outputs;
};

// Every recipe config reads from JSON (unknown keys rejected, absent keys keep
// their defaults) and writes its fully resolved form back, which is what the
// manifest hashes.

struct GenerateConfig {
  SystemSpec system = Lorenz{};
  IntegratorConfig integrator;
  std::size_t n_steps = 10000;
  std::size_t transient = 10000;
};
GenerateConfig generate_config_from_json(const Json& j);
Json to_json(const GenerateConfig& cfg);
RunSummary run_generate(const GenerateConfig& cfg, const RunOptions& opt);

/// Largest Lyapunov exponent over (a, xi) for the Halvorsen flow with
/// xi1 = xi2 = xi3.
struct LyapGridConfig {
  std::vector<double> a_values{1.0, 1.5, 2.0, 2.5, 3.0, 3.5, 3.98};
  std::vector<FracExponent> xi = eta_grid(100, 280, 20);
  std::size_t n_steps = 50000;
  std::size_t transient = 10000;
  IntegratorConfig integrator;
  RosensteinConfig lyapunov;
};
LyapGridConfig lyap_grid_config_from_json(const Json& j);
Json to_json(const LyapGridConfig& cfg);
RunSummary run_lyap_grid(const LyapGridConfig& cfg, const RunOptions& opt);

/// Settings shared by the minimal-RC sweeps.
struct SweepModel {
  /// Template; the exponent list is replaced by the swept eta.
  MinRCConfig minrc{3, 3, 1e-3, 1e-6, {}};
  std::vector<FracExponent> eta = eta_grid(52, 280, 2);
  std::size_t sync_len = 1000;
  std::size_t train_len = 5000;
  std::size_t predict_len = 5000;
  /// Compute lyap_pred, cdim_pred and the climate success flag.
  bool climate = true;
  ClimateConfig climate_cfg;
  IntegratorConfig integrator;
  std::size_t transient = 10000;
};

struct EtaSweepConfig {
  /// Lorenz or fractional Halvorsen. For Halvorsen, every entry of `xi`
  /// gives one data stratum with xi1 = xi2 = xi3.
  SystemSpec system = FractionalHalvorsen{3.98, FracExponent(132), FracExponent(132), FracExponent(132)};
  std::vector<FracExponent> xi = eta_grid(132, 276, 12);
  std::vector<double> spectral_radii{1e-3};
  /// When positive, each stratum sweeps its own grid xi +- eta_window
  /// numerator steps of eta_step (clipped to eta > 1); otherwise model.eta.
  int eta_window = 12;
  int eta_step = 2;
  std::size_t repetitions = 5;
  /// Halvorsen starts from a fixed point, so repetitions use segments at
  /// random offsets in [0, offset_range) along one long trajectory. Lorenz
  /// repetitions draw fresh initial conditions instead.
  std::size_t offset_range = 20000;
  /// Length of the trajectory the reference Lyapunov exponent is taken from.
  std::size_t reference_len = 20000;
  SweepModel model;
};
EtaSweepConfig eta_sweep_config_from_json(const Json& j);
Json to_json(const EtaSweepConfig& cfg);
RunSummary run_eta_sweep(const EtaSweepConfig& cfg, const RunOptions& opt);

/// Per (xi, rho, eta): mean forecast horizon (diverged cells count as 0),
/// its value normalized against the stratum's peak, success rate and the
/// median correlation-dimension error. Reads and writes CSV tables.
void summarize_eta_sweep(const std::string& results_csv, const std::string& summary_csv);

/// Random Halvorsen exponents with two (xi1 = xi2 != xi3) or three
/// independent values, rejection-sampled until the flow is chaotic.
struct MultiExponentConfig {
  std::size_t exponents = 2;  // 2 or 3 distinct draws
  double a = 3.98;
  int numerator_min = 54;
  int numerator_max = 280;
  int denominator = 50;
  std::size_t trajectories = 5;
  /// Total draws allowed, as a multiple of `trajectories`.
  double budget_factor = 10.0;
  /// A draw is accepted if it does not diverge and its Lyapunov exponent
  /// exceeds this.
  double min_lyapunov = 0.02;
  std::size_t reference_len = 20000;
  /// Width of the relative-axis bins in the summary table.
  double p_bin = 0.25;
  SweepModel model = coarse_model();

  static SweepModel coarse_model() {
    SweepModel m;
    m.eta = eta_grid(52, 280, 8);
    return m;
  }
};
MultiExponentConfig multi_exponent_config_from_json(const Json& j, std::size_t exponents);
Json to_json(const MultiExponentConfig& cfg);
RunSummary run_multi_exponent(const MultiExponentConfig& cfg, const RunOptions& opt);

/// Relative position of eta between the smallest and largest data
/// exponent; NaN when they coincide.
double relative_position(double eta, double xi_s, double xi_l);

struct ProbeSource {
  enum class Kind { System, Trajectory, Returns };
  Kind kind = Kind::System;
  SystemSpec system = Lorenz{};
  IntegratorConfig integrator;
  std::size_t n_steps = 20000;
  std::size_t transient = 10000;
  std::string path;    // Trajectory: write_csv format; Returns: price table
  std::string column;  // Returns: price column
};

struct ProbeRecipeConfig {
  ProbeSource source;
  ProbeConfig probe;
};
ProbeRecipeConfig probe_recipe_config_from_json(const Json& j);
Json to_json(const ProbeRecipeConfig& cfg);
RunSummary run_probe(const ProbeRecipeConfig& cfg, const RunOptions& opt);

/// Loads or integrates the series a probe run works on.
Trajectory load_probe_source(const ProbeSource& source, std::uint64_t seed, std::size_t* dropped_rows = nullptr);

struct LibraryArm {
  std::string name;
  std::size_t reservoir_dim = 100;
  std::vector<FracExponent> library;  // empty: plain state
};

struct LibraryCompareConfig {
  SystemSpec system = Lorenz{};
  IntegratorConfig integrator;
  std::size_t transient = 10000;
  std::size_t repetitions = 100;
  std::size_t sync_len = 1000;
  std::size_t train_len = 4000;
  std::size_t predict_len = 3000;
  /// Shared settings; reservoir_dim, library and seed are set per arm and run.
  ClassicRCConfig classic = default_classic();
  std::vector<LibraryArm> arms{{"plain_small", 100, {}},
                               {"fractional_small", 100, default_fractional_library(3)},
                               {"plain_large", 1100, {}}};
  /// Scale input to unit variance (training statistics) before it enters the reservoir.
  bool standardize = false;
  std::size_t reference_len = 20000;
  RosensteinConfig lyapunov;

  /// rho* = 0.2, beta = 1e-4, W_in uniform on [-0.2, 0.2] for raw Lorenz input.
  static ClassicRCConfig default_classic() {
    ClassicRCConfig c;
    c.input_scale = 0.2;
    return c;
  }
};
LibraryCompareConfig library_compare_config_from_json(const Json& j);
Json to_json(const LibraryCompareConfig& cfg);
RunSummary run_library_compare(const LibraryCompareConfig& cfg, const RunOptions& opt);

struct ArmStats {
  std::string name;
  std::size_t runs = 0;
  std::size_t diverged = 0;
  double mean = 0.0;
  double std = 0.0;  // sample std
  double sem = 0.0;  // std / sqrt(runs)
};
/// Per-arm forecast-horizon statistics of a library-compare result table.
std::vector<ArmStats> summarize_library_compare(const std::string& results_csv);

struct FwhmConfig {
  std::string input;  // a sweep summary table
  double level = 0.75;
  std::string column = "fh_norm";
};
FwhmConfig fwhm_config_from_json(const Json& j);
Json to_json(const FwhmConfig& cfg);
RunSummary run_fwhm(const FwhmConfig& cfg, const RunOptions& opt);

struct FwhmInterval {
  double peak = 0.0;
  double lo = 0.0;
  double hi = 0.0;
  bool lo_open = false;  // the curve is still above level at the grid edge
  bool hi_open = false;
  bool empty = false;  // never reaches level
};
/// Interval around the first maximum where the piecewise-linear curve
/// (x strictly increasing) stays at or above `level`.
FwhmInterval level_interval(const std::vector<double>& x, const std::vector<double>& y, double level);

}  // namespace fracrc
