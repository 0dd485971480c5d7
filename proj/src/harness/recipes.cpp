#include "fracrc/harness/recipes.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>

#include "fracrc/harness/results_table.hpp"
#include "fracrc/harness/thread_pool.hpp"
#include "fracrc/reservoir.hpp"
#include "recipe_util.hpp"

namespace fracrc {

namespace fs = std::filesystem;
using json_detail::check_keys;
using json_detail::read;
using namespace recipe_detail;

namespace recipe_detail {

std::string join(const std::string& dir, const std::string& file) { return (fs::path(dir) / file).string(); }

void begin_run(const std::string& recipe, const Json& config, const RunOptions& opt) {
  if (opt.resume) check_resume_manifest(opt.out_dir, config, opt.seed);
  write_manifest(opt.out_dir, recipe, config, opt.seed, Json{{"state", "running"}});
}

void end_run(const std::string& recipe, const Json& config, const RunOptions& opt, RunSummary& summary) {
  if (summary.failed > 0) summary.partial = true;
  Json outputs = Json::array();
  for (const auto& o : summary.outputs) outputs.push_back(fs::path(o).filename().string());
  write_manifest(opt.out_dir, recipe, config, opt.seed,
                 Json{{"state", summary.partial ? "partial" : "complete"},
                      {"cells", summary.cells},
                      {"failed", summary.failed},
                      {"warnings", summary.warnings},
                      {"outputs", outputs}});
}

bool settled(const Trajectory& t, const IntegratorConfig& integ) {
  double scale = 0.0;
  for (double v : t.values()) scale = std::max(scale, std::fabs(v));
  const double noise = 100.0 * (integ.rel_tol * scale + integ.abs_tol);
  for (double sd : column_std(t)) {
    if (sd > noise) return false;
  }
  return true;
}

std::size_t segment_rows(const SweepModel& m) { return m.sync_len + m.train_len + 1 + m.predict_len; }

double safe_lyapunov(const Trajectory& t, const RosensteinConfig& cfg) {
  try {
    return lyapunov_rosenstein(t, cfg);
  } catch (const NumericalError&) {
    return nan();
  }
}

double safe_cdim(const Trajectory& t, const CorrelationDimensionConfig& cfg) {
  try {
    return correlation_dimension(t, cfg);
  } catch (const NumericalError&) {
    return nan();
  }
}

CellResult evaluate_minrc(const Trajectory& segment, const FracExponent& eta, double spectral_radius,
                          const SweepModel& m, double lyap_true, double cdim_true) {
  CellResult out;
  const std::size_t train_rows = m.sync_len + m.train_len + 1;
  MinRCConfig mc = m.minrc;
  mc.input_dim = segment.dim();
  mc.spectral_radius = spectral_radius;
  mc.exponents = {eta};
  const MinRC machine(mc);
  Prediction pred;
  try {
    const Readout readout = train(machine, segment.slice(0, train_rows), m.sync_len);
    pred = predict(machine, readout, segment.slice(train_rows - m.sync_len, m.sync_len), m.predict_len);
  } catch (const NumericalError& e) {
    out.diverged = true;
    out.reason = clean(e.what());
    return out;
  }
  const Trajectory truth = segment.slice(train_rows, m.predict_len);
  out.fh = forecast_horizon(truth, pred.trajectory, lyap_true);
  if (pred.diverged) {
    out.blowup = pred.diverged_at;
    return out;
  }
  if (m.climate) {
    out.lyap_pred = safe_lyapunov(pred.trajectory, m.climate_cfg.lyapunov);
    out.cdim_pred = safe_cdim(pred.trajectory, m.climate_cfg.correlation);
    const double tol = m.climate_cfg.tolerance;
    out.success = std::fabs(out.lyap_pred - lyap_true) <= tol && std::fabs(out.cdim_pred - cdim_true) <= tol;
  }
  return out;
}

Json to_json(const SweepModel& m) {
  return Json{{"minrc", fracrc::to_json(m.minrc)},
              {"eta", exponents_to_json(m.eta)},
              {"sync_len", m.sync_len},
              {"train_len", m.train_len},
              {"predict_len", m.predict_len},
              {"climate", m.climate},
              {"tolerance", m.climate_cfg.tolerance},
              {"lyapunov", fracrc::to_json(m.climate_cfg.lyapunov)},
              {"correlation", fracrc::to_json(m.climate_cfg.correlation)},
              {"integrator", fracrc::to_json(m.integrator)},
              {"transient", m.transient}};
}

SweepModel sweep_model_from_json(const Json& j, SweepModel base) {
  const std::string w = "model";
  check_keys(j,
             {"minrc", "eta", "sync_len", "train_len", "predict_len", "climate", "tolerance", "lyapunov",
              "correlation", "integrator", "transient"},
             w);
  if (j.contains("minrc")) {
    base.minrc = minrc_from_json(j.at("minrc"), base.minrc);
    base.minrc.exponents.clear();
  }
  if (j.contains("eta")) base.eta = grid_from_json(j.at("eta"), "model eta");
  read(j, "sync_len", base.sync_len, w);
  read(j, "train_len", base.train_len, w);
  read(j, "predict_len", base.predict_len, w);
  read(j, "climate", base.climate, w);
  read(j, "tolerance", base.climate_cfg.tolerance, w);
  read(j, "transient", base.transient, w);
  if (j.contains("lyapunov")) base.climate_cfg.lyapunov = rosenstein_from_json(j.at("lyapunov"), base.climate_cfg.lyapunov);
  if (j.contains("correlation")) {
    base.climate_cfg.correlation = correlation_from_json(j.at("correlation"), base.climate_cfg.correlation);
  }
  if (j.contains("integrator")) base.integrator = integrator_from_json(j.at("integrator"), base.integrator);
  if (base.eta.empty()) throw ConfigError("model: empty eta grid");
  if (base.sync_len < 1 || base.train_len < 1 || base.predict_len < 2) {
    throw ConfigError("model: sync_len, train_len must be >= 1 and predict_len >= 2");
  }
  if (!(base.climate_cfg.tolerance > 0.0)) throw ConfigError("model: tolerance must be > 0");
  return base;
}

double median(std::vector<double> v) {
  if (v.empty()) return nan();
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 == 1 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

}  // namespace recipe_detail

// ---------------------------------------------------------------- generate

GenerateConfig generate_config_from_json(const Json& j) {
  const std::string w = "generate config";
  check_keys(j, {"system", "integrator", "n_steps", "transient", "seed"}, w);
  GenerateConfig cfg;
  if (j.contains("system")) cfg.system = system_from_json(j.at("system"));
  if (j.contains("integrator")) cfg.integrator = integrator_from_json(j.at("integrator"));
  read(j, "n_steps", cfg.n_steps, w);
  read(j, "transient", cfg.transient, w);
  if (cfg.n_steps < 1) throw ConfigError(w + ": n_steps must be >= 1");
  return cfg;
}

Json to_json(const GenerateConfig& cfg) {
  return Json{{"system", to_json(cfg.system)},
              {"integrator", to_json(cfg.integrator)},
              {"n_steps", cfg.n_steps},
              {"transient", cfg.transient}};
}

RunSummary run_generate(const GenerateConfig& cfg, const RunOptions& opt) {
  const Json config = to_json(cfg);
  begin_run("generate", config, opt);
  RunSummary summary;
  summary.cells = 1;
  const std::string path = join(opt.out_dir, "trajectory.csv");
  if (opt.resume && fs::exists(path)) {
    summary.skipped = 1;
  } else {
    const IntegrationResult r = generate(cfg.system, opt.seed, cfg.n_steps, cfg.transient, cfg.integrator);
    if (const auto* d = std::get_if<Diverged>(&r)) {
      summary.partial = true;
      summary.warnings.push_back("integration diverged: " + d->message());
    } else {
      write_csv(path + ".tmp", std::get<Trajectory>(r));
      fs::rename(path + ".tmp", path);
    }
  }
  if (fs::exists(path)) summary.outputs.push_back(path);
  end_run("generate", config, opt, summary);
  return summary;
}

// ---------------------------------------------------------------- lyap grid

LyapGridConfig lyap_grid_config_from_json(const Json& j) {
  const std::string w = "lyap-grid config";
  check_keys(j, {"a_values", "xi", "n_steps", "transient", "integrator", "lyapunov", "seed"}, w);
  LyapGridConfig cfg;
  read(j, "a_values", cfg.a_values, w);
  if (j.contains("xi")) cfg.xi = grid_from_json(j.at("xi"), w + " xi");
  read(j, "n_steps", cfg.n_steps, w);
  read(j, "transient", cfg.transient, w);
  if (j.contains("integrator")) cfg.integrator = integrator_from_json(j.at("integrator"));
  if (j.contains("lyapunov")) cfg.lyapunov = rosenstein_from_json(j.at("lyapunov"));
  if (cfg.a_values.empty() || cfg.xi.empty()) throw ConfigError(w + ": empty grid");
  for (double a : cfg.a_values) {
    if (!std::isfinite(a)) throw ConfigError(w + ": a values must be finite");
  }
  for (const auto& x : cfg.xi) {
    if (x.value() < 1.0) throw ConfigError(w + ": xi must be >= 1");
  }
  if (cfg.n_steps <= cfg.transient) throw ConfigError(w + ": n_steps must exceed transient");
  return cfg;
}

Json to_json(const LyapGridConfig& cfg) {
  return Json{{"a_values", cfg.a_values},          {"xi", exponents_to_json(cfg.xi)},
              {"n_steps", cfg.n_steps},            {"transient", cfg.transient},
              {"integrator", to_json(cfg.integrator)}, {"lyapunov", to_json(cfg.lyapunov)}};
}

RunSummary run_lyap_grid(const LyapGridConfig& cfg, const RunOptions& opt) {
  const Json config = to_json(cfg);
  begin_run("lyap-grid", config, opt);
  Log log(opt.log);
  ResultsWriter out(opt.out_dir, "results", {"a", "xi_num", "xi_den", "regime", "diverged", "reason", "lyap"}, 3,
                    opt.resume);
  RunSummary summary;
  struct Cell {
    double a;
    FracExponent xi;
  };
  std::vector<Cell> cells;
  for (double a : cfg.a_values) {
    for (const auto& xi : cfg.xi) cells.push_back({a, xi});
  }
  summary.cells = cells.size();
  std::vector<std::size_t> todo;
  for (std::size_t i = 0; i < cells.size(); ++i) {
    if (out.done({cell(cells[i].a), cell(cells[i].xi.numerator()), cell(cells[i].xi.denominator())})) {
      ++summary.skipped;
    } else {
      todo.push_back(i);
    }
  }
  std::mutex fail_mutex;
  parallel_for(todo.size(), opt.jobs, [&](std::size_t k) {
    const Cell& c = cells[todo[k]];
    Row row{cell(c.a), cell(c.xi.numerator()), cell(c.xi.denominator())};
    try {
      const SystemSpec spec = make_system(FractionalHalvorsen{c.a, c.xi, c.xi, c.xi});
      const IntegrationResult r = generate(spec, opt.seed, cfg.n_steps, cfg.transient, cfg.integrator);
      if (const auto* d = std::get_if<Diverged>(&r)) {
        row.insert(row.end(), {"diverged", "1", clean(d->message()), ""});
      } else if (settled(std::get<Trajectory>(r), cfg.integrator)) {
        // Settled on a stable fixed point: the exponent is negative, but the
        // post-transient samples carry nothing to estimate it from.
        row.insert(row.end(), {"fixed_point", "0", "", ""});
      } else {
        const double lam = safe_lyapunov(std::get<Trajectory>(r), cfg.lyapunov);
        row.insert(row.end(), {"attractor", "0", std::isfinite(lam) ? "" : "no divergence curve", cell(lam)});
      }
      out.append(row);
      log("lyap-grid a=", c.a, " xi=", c.xi.to_string(), " -> ", row[3], " ", row[6]);
    } catch (const Error& e) {
      std::lock_guard lock(fail_mutex);
      ++summary.failed;
      summary.warnings.push_back("cell a=" + cell(c.a) + " xi=" + c.xi.to_string() + ": " + e.what());
    }
  });
  summary.outputs.push_back(out.finalize());
  end_run("lyap-grid", config, opt, summary);
  return summary;
}

// ---------------------------------------------------------------- probe

namespace {

ProbeSource probe_source_from_json(const Json& j) {
  const std::string w = "probe source";
  check_keys(j, {"system", "integrator", "n_steps", "transient", "trajectory", "returns", "column"}, w);
  ProbeSource s;
  const int kinds = static_cast<int>(j.contains("system")) + static_cast<int>(j.contains("trajectory")) +
                    static_cast<int>(j.contains("returns"));
  if (kinds != 1) throw ConfigError(w + ": give exactly one of system, trajectory, returns");
  if (j.contains("system")) {
    s.kind = ProbeSource::Kind::System;
    s.system = system_from_json(j.at("system"));
    if (j.contains("integrator")) s.integrator = integrator_from_json(j.at("integrator"));
    read(j, "n_steps", s.n_steps, w);
    read(j, "transient", s.transient, w);
  } else if (j.contains("trajectory")) {
    s.kind = ProbeSource::Kind::Trajectory;
    read(j, "trajectory", s.path, w);
  } else {
    s.kind = ProbeSource::Kind::Returns;
    read(j, "returns", s.path, w);
    if (!j.contains("column")) throw ConfigError(w + ": returns needs a column");
    if (j.at("column").is_number_integer()) {
      s.column = std::to_string(j.at("column").get<long long>());
    } else {
      read(j, "column", s.column, w);
    }
  }
  return s;
}

Json to_json(const ProbeSource& s) {
  switch (s.kind) {
    case ProbeSource::Kind::System:
      return Json{{"system", fracrc::to_json(s.system)},
                  {"integrator", fracrc::to_json(s.integrator)},
                  {"n_steps", s.n_steps},
                  {"transient", s.transient}};
    case ProbeSource::Kind::Trajectory:
      return Json{{"trajectory", s.path}};
    case ProbeSource::Kind::Returns:
      return Json{{"returns", s.path}, {"column", s.column}};
  }
  return {};
}

}  // namespace

ProbeRecipeConfig probe_recipe_config_from_json(const Json& j) {
  const std::string w = "probe recipe config";
  check_keys(j, {"source", "preset", "probe", "seed"}, w);
  ProbeRecipeConfig cfg;
  if (j.contains("source")) cfg.source = probe_source_from_json(j.at("source"));
  std::string preset = cfg.source.kind == ProbeSource::Kind::Returns ? "financial" : "chaotic";
  read(j, "preset", preset, w);
  if (preset == "chaotic") {
    cfg.probe = chaotic_probe_config(3);
  } else if (preset == "financial") {
    cfg.probe = financial_probe_config();
  } else {
    throw ConfigError(w + ": preset must be \"chaotic\" or \"financial\"");
  }
  if (j.contains("probe")) cfg.probe = probe_from_json(j.at("probe"), cfg.probe);
  cfg.probe.validate();
  return cfg;
}

Json to_json(const ProbeRecipeConfig& cfg) {
  return Json{{"source", to_json(cfg.source)}, {"probe", to_json(cfg.probe)}};
}

Trajectory load_probe_source(const ProbeSource& source, std::uint64_t seed, std::size_t* dropped_rows) {
  if (dropped_rows != nullptr) *dropped_rows = 0;
  switch (source.kind) {
    case ProbeSource::Kind::System: {
      const IntegrationResult r = generate(source.system, seed, source.n_steps, source.transient, source.integrator);
      if (const auto* d = std::get_if<Diverged>(&r)) throw ConfigError("probe source diverged: " + d->message());
      return std::get<Trajectory>(r);
    }
    case ProbeSource::Kind::Trajectory:
      return read_trajectory_csv(source.path);
    case ProbeSource::Kind::Returns: {
      ReturnsSeries r = ingest_returns(source.path, source.column);
      if (dropped_rows != nullptr) *dropped_rows = r.dropped_rows;
      return std::move(r.returns);
    }
  }
  throw ConfigError("probe: unknown source");
}

RunSummary run_probe(const ProbeRecipeConfig& cfg, const RunOptions& opt) {
  const Json config = to_json(cfg);
  begin_run("probe", config, opt);
  Log log(opt.log);
  RunSummary summary;
  summary.cells = cfg.probe.eta_grid.size();
  const std::string csv_path = join(opt.out_dir, "probe.csv");
  const std::string json_path = join(opt.out_dir, "probe.json");
  if (opt.resume && fs::exists(csv_path) && fs::exists(json_path)) {
    summary.skipped = summary.cells;
  } else {
    std::size_t dropped = 0;
    const Trajectory series = load_probe_source(cfg.source, opt.seed, &dropped);
    if (dropped > 0) summary.warnings.push_back(std::to_string(dropped) + " unparseable price rows dropped");
    ProbeConfig pc = cfg.probe;
    pc.minrc.input_dim = series.dim();
    pc.seed = opt.seed;
    pc.jobs = opt.jobs;
    log("probe: ", series.size(), " rows, ", pc.eta_grid.size(), " exponents, ", pc.surrogates, " surrogates");
    const ProbeReport report = probe_smallest_nonlinearity(series, pc);
    {
      std::ofstream os(csv_path + ".tmp", std::ios::trunc);
      write_probe_csv(os, report);
    }
    fs::rename(csv_path + ".tmp", csv_path);
    Json j = to_json(report);
    j["rows"] = series.size();
    j["dropped_rows"] = dropped;
    {
      std::ofstream os(json_path + ".tmp", std::ios::trunc);
      os << j.dump(2) << '\n';
    }
    fs::rename(json_path + ".tmp", json_path);
    log("probe: cdim_true=", format_double(report.cdim_true),
        " mu=", report.mu_recon ? report.mu_recon->to_string() : std::string("none"));
  }
  summary.outputs = {csv_path, json_path};
  end_run("probe", config, opt, summary);
  return summary;
}

// ---------------------------------------------------------------- fwhm

FwhmConfig fwhm_config_from_json(const Json& j) {
  const std::string w = "fwhm config";
  check_keys(j, {"input", "level", "column", "seed"}, w);
  FwhmConfig cfg;
  read(j, "input", cfg.input, w);
  read(j, "level", cfg.level, w);
  read(j, "column", cfg.column, w);
  if (cfg.input.empty()) throw ConfigError(w + ": input table is required");
  if (!(cfg.level > 0.0 && cfg.level <= 1.0)) throw ConfigError(w + ": level must be in (0, 1]");
  return cfg;
}

Json to_json(const FwhmConfig& cfg) {
  return Json{{"input", cfg.input}, {"level", cfg.level}, {"column", cfg.column}};
}

FwhmInterval level_interval(const std::vector<double>& x, const std::vector<double>& y, double level) {
  if (x.size() != y.size()) throw ConfigError("level_interval: x and y differ in length");
  FwhmInterval out;
  std::size_t peak = x.size();
  for (std::size_t i = 0; i < y.size(); ++i) {
    if (std::isfinite(y[i]) && (peak == x.size() || y[i] > y[peak])) peak = i;
  }
  if (peak == x.size() || !(y[peak] >= level)) {
    out.empty = true;
    out.peak = out.lo = out.hi = nan();
    return out;
  }
  const auto above = [&](std::size_t i) { return std::isfinite(y[i]) && y[i] >= level; };
  const auto cross = [&](std::size_t below, std::size_t at) {
    const double yb = std::isfinite(y[below]) ? y[below] : 0.0;
    return x[below] + (level - yb) * (x[at] - x[below]) / (y[at] - yb);
  };
  out.peak = x[peak];
  std::size_t i = peak;
  while (i > 0 && above(i - 1)) --i;
  if (i == 0) {
    out.lo = x[0];
    out.lo_open = true;
  } else {
    out.lo = cross(i - 1, i);
  }
  i = peak;
  while (i + 1 < x.size() && above(i + 1)) ++i;
  if (i + 1 == x.size()) {
    out.hi = x.back();
    out.hi_open = true;
  } else {
    out.hi = cross(i + 1, i);
  }
  return out;
}

RunSummary run_fwhm(const FwhmConfig& cfg, const RunOptions& opt) {
  const Json config = to_json(cfg);
  begin_run("fwhm", config, opt);
  const CsvTable in = read_csv_table(cfg.input);
  const std::size_t eta_num = in.column("eta_num");
  const std::size_t eta_den = in.column("eta_den");
  const std::size_t value = in.column(cfg.column);
  // Everything left of eta_num identifies the stratum.
  std::map<Row, std::vector<std::pair<double, double>>> groups;
  for (const Row& r : in.rows) {
    Row key(r.begin(), r.begin() + static_cast<std::ptrdiff_t>(eta_num));
    groups[key].emplace_back(parse_cell(r[eta_num]) / parse_cell(r[eta_den]), parse_cell(r[value]));
  }
  Row header(in.header.begin(), in.header.begin() + static_cast<std::ptrdiff_t>(eta_num));
  header.insert(header.end(), {"level", "peak_eta", "eta_lo", "eta_hi", "width", "lo_open", "hi_open", "empty"});
  CsvTable table{header, {}};
  RunSummary summary;
  for (auto& [key, pts] : groups) {
    std::sort(pts.begin(), pts.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
    std::vector<double> x, y;
    for (const auto& [px, py] : pts) {
      x.push_back(px);
      y.push_back(py);
    }
    const FwhmInterval iv = level_interval(x, y, cfg.level);
    Row row = key;
    row.insert(row.end(), {cell(cfg.level), cell(iv.peak), cell(iv.lo), cell(iv.hi), cell(iv.hi - iv.lo),
                           cell(iv.lo_open), cell(iv.hi_open), cell(iv.empty)});
    table.rows.push_back(row);
    ++summary.cells;
  }
  sort_rows(table.rows, eta_num);
  const std::string path = join(opt.out_dir, "fwhm.csv");
  write_csv_table(path, table);
  summary.outputs.push_back(path);
  end_run("fwhm", config, opt, summary);
  return summary;
}

}  // namespace fracrc
