#include <algorithm>
#include <cmath>
#include <filesystem>
#include <map>

#include "fracrc/harness/recipes.hpp"
#include "fracrc/harness/results_table.hpp"
#include "fracrc/harness/thread_pool.hpp"
#include "recipe_util.hpp"

namespace fracrc {

using json_detail::check_keys;
using json_detail::read;
using namespace recipe_detail;

namespace {

Row sweep_metric_cells(const CellResult& r, double lyap_true, double cdim_true) {
  if (r.diverged) return {"1", r.reason, "", "", "", cell(lyap_true), "", cell(cdim_true), "", "0"};
  return {"0",
          "",
          r.blowup ? cell(static_cast<std::uint64_t>(*r.blowup)) : "",
          cell(static_cast<std::uint64_t>(r.fh.steps)),
          cell(r.fh.lyapunov_times),
          cell(lyap_true),
          cell(r.lyap_pred),
          cell(cdim_true),
          cell(r.cdim_pred),
          cell(r.success)};
}

const Row kMetricColumns{"diverged", "reason",    "blowup_step", "fh_steps",  "fh_lyap",
                         "lyap_true", "lyap_pred", "cdim_true",   "cdim_pred", "success"};

}  // namespace

// ---------------------------------------------------------------- eta sweep

EtaSweepConfig eta_sweep_config_from_json(const Json& j) {
  const std::string w = "eta-sweep config";
  check_keys(j,
             {"system", "xi", "spectral_radii", "eta_window", "eta_step", "repetitions", "offset_range",
              "reference_len", "model", "seed"},
             w);
  EtaSweepConfig cfg;
  if (j.contains("system")) cfg.system = system_from_json(j.at("system"));
  if (j.contains("xi")) cfg.xi = grid_from_json(j.at("xi"), w + " xi");
  read(j, "spectral_radii", cfg.spectral_radii, w);
  read(j, "eta_window", cfg.eta_window, w);
  read(j, "eta_step", cfg.eta_step, w);
  read(j, "repetitions", cfg.repetitions, w);
  read(j, "offset_range", cfg.offset_range, w);
  read(j, "reference_len", cfg.reference_len, w);
  if (j.contains("model")) cfg.model = sweep_model_from_json(j.at("model"), cfg.model);
  if (std::holds_alternative<Thomas>(cfg.system)) throw ConfigError(w + ": system must be lorenz or halvorsen");
  if (std::holds_alternative<FractionalHalvorsen>(cfg.system) && cfg.xi.empty()) {
    throw ConfigError(w + ": halvorsen needs at least one xi");
  }
  for (const auto& x : cfg.xi) {
    if (x.value() < 1.0) throw ConfigError(w + ": xi must be >= 1");
  }
  if (cfg.spectral_radii.empty()) throw ConfigError(w + ": empty spectral_radii");
  for (double r : cfg.spectral_radii) {
    if (!(r >= 0.0) || !std::isfinite(r)) throw ConfigError(w + ": spectral radii must be finite and >= 0");
  }
  if (cfg.repetitions < 1) throw ConfigError(w + ": repetitions must be >= 1");
  if (cfg.eta_window < 0 || cfg.eta_step < 1) throw ConfigError(w + ": need eta_window >= 0 and eta_step >= 1");
  if (cfg.offset_range < 1) throw ConfigError(w + ": offset_range must be >= 1");
  if (cfg.reference_len < 100) throw ConfigError(w + ": reference_len must be >= 100");
  return cfg;
}

Json to_json(const EtaSweepConfig& cfg) {
  return Json{{"system", to_json(cfg.system)},
              {"xi", exponents_to_json(cfg.xi)},
              {"spectral_radii", cfg.spectral_radii},
              {"eta_window", cfg.eta_window},
              {"eta_step", cfg.eta_step},
              {"repetitions", cfg.repetitions},
              {"offset_range", cfg.offset_range},
              {"reference_len", cfg.reference_len},
              {"model", recipe_detail::to_json(cfg.model)}};
}

namespace {

struct Stratum {
  SystemSpec spec;
  FracExponent xi = FracExponent(100);
  std::vector<FracExponent> eta;
  double lyap_true = nan();
  std::vector<Trajectory> segments;  // one per repetition
  std::vector<std::uint64_t> seeds;
  std::vector<std::size_t> offsets;
  std::vector<double> cdim_true;
  std::string error;
};

std::vector<FracExponent> stratum_grid(const EtaSweepConfig& cfg, const FracExponent& xi) {
  if (cfg.eta_window == 0) return cfg.model.eta;
  const int den = xi.denominator();
  const int centre = xi.numerator();
  std::vector<FracExponent> grid;
  for (int k = -cfg.eta_window; k <= cfg.eta_window; ++k) {
    const int n = centre + k * cfg.eta_step;
    if (n > den && n % 2 == 0) grid.emplace_back(n, den);
  }
  return grid;
}

void prepare_stratum(Stratum& s, const EtaSweepConfig& cfg, std::uint64_t seed, std::size_t index) {
  const SweepModel& m = cfg.model;
  const std::size_t need = segment_rows(m);
  const std::size_t reps = cfg.repetitions;
  const bool lorenz = std::holds_alternative<Lorenz>(s.spec);
  const auto fail = [&](const std::string& what) { s.error = what; };
  if (lorenz) {
    const IntegrationResult ref =
        generate(s.spec, derive_seed(seed, {0x4ef, index}), cfg.reference_len, m.transient, m.integrator);
    if (std::holds_alternative<Diverged>(ref)) return fail("reference trajectory diverged");
    s.lyap_true = safe_lyapunov(std::get<Trajectory>(ref), m.climate_cfg.lyapunov);
    for (std::size_t r = 0; r < reps; ++r) {
      const std::uint64_t ds = derive_seed(seed, {0xda7a, index, r});
      const IntegrationResult tr = generate(s.spec, ds, need, m.transient, m.integrator);
      if (const auto* d = std::get_if<Diverged>(&tr)) return fail("data diverged: " + d->message());
      s.segments.push_back(std::get<Trajectory>(tr));
      s.seeds.push_back(ds);
      s.offsets.push_back(0);
    }
  } else {
    const std::size_t len = std::max(cfg.reference_len, cfg.offset_range + need);
    const IntegrationResult tr = generate(s.spec, seed, len, m.transient, m.integrator);
    if (const auto* d = std::get_if<Diverged>(&tr)) return fail("data diverged: " + d->message());
    const Trajectory& full = std::get<Trajectory>(tr);
    s.lyap_true = safe_lyapunov(full.slice(0, cfg.reference_len), m.climate_cfg.lyapunov);
    for (std::size_t r = 0; r < reps; ++r) {
      const std::uint64_t ds = derive_seed(seed, {0xda7a, index, r});
      Rng rng(ds);
      const std::size_t off = static_cast<std::size_t>(rng.below(cfg.offset_range));
      s.segments.push_back(full.slice(off, need));
      s.seeds.push_back(ds);
      s.offsets.push_back(off);
    }
  }
  const std::size_t train_rows = m.sync_len + m.train_len + 1;
  for (const Trajectory& seg : s.segments) {
    s.cdim_true.push_back(m.climate ? safe_cdim(seg.slice(train_rows, m.predict_len), m.climate_cfg.correlation)
                                    : nan());
  }
}

}  // namespace

RunSummary run_eta_sweep(const EtaSweepConfig& cfg, const RunOptions& opt) {
  const Json config = to_json(cfg);
  begin_run("eta-sweep", config, opt);
  Log log(opt.log);
  Row header{"xi_num", "xi_den", "rho", "eta_num", "eta_den", "rep", "data_seed", "offset"};
  header.insert(header.end(), kMetricColumns.begin(), kMetricColumns.end());
  ResultsWriter out(opt.out_dir, "results", header, 6, opt.resume);
  RunSummary summary;

  std::vector<Stratum> strata;
  if (const auto* h = std::get_if<FractionalHalvorsen>(&cfg.system)) {
    for (const auto& xi : cfg.xi) {
      Stratum s;
      s.spec = make_system(FractionalHalvorsen{h->a, xi, xi, xi});
      s.xi = xi;
      strata.push_back(std::move(s));
    }
  } else {
    Stratum s;
    s.spec = cfg.system;
    s.xi = FracExponent(100);
    strata.push_back(std::move(s));
  }
  for (Stratum& s : strata) s.eta = stratum_grid(cfg, s.xi);

  struct Cell {
    std::size_t stratum, rho, eta, rep;
  };
  const auto key_of = [&](const Cell& c) {
    const Stratum& s = strata[c.stratum];
    return Row{cell(s.xi.numerator()), cell(s.xi.denominator()), cell(cfg.spectral_radii[c.rho]),
               cell(s.eta[c.eta].numerator()), cell(s.eta[c.eta].denominator()),
               cell(static_cast<std::uint64_t>(c.rep))};
  };
  std::vector<Cell> todo;
  std::vector<char> needed(strata.size(), 0);
  for (std::size_t si = 0; si < strata.size(); ++si) {
    for (std::size_t ri = 0; ri < cfg.spectral_radii.size(); ++ri) {
      for (std::size_t ei = 0; ei < strata[si].eta.size(); ++ei) {
        for (std::size_t rep = 0; rep < cfg.repetitions; ++rep) {
          const Cell c{si, ri, ei, rep};
          ++summary.cells;
          if (out.done(key_of(c))) {
            ++summary.skipped;
          } else {
            todo.push_back(c);
            needed[si] = 1;
          }
        }
      }
    }
  }

  parallel_for(strata.size(), opt.jobs, [&](std::size_t i) {
    if (!needed[i]) return;
    prepare_stratum(strata[i], cfg, opt.seed, i);
    log("eta-sweep: data for xi=", strata[i].xi.to_string(), " lyap=", format_double(strata[i].lyap_true),
        strata[i].error.empty() ? "" : " error: ", strata[i].error);
  });

  std::mutex fail_mutex;
  std::size_t done = 0;
  parallel_for(todo.size(), opt.jobs, [&](std::size_t k) {
    const Cell& c = todo[k];
    const Stratum& s = strata[c.stratum];
    if (!s.error.empty()) {
      std::lock_guard lock(fail_mutex);
      ++summary.failed;
      return;
    }
    try {
      const CellResult r = evaluate_minrc(s.segments[c.rep], s.eta[c.eta], cfg.spectral_radii[c.rho], cfg.model,
                                          s.lyap_true, s.cdim_true[c.rep]);
      Row row = key_of(c);
      row.push_back(cell(s.seeds[c.rep]));
      row.push_back(cell(static_cast<std::uint64_t>(s.offsets[c.rep])));
      const Row metrics = sweep_metric_cells(r, s.lyap_true, s.cdim_true[c.rep]);
      row.insert(row.end(), metrics.begin(), metrics.end());
      out.append(row);
    } catch (const Error& e) {
      std::lock_guard lock(fail_mutex);
      ++summary.failed;
      summary.warnings.push_back("cell " + s.eta[c.eta].to_string() + ": " + e.what());
    }
    std::lock_guard lock(fail_mutex);
    if (++done % 50 == 0 || done == todo.size()) log("eta-sweep: ", done, "/", todo.size(), " cells");
  });
  for (const Stratum& s : strata) {
    if (!s.error.empty()) summary.warnings.push_back("xi=" + s.xi.to_string() + ": " + s.error);
  }
  const std::string results = out.finalize();
  const std::string summary_path = join(opt.out_dir, "summary.csv");
  summarize_eta_sweep(results, summary_path);
  summary.outputs = {results, summary_path};
  end_run("eta-sweep", config, opt, summary);
  return summary;
}

void summarize_eta_sweep(const std::string& results_csv, const std::string& summary_csv) {
  const CsvTable t = read_csv_table(results_csv);
  const std::size_t c_xn = t.column("xi_num"), c_xd = t.column("xi_den"), c_rho = t.column("rho");
  const std::size_t c_en = t.column("eta_num"), c_ed = t.column("eta_den");
  const std::size_t c_div = t.column("diverged"), c_fh = t.column("fh_steps"), c_fl = t.column("fh_lyap");
  const std::size_t c_ok = t.column("success"), c_ct = t.column("cdim_true"), c_cp = t.column("cdim_pred");
  struct Acc {
    std::size_t n = 0, diverged = 0, success = 0;
    double fh = 0.0, fl = 0.0;
    std::vector<double> cdim_err;
  };
  std::map<Row, Acc> acc;
  for (const Row& r : t.rows) {
    Acc& a = acc[Row{r[c_xn], r[c_xd], r[c_rho], r[c_en], r[c_ed]}];
    ++a.n;
    if (r[c_div] == "1") {
      ++a.diverged;
      a.cdim_err.push_back(HUGE_VAL);
      continue;
    }
    a.fh += parse_cell(r[c_fh]);
    const double fl = parse_cell(r[c_fl]);
    if (std::isfinite(fl)) a.fl += fl;
    if (r[c_ok] == "1") ++a.success;
    const double err = std::fabs(parse_cell(r[c_cp]) - parse_cell(r[c_ct]));
    a.cdim_err.push_back(std::isfinite(err) ? err : HUGE_VAL);
  }
  // Peak of the mean forecast horizon per (xi, rho) stratum.
  std::map<Row, double> peak;
  for (const auto& [key, a] : acc) {
    double& p = peak[Row{key[0], key[1], key[2]}];
    p = std::max(p, a.fh / static_cast<double>(a.n));
  }
  CsvTable s{{"xi_num", "xi_den", "rho", "eta_num", "eta_den", "cells", "diverged", "fh_mean", "fh_lyap_mean",
              "fh_norm", "success_rate", "cdim_err_median"},
             {}};
  for (const auto& [key, a] : acc) {
    const double n = static_cast<double>(a.n);
    const double mean = a.fh / n;
    const double pk = peak[Row{key[0], key[1], key[2]}];
    Row row = key;
    row.insert(row.end(), {cell(static_cast<std::uint64_t>(a.n)), cell(static_cast<std::uint64_t>(a.diverged)),
                           cell(mean), cell(a.fl / n), cell(pk > 0.0 ? mean / pk : nan()),
                           cell(static_cast<double>(a.success) / n), cell(median(a.cdim_err))});
    s.rows.push_back(row);
  }
  sort_rows(s.rows, 5);
  write_csv_table(summary_csv, s);
}

// ---------------------------------------------------------------- two / three exponents

double relative_position(double eta, double xi_s, double xi_l) {
  if (!(xi_l > xi_s)) return nan();
  return (eta - xi_s) / (xi_l - xi_s);
}

MultiExponentConfig multi_exponent_config_from_json(const Json& j, std::size_t exponents) {
  const std::string w = exponents == 2 ? "two-exp config" : "three-exp config";
  check_keys(j,
             {"a", "numerator_min", "numerator_max", "denominator", "trajectories", "budget_factor", "min_lyapunov",
              "reference_len", "p_bin", "model", "seed"},
             w);
  MultiExponentConfig cfg;
  cfg.exponents = exponents;
  if (exponents == 3) cfg.numerator_min = 52;
  read(j, "a", cfg.a, w);
  read(j, "numerator_min", cfg.numerator_min, w);
  read(j, "numerator_max", cfg.numerator_max, w);
  read(j, "denominator", cfg.denominator, w);
  read(j, "trajectories", cfg.trajectories, w);
  read(j, "budget_factor", cfg.budget_factor, w);
  read(j, "min_lyapunov", cfg.min_lyapunov, w);
  read(j, "reference_len", cfg.reference_len, w);
  read(j, "p_bin", cfg.p_bin, w);
  if (j.contains("model")) cfg.model = sweep_model_from_json(j.at("model"), cfg.model);
  if (exponents != 2 && exponents != 3) throw ConfigError(w + ": exponents must be 2 or 3");
  if (!std::isfinite(cfg.a)) throw ConfigError(w + ": a must be finite");
  if (cfg.denominator < 1 || cfg.numerator_min % 2 != 0 || cfg.numerator_max % 2 != 0 ||
      cfg.numerator_min < cfg.denominator || cfg.numerator_max < cfg.numerator_min) {
    throw ConfigError(w + ": numerators must be even with denominator <= numerator_min <= numerator_max");
  }
  if (exponents == 2 && cfg.numerator_max == cfg.numerator_min) {
    throw ConfigError(w + ": two distinct exponents need a numerator range");
  }
  if (cfg.trajectories < 1) throw ConfigError(w + ": trajectories must be >= 1");
  if (!(cfg.budget_factor >= 1.0)) throw ConfigError(w + ": budget_factor must be >= 1");
  if (!(cfg.p_bin > 0.0)) throw ConfigError(w + ": p_bin must be > 0");
  if (cfg.reference_len < 100) throw ConfigError(w + ": reference_len must be >= 100");
  return cfg;
}

Json to_json(const MultiExponentConfig& cfg) {
  return Json{{"exponents", cfg.exponents},
              {"a", cfg.a},
              {"numerator_min", cfg.numerator_min},
              {"numerator_max", cfg.numerator_max},
              {"denominator", cfg.denominator},
              {"trajectories", cfg.trajectories},
              {"budget_factor", cfg.budget_factor},
              {"min_lyapunov", cfg.min_lyapunov},
              {"reference_len", cfg.reference_len},
              {"p_bin", cfg.p_bin},
              {"model", recipe_detail::to_json(cfg.model)}};
}

namespace {

struct Draw {
  std::size_t index = 0;
  int n[3] = {0, 0, 0};
  std::string status;  // accepted, diverged, fixed_point, non-chaotic
  double lyap = nan();
  Trajectory segment;
  double cdim_true = nan();
};

Draw sample_draw(const MultiExponentConfig& cfg, std::uint64_t seed, std::size_t index) {
  Draw d;
  d.index = index;
  Rng rng(derive_seed(seed, {0x3e, cfg.exponents, index}));
  const auto count = static_cast<std::uint64_t>((cfg.numerator_max - cfg.numerator_min) / 2 + 1);
  const auto pick = [&] { return cfg.numerator_min + 2 * static_cast<int>(rng.below(count)); };
  if (cfg.exponents == 2) {
    d.n[0] = d.n[1] = pick();
    do d.n[2] = pick();
    while (d.n[2] == d.n[0]);
  } else {
    for (int& n : d.n) n = pick();
  }
  return d;
}

void validate_draw(Draw& d, const MultiExponentConfig& cfg) {
  const SweepModel& m = cfg.model;
  const int den = cfg.denominator;
  const SystemSpec spec =
      make_system(FractionalHalvorsen{cfg.a, FracExponent(d.n[0], den), FracExponent(d.n[1], den),
                                      FracExponent(d.n[2], den)});
  const std::size_t len = std::max(cfg.reference_len, segment_rows(m));
  const IntegrationResult tr = generate(spec, 0, len, m.transient, m.integrator);
  if (std::holds_alternative<Diverged>(tr)) {
    d.status = "diverged";
    return;
  }
  const Trajectory& full = std::get<Trajectory>(tr);
  if (settled(full, m.integrator)) {
    d.status = "fixed_point";
    return;
  }
  d.lyap = safe_lyapunov(full.slice(0, cfg.reference_len), m.climate_cfg.lyapunov);
  const Trajectory segment = full.slice(0, segment_rows(m));
  const std::size_t train_rows = m.sync_len + m.train_len + 1;
  d.cdim_true = safe_cdim(segment.slice(train_rows, m.predict_len), m.climate_cfg.correlation);
  if (!(d.lyap > cfg.min_lyapunov)) {
    d.status = "non-chaotic";
    return;
  }
  d.status = "accepted";
  d.segment = segment;
}

}  // namespace

RunSummary run_multi_exponent(const MultiExponentConfig& cfg, const RunOptions& opt) {
  const std::string recipe = cfg.exponents == 2 ? "two-exp" : "three-exp";
  const Json config = to_json(cfg);
  begin_run(recipe, config, opt);
  Log log(opt.log);
  RunSummary summary;

  // Draws are validated in parallel batches but accepted strictly in draw
  // order, so the chosen set does not depend on the number of workers.
  const auto budget = static_cast<std::size_t>(std::ceil(cfg.budget_factor * static_cast<double>(cfg.trajectories)));
  const std::size_t batch = std::max<std::size_t>(resolve_jobs(opt.jobs), 1);
  std::vector<Draw> log_draws;
  std::vector<Draw> accepted;
  std::size_t next = 0;
  while (accepted.size() < cfg.trajectories && next < budget) {
    const std::size_t count = std::min(batch, budget - next);
    std::vector<Draw> draws(count);
    parallel_for(count, opt.jobs, [&](std::size_t i) {
      draws[i] = sample_draw(cfg, opt.seed, next + i);
      validate_draw(draws[i], cfg);
    });
    next += count;
    for (Draw& d : draws) {
      if (accepted.size() == cfg.trajectories) break;
      log(recipe, ": draw ", d.index, " (", d.n[0], ",", d.n[1], ",", d.n[2], ")/", cfg.denominator, " ", d.status,
          " lyap=", format_double(d.lyap), " cdim=", format_double(d.cdim_true));
      log_draws.push_back(d);
      if (d.status == "accepted") accepted.push_back(std::move(d));
    }
  }
  if (accepted.size() < cfg.trajectories) {
    summary.partial = true;
    summary.warnings.push_back("resampling budget of " + std::to_string(budget) + " draws exhausted with " +
                               std::to_string(accepted.size()) + " of " + std::to_string(cfg.trajectories) +
                               " trajectories accepted");
  }
  {
    CsvTable draws{{"draw", "xi1_num", "xi2_num", "xi3_num", "xi_den", "status", "lyap", "cdim"}, {}};
    for (const Draw& d : log_draws) {
      draws.rows.push_back({cell(static_cast<std::uint64_t>(d.index)), cell(d.n[0]), cell(d.n[1]), cell(d.n[2]),
                            cell(cfg.denominator), d.status, cell(d.lyap), cell(d.cdim_true)});
    }
    const std::string path = join(opt.out_dir, "draws.csv");
    write_csv_table(path, draws);
    summary.outputs.push_back(path);
  }

  Row header{"traj", "draw", "xi1_num", "xi2_num", "xi3_num", "xi_den", "eta_num", "eta_den", "xi_s", "xi_l", "p",
             "d_s"};
  header.insert(header.end(), kMetricColumns.begin(), kMetricColumns.end());
  header.push_back("cdim_err");
  ResultsWriter out(opt.out_dir, "results", header, 8, opt.resume);
  struct Cell {
    std::size_t traj, eta;
  };
  const auto key_of = [&](const Cell& c) {
    const Draw& d = accepted[c.traj];
    const FracExponent& e = cfg.model.eta[c.eta];
    return Row{cell(static_cast<std::uint64_t>(c.traj)), cell(static_cast<std::uint64_t>(d.index)), cell(d.n[0]),
               cell(d.n[1]), cell(d.n[2]), cell(cfg.denominator), cell(e.numerator()), cell(e.denominator())};
  };
  std::vector<Cell> todo;
  for (std::size_t t = 0; t < accepted.size(); ++t) {
    for (std::size_t e = 0; e < cfg.model.eta.size(); ++e) {
      ++summary.cells;
      if (out.done(key_of({t, e}))) {
        ++summary.skipped;
      } else {
        todo.push_back({t, e});
      }
    }
  }
  std::mutex fail_mutex;
  std::size_t done = 0;
  parallel_for(todo.size(), opt.jobs, [&](std::size_t k) {
    const Cell& c = todo[k];
    const Draw& d = accepted[c.traj];
    const FracExponent& eta = cfg.model.eta[c.eta];
    try {
      const CellResult r = evaluate_minrc(d.segment, eta, cfg.model.minrc.spectral_radius, cfg.model, d.lyap,
                                          d.cdim_true);
      const double xs = static_cast<double>(*std::min_element(d.n, d.n + 3)) / cfg.denominator;
      const double xl = static_cast<double>(*std::max_element(d.n, d.n + 3)) / cfg.denominator;
      Row row = key_of(c);
      row.insert(row.end(), {cell(xs), cell(xl), cell(relative_position(eta.value(), xs, xl)),
                             cell(eta.value() - xs)});
      const Row metrics = sweep_metric_cells(r, d.lyap, d.cdim_true);
      row.insert(row.end(), metrics.begin(), metrics.end());
      row.push_back(r.diverged ? "" : cell(std::fabs(r.cdim_pred - d.cdim_true)));
      out.append(row);
    } catch (const Error& e) {
      std::lock_guard lock(fail_mutex);
      ++summary.failed;
      summary.warnings.push_back("cell " + eta.to_string() + ": " + e.what());
    }
    std::lock_guard lock(fail_mutex);
    if (++done % 50 == 0 || done == todo.size()) log(recipe, ": ", done, "/", todo.size(), " cells");
  });
  const std::string results = out.finalize();
  summary.outputs.push_back(results);

  // Aggregate on the relative axis: median cdim error (missing counts as
  // unbounded) and mean forecast horizon normalized per trajectory.
  const CsvTable t = read_csv_table(results);
  const std::size_t c_traj = t.column("traj"), c_p = t.column("p"), c_fh = t.column("fh_steps");
  const std::size_t c_err = t.column("cdim_err");
  std::map<std::string, double> peak;
  for (const Row& r : t.rows) {
    const double fh = parse_cell(r[c_fh]);
    if (std::isfinite(fh)) peak[r[c_traj]] = std::max(peak[r[c_traj]], fh);
  }
  std::map<long long, std::pair<std::vector<double>, std::vector<double>>> bins;
  for (const Row& r : t.rows) {
    const double p = parse_cell(r[c_p]);
    if (!std::isfinite(p)) continue;
    auto& [errs, fhs] = bins[static_cast<long long>(std::floor(p / cfg.p_bin))];
    const double err = parse_cell(r[c_err]);
    errs.push_back(std::isfinite(err) ? err : HUGE_VAL);
    const double fh = parse_cell(r[c_fh]);
    const double pk = peak[r[c_traj]];
    fhs.push_back(pk > 0.0 ? (std::isfinite(fh) ? fh : 0.0) / pk : nan());
  }
  CsvTable s{{"p_lo", "p_hi", "cells", "cdim_err_median", "fh_norm_mean"}, {}};
  for (const auto& [b, v] : bins) {
    double sum = 0.0;
    std::size_t n = 0;
    for (double f : v.second) {
      if (std::isfinite(f)) {
        sum += f;
        ++n;
      }
    }
    s.rows.push_back({cell(static_cast<double>(b) * cfg.p_bin), cell(static_cast<double>(b + 1) * cfg.p_bin),
                      cell(static_cast<std::uint64_t>(v.first.size())), cell(median(v.first)),
                      cell(n > 0 ? sum / static_cast<double>(n) : nan())});
  }
  const std::string spath = join(opt.out_dir, "summary.csv");
  write_csv_table(spath, s);
  summary.outputs.push_back(spath);
  end_run(recipe, config, opt, summary);
  return summary;
}

}  // namespace fracrc
