#include <cmath>
#include <filesystem>
#include <map>

#include "fracrc/harness/recipes.hpp"
#include "fracrc/harness/results_table.hpp"
#include "fracrc/harness/thread_pool.hpp"
#include "fracrc/reservoir.hpp"
#include "recipe_util.hpp"

namespace fracrc {

using json_detail::check_keys;
using json_detail::read;
using namespace recipe_detail;

LibraryCompareConfig library_compare_config_from_json(const Json& j) {
  const std::string w = "library-compare config";
  check_keys(j,
             {"system", "integrator", "transient", "repetitions", "sync_len", "train_len", "predict_len", "classic",
              "arms", "standardize", "reference_len", "lyapunov", "seed"},
             w);
  LibraryCompareConfig cfg;
  if (j.contains("system")) cfg.system = system_from_json(j.at("system"));
  if (j.contains("integrator")) cfg.integrator = integrator_from_json(j.at("integrator"));
  read(j, "transient", cfg.transient, w);
  read(j, "repetitions", cfg.repetitions, w);
  read(j, "sync_len", cfg.sync_len, w);
  read(j, "train_len", cfg.train_len, w);
  read(j, "predict_len", cfg.predict_len, w);
  read(j, "standardize", cfg.standardize, w);
  read(j, "reference_len", cfg.reference_len, w);
  if (j.contains("classic")) cfg.classic = classic_from_json(j.at("classic"), cfg.classic);
  if (j.contains("lyapunov")) cfg.lyapunov = rosenstein_from_json(j.at("lyapunov"));
  if (j.contains("arms")) {
    const Json& arms = j.at("arms");
    if (!arms.is_array()) throw ConfigError(w + ": arms must be an array");
    cfg.arms.clear();
    for (const Json& a : arms) {
      check_keys(a, {"name", "reservoir_dim", "library"}, w + " arm");
      LibraryArm arm;
      read(a, "name", arm.name, w + " arm");
      read(a, "reservoir_dim", arm.reservoir_dim, w + " arm");
      if (a.contains("library")) {
        ClassicRCConfig probe = cfg.classic;
        probe = classic_from_json(Json{{"library", a.at("library")}}, probe);
        arm.library = probe.library;
      }
      if (arm.name.empty()) throw ConfigError(w + ": every arm needs a name");
      cfg.arms.push_back(arm);
    }
  }
  if (cfg.arms.size() != 3) throw ConfigError(w + ": exactly three arms are compared");
  if (cfg.repetitions < 1) throw ConfigError(w + ": repetitions must be >= 1");
  if (cfg.sync_len < 1 || cfg.train_len < 1 || cfg.predict_len < 1) throw ConfigError(w + ": lengths must be >= 1");
  if (cfg.reference_len < 100) throw ConfigError(w + ": reference_len must be >= 100");
  for (const LibraryArm& a : cfg.arms) {
    ClassicRCConfig c = cfg.classic;
    c.reservoir_dim = a.reservoir_dim;
    c.library = a.library;
    c.validate();
  }
  return cfg;
}

Json to_json(const LibraryCompareConfig& cfg) {
  Json arms = Json::array();
  for (const LibraryArm& a : cfg.arms) {
    arms.push_back(Json{{"name", a.name}, {"reservoir_dim", a.reservoir_dim}, {"library", exponents_to_json(a.library)}});
  }
  return Json{{"system", to_json(cfg.system)},
              {"integrator", to_json(cfg.integrator)},
              {"transient", cfg.transient},
              {"repetitions", cfg.repetitions},
              {"sync_len", cfg.sync_len},
              {"train_len", cfg.train_len},
              {"predict_len", cfg.predict_len},
              {"classic", to_json(cfg.classic)},
              {"arms", arms},
              {"standardize", cfg.standardize},
              {"reference_len", cfg.reference_len},
              {"lyapunov", to_json(cfg.lyapunov)}};
}

namespace {

// Affine map to zero mean and unit variance, estimated on the first `rows`.
Trajectory standardize(const Trajectory& t, std::size_t rows) {
  const std::size_t dim = t.dim();
  std::vector<double> mean(dim, 0.0), sd(dim, 0.0);
  for (std::size_t i = 0; i < rows; ++i) {
    for (std::size_t c = 0; c < dim; ++c) mean[c] += t(i, c);
  }
  for (double& m : mean) m /= static_cast<double>(rows);
  for (std::size_t i = 0; i < rows; ++i) {
    for (std::size_t c = 0; c < dim; ++c) sd[c] += (t(i, c) - mean[c]) * (t(i, c) - mean[c]);
  }
  for (double& s : sd) {
    s = std::sqrt(s / static_cast<double>(rows));
    if (!(s > 0.0)) throw NumericalError("standardize: constant coordinate");
  }
  std::vector<double> data(t.values().begin(), t.values().end());
  for (std::size_t i = 0; i < t.size(); ++i) {
    for (std::size_t c = 0; c < dim; ++c) data[i * dim + c] = (data[i * dim + c] - mean[c]) / sd[c];
  }
  return Trajectory(std::move(data), dim, t.dt(), t.transient_discarded());
}

}  // namespace

RunSummary run_library_compare(const LibraryCompareConfig& cfg, const RunOptions& opt) {
  const Json config = to_json(cfg);
  begin_run("library-compare", config, opt);
  Log log(opt.log);
  ResultsWriter out(opt.out_dir, "results",
                    {"rep", "arm", "name", "data_seed", "network_seed", "diverged", "reason", "blowup_step", "fh_steps",
                     "fh_lyap"},
                    2, opt.resume);
  RunSummary summary;
  const std::size_t arms = cfg.arms.size();
  summary.cells = cfg.repetitions * arms;
  std::vector<std::size_t> todo;
  for (std::size_t k = 0; k < summary.cells; ++k) {
    if (out.done({cell(static_cast<std::uint64_t>(k / arms)), cell(static_cast<std::uint64_t>(k % arms))})) {
      ++summary.skipped;
    } else {
      todo.push_back(k);
    }
  }

  double lambda = nan();
  if (!todo.empty()) {
    const IntegrationResult ref =
        generate(cfg.system, derive_seed(opt.seed, {0x11d}), cfg.reference_len, cfg.transient, cfg.integrator);
    if (const auto* d = std::get_if<Diverged>(&ref)) throw ConfigError("reference trajectory diverged: " + d->message());
    lambda = safe_lyapunov(std::get<Trajectory>(ref), cfg.lyapunov);
    log("library-compare: reference lyapunov exponent ", format_double(lambda));
  }

  const std::size_t train_rows = cfg.sync_len + cfg.train_len + 1;
  const std::size_t need = train_rows + cfg.predict_len;
  std::mutex fail_mutex;
  std::size_t done = 0;
  // Arms of one repetition share the data draw and the network seed, so the
  // comparison is paired.
  parallel_for(todo.size(), opt.jobs, [&](std::size_t i) {
    const std::size_t rep = todo[i] / arms;
    const std::size_t arm = todo[i] % arms;
    const std::uint64_t data_seed = derive_seed(opt.seed, {0x11b, rep});
    const std::uint64_t net_seed = derive_seed(opt.seed, {0x11c, rep});
    Row row{cell(static_cast<std::uint64_t>(rep)), cell(static_cast<std::uint64_t>(arm)), clean(cfg.arms[arm].name),
            cell(data_seed), cell(net_seed)};
    try {
      const IntegrationResult tr = generate(cfg.system, data_seed, need, cfg.transient, cfg.integrator);
      if (const auto* d = std::get_if<Diverged>(&tr)) throw NumericalError("data diverged: " + d->message());
      Trajectory data = std::get<Trajectory>(tr);
      if (cfg.standardize) data = standardize(data, train_rows);
      ClassicRCConfig c = cfg.classic;
      c.input_dim = data.dim();
      c.reservoir_dim = cfg.arms[arm].reservoir_dim;
      c.library = cfg.arms[arm].library;
      c.seed = net_seed;
      bool diverged = false;
      std::string reason, blowup;
      ForecastHorizon fh;
      try {
        const ClassicRC rc = build_classic(c);
        const Readout readout = train(rc, data.slice(0, train_rows), cfg.sync_len);
        const Prediction pred = predict(rc, readout, data.slice(train_rows - cfg.sync_len, cfg.sync_len),
                                        cfg.predict_len);
        if (pred.diverged) blowup = cell(static_cast<std::uint64_t>(pred.diverged_at));
        fh = forecast_horizon(data.slice(train_rows, cfg.predict_len), pred.trajectory, lambda);
      } catch (const NumericalError& e) {
        diverged = true;
        reason = clean(e.what());
      }
      if (diverged) {
        row.insert(row.end(), {"1", reason, "", "", ""});
      } else {
        row.insert(row.end(), {"0", "", blowup, cell(static_cast<std::uint64_t>(fh.steps)), cell(fh.lyapunov_times)});
      }
      out.append(row);
    } catch (const Error& e) {
      std::lock_guard lock(fail_mutex);
      ++summary.failed;
      summary.warnings.push_back("rep " + std::to_string(rep) + " arm " + cfg.arms[arm].name + ": " + e.what());
    }
    std::lock_guard lock(fail_mutex);
    if (++done % 30 == 0 || done == todo.size()) log("library-compare: ", done, "/", todo.size(), " runs");
  });
  const std::string results = out.finalize();
  const std::vector<ArmStats> stats = summarize_library_compare(results);
  CsvTable s{{"arm", "name", "runs", "diverged", "fh_mean", "fh_std", "fh_sem"}, {}};
  for (std::size_t a = 0; a < stats.size(); ++a) {
    s.rows.push_back({cell(static_cast<std::uint64_t>(a)), stats[a].name, cell(static_cast<std::uint64_t>(stats[a].runs)),
                      cell(static_cast<std::uint64_t>(stats[a].diverged)), cell(stats[a].mean), cell(stats[a].std),
                      cell(stats[a].sem)});
  }
  const std::string spath = join(opt.out_dir, "summary.csv");
  write_csv_table(spath, s);
  summary.outputs = {results, spath};
  end_run("library-compare", config, opt, summary);
  return summary;
}

std::vector<ArmStats> summarize_library_compare(const std::string& results_csv) {
  const CsvTable t = read_csv_table(results_csv);
  const std::size_t c_arm = t.column("arm"), c_name = t.column("name"), c_div = t.column("diverged");
  const std::size_t c_fh = t.column("fh_steps");
  std::map<double, ArmStats> by_arm;
  std::map<double, std::vector<double>> values;
  for (const Row& r : t.rows) {
    const double arm = parse_cell(r[c_arm]);
    ArmStats& s = by_arm[arm];
    s.name = r[c_name];
    ++s.runs;
    if (r[c_div] == "1") {
      ++s.diverged;
      values[arm].push_back(0.0);
    } else {
      values[arm].push_back(parse_cell(r[c_fh]));
    }
  }
  std::vector<ArmStats> out;
  for (auto& [arm, s] : by_arm) {
    const std::vector<double>& v = values[arm];
    double sum = 0.0;
    for (double x : v) sum += x;
    s.mean = sum / static_cast<double>(v.size());
    double ss = 0.0;
    for (double x : v) ss += (x - s.mean) * (x - s.mean);
    s.std = v.size() > 1 ? std::sqrt(ss / static_cast<double>(v.size() - 1)) : nan();
    s.sem = s.std / std::sqrt(static_cast<double>(v.size()));
    out.push_back(s);
  }
  return out;
}

}  // namespace fracrc
