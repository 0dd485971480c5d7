// Acceptance runs: one PASS/FAIL line per criterion.
//   acceptance [--only N] [--jobs J] [--work DIR]

#include <CLI11.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "fracrc/dynamics.hpp"
#include "fracrc/harness/recipes.hpp"
#include "fracrc/harness/results_table.hpp"
#include "fracrc/harness/thread_pool.hpp"
#include "fracrc/kdtree.hpp"
#include "fracrc/linalg.hpp"
#include "fracrc/metrics.hpp"
#include "fracrc/minimal_rc.hpp"
#include "fracrc/probe.hpp"
#include "fracrc/surrogates.hpp"
#include "gen.hpp"
#include "mpfr_oracle.hpp"
#include "oracles.hpp"

using namespace fracrc;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

struct Criterion {
  int id;
  std::string title;
  double budget_seconds;
  std::function<Outcome()> run;
};

std::size_t g_jobs = 0;
fs::path g_work;
constexpr std::uint64_t kSeed = 1;

std::string fmt(double v, int digits = 4) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*g", digits, v);
  return buf;
}

fs::path fresh(const std::string& name) {
  const fs::path p = g_work / name;
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

RunOptions options(const fs::path& dir, std::size_t jobs) {
  RunOptions o;
  o.out_dir = dir.string();
  o.seed = kSeed;
  o.jobs = jobs;
  return o;
}

double median_of(std::vector<double> v) {
  if (v.empty()) return std::nan("");
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 == 1 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

bool in_range(double v, double lo, double hi) { return v >= lo && v <= hi; }

// ---------------------------------------------------------------- 1, 2

Outcome lorenz_climate() {
  const Trajectory t = std::get<Trajectory>(generate(Lorenz{}, kSeed, 10000, 10000));
  const double lam = lyapunov_rosenstein(t);
  const double cd = correlation_dimension(t);
  return {in_range(lam, 0.75, 1.05) && in_range(cd, 1.9, 2.2),
          "lambda=" + fmt(lam) + " (want [0.75, 1.05]), cdim=" + fmt(cd) + " (want [1.9, 2.2])"};
}

Outcome thomas_chaoticity() {
  IntegratorConfig ic;
  ic.dt_sample = 0.1;
  const Trajectory t = std::get<Trajectory>(generate(make_system(Thomas{}), kSeed, 50000, 10000, ic));
  const double lam = lyapunov_rosenstein(t);
  return {in_range(lam, -0.02, 0.05), "lambda=" + fmt(lam) + " at dt=0.1 (want [-0.02, 0.05])"};
}

// ---------------------------------------------------------------- 3

Outcome matching_peak() {
  const fs::path dir = fresh("c3");
  const EtaSweepConfig cfg = eta_sweep_config_from_json(Json::parse(R"({"xi": ["132/50", "160/50", "200/50"]})"));
  run_eta_sweep(cfg, options(dir, g_jobs));
  const CsvTable s = read_csv_table((dir / "summary.csv").string());
  const std::size_t c_xn = s.column("xi_num"), c_xd = s.column("xi_den"), c_en = s.column("eta_num"),
                    c_ed = s.column("eta_den"), c_fh = s.column("fh_mean");
  std::map<double, std::vector<std::pair<double, double>>> by_xi;  // xi -> (eta, fh_mean)
  for (const Row& r : s.rows) {
    by_xi[parse_cell(r[c_xn]) / parse_cell(r[c_xd])].emplace_back(parse_cell(r[c_en]) / parse_cell(r[c_ed]),
                                                                  parse_cell(r[c_fh]));
  }
  bool pass = by_xi.size() == 3;
  std::string detail;
  for (const auto& [xi, curve] : by_xi) {
    double best = -1.0;
    for (const auto& [eta, fh] : curve) best = std::max(best, fh);
    // Every eta that attains the maximum has to sit in the window.
    std::vector<double> argmax;
    for (const auto& [eta, fh] : curve) {
      if (fh == best) argmax.push_back(eta);
    }
    bool ok = curve.size() == 25;
    for (double eta : argmax) ok = ok && std::fabs(eta - xi) <= 0.08 + 1e-9;
    pass = pass && ok;
    detail += (detail.empty() ? "" : "; ") + std::string("xi=") + fmt(xi, 3) + " argmax eta=";
    for (std::size_t i = 0; i < argmax.size(); ++i) detail += (i ? "," : "") + fmt(argmax[i], 3);
    detail += " fh=" + fmt(best, 4) + (ok ? "" : " (off)");
  }
  return {pass, detail};
}

// ---------------------------------------------------------------- 4

Outcome smallest_transition() {
  const fs::path dir = fresh("c4");
  const MultiExponentConfig cfg = multi_exponent_config_from_json(Json::parse(R"({"trajectories": 10})"), 2);
  const RunSummary sum = run_multi_exponent(cfg, options(dir, g_jobs));
  const CsvTable t = read_csv_table((dir / "results.csv").string());
  const std::size_t c_traj = t.column("traj"), c_ds = t.column("d_s"), c_err = t.column("cdim_err");
  std::set<std::string> trajs;
  std::vector<double> above, below;
  for (const Row& r : t.rows) {
    trajs.insert(r[c_traj]);
    const double ds = parse_cell(r[c_ds]);
    const double e = parse_cell(r[c_err]);
    const double err = std::isfinite(e) ? e : HUGE_VAL;
    if (ds >= 0.1 - 1e-9) above.push_back(err);
    if (ds <= -0.3 + 1e-9) below.push_back(err);
  }
  const double m_above = median_of(above), m_below = median_of(below);
  const bool pass = !sum.partial && trajs.size() == 10 && m_above < 0.15 && m_below > 0.3;
  return {pass, std::to_string(trajs.size()) + "/10 trajectories" + (sum.partial ? " (budget exhausted)" : "") +
                    ", median err eta>=xi_s+0.1: " + fmt(m_above) + " over " + std::to_string(above.size()) +
                    " cells (want < 0.15), eta<=xi_s-0.3: " + fmt(m_below) + " over " +
                    std::to_string(below.size()) + " cells (want > 0.3)"};
}

// ---------------------------------------------------------------- 5

struct ProbeCase {
  std::string name;
  std::string source;
  double target;
  double tol;
};

Outcome table_reconstruction() {
  const std::vector<ProbeCase> cases{
      {"Lorenz", R"({"system": {"type": "lorenz"}})", 2.0, 0.2},
      {"Halvorsen", R"({"system": {"type": "halvorsen", "a": 1.3, "xi": "100/50"}})", 2.0, 0.2},
      {"Thomas", R"({"system": {"type": "thomas"}, "integrator": {"dt": 0.1}})", 3.0, 0.3},
  };
  bool pass = true;
  std::string detail;
  for (const ProbeCase& pc : cases) {
    const ProbeRecipeConfig cfg =
        probe_recipe_config_from_json(Json::parse(std::string(R"({"source": )") + pc.source + "}"));
    const Trajectory series = load_probe_source(cfg.source, kSeed);
    ProbeConfig p = cfg.probe;
    p.minrc.input_dim = series.dim();
    p.seed = kSeed;
    p.jobs = g_jobs;
    const ProbeReport rep = probe_smallest_nonlinearity(series, p);
    std::string line = pc.name + ": cdim_true=" + fmt(rep.cdim_true);
    bool ok = false;
    if (rep.mu_recon) {
      const double mu = rep.mu_recon->value();
      const ProbeRecord* at = nullptr;
      for (const ProbeRecord& r : rep.records) {
        if (r.eta == *rep.mu_recon) at = &r;
      }
      const bool band = at != nullptr && std::isfinite(at->surrogate_mean) && std::isfinite(at->surrogate_std);
      const bool outside = band && std::fabs(rep.cdim_true - at->surrogate_mean) > at->surrogate_std;
      ok = std::fabs(mu - pc.target) <= pc.tol + 1e-9 && outside;
      line += " mu=" + fmt(mu, 3) + " (want " + fmt(pc.target, 2) + "+-" + fmt(pc.tol, 2) + ")";
      line += band ? " band " + fmt(at->surrogate_mean) + "+-" + fmt(at->surrogate_std) + (outside ? " outside" : " inside")
                   : " no surrogate band at mu";
    } else {
      line += " no exponent qualified";
    }
    pass = pass && ok;
    detail += (detail.empty() ? "" : "; ") + line;
  }
  return {pass, detail};
}

// ---------------------------------------------------------------- 6

Outcome library_ordering() {
  const fs::path dir = fresh("c6");
  const LibraryCompareConfig cfg = library_compare_config_from_json(Json::object());
  run_library_compare(cfg, options(dir, g_jobs));
  const std::vector<ArmStats> s = summarize_library_compare((dir / "results.csv").string());
  if (s.size() != 3) return {false, "expected three arms"};
  const ArmStats &small = s[0], &frac = s[1], &large = s[2];
  // Standard error of the difference of the two means.
  const double pooled = std::sqrt(small.sem * small.sem + frac.sem * frac.sem);
  const bool pass = small.runs == 100 && frac.runs == 100 && large.runs == 100 && small.mean < frac.mean &&
                    frac.mean < large.mean && frac.mean - small.mean >= pooled;
  return {pass, small.name + "=" + fmt(small.mean) + " < " + frac.name + "=" + fmt(frac.mean) + " < " + large.name +
                    "=" + fmt(large.mean) + ", gap " + fmt(frac.mean - small.mean) + " vs pooled SE " + fmt(pooled) +
                    " (" + std::to_string(small.runs) + " reps)"};
}

// ---------------------------------------------------------------- 7

Outcome oracle_equivalences() {
  std::vector<std::string> failed;
  Rng rng(20240611);

  double ridge_worst = 0.0;
  for (int trial = 0; trial < 40; ++trial) {
    const std::size_t n = 2 + rng.below(60), m = 1 + rng.below(4);
    const std::size_t rows = n / 2 + rng.below(3 * n);
    const double beta = gen::magnitude(rng, -8.0, 0.0);
    std::vector<double> col_scale(n);
    for (double& s : col_scale) s = gen::magnitude(rng, -3.0, 3.0);
    RidgeAccumulator acc(n, m);
    for (std::size_t t = 0; t < rows; ++t) {
      auto f = gen::uniform_vector(rng, n);
      for (std::size_t j = 0; j < n; ++j) f[j] *= col_scale[j];
      acc.add(f, gen::uniform_vector(rng, m));
    }
    ridge_worst = std::max(ridge_worst, oracle::normal_equation_residual(acc.solve(beta), acc.gram(), acc.cross(), beta));
  }
  if (!(ridge_worst < 1e-8)) failed.push_back("ridge");

  double step_worst = 0.0;
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t d = 1 + rng.below(4), b = 2 + rng.below(5);
    const MinRC m(MinRCConfig{d, b, rng.uniform(0.0, 1.5), 1e-6, {}});
    const auto r = gen::uniform_vector(rng, m.state_dim(), -5.0, 5.0);
    const auto x = gen::uniform_vector(rng, d, -20.0, 20.0);
    const auto got = m.step(r, x);
    const auto want = oracle::dense_minrc_step(m, r, x);
    double scale = 1.0;
    for (double v : want) scale = std::max(scale, std::fabs(v));
    for (std::size_t i = 0; i < got.size(); ++i) step_worst = std::max(step_worst, std::fabs(got[i] - want[i]) / scale);
  }
  if (!(step_worst <= 1e-14)) failed.push_back("block step");

  bool counts_equal = true;
  const Trajectory lor = std::get<Trajectory>(generate(Lorenz{}, 8, 5000, 10000));
  const std::vector<double> pts(lor.values().begin(), lor.values().end());
  for (std::size_t window : {std::size_t{0}, std::size_t{37}, CorrelationDimensionConfig::kAutoWindow}) {
    CorrelationDimensionConfig cfg;
    cfg.theiler_window = window;
    const CorrelationSum cs = correlation_sum(lor, cfg);
    counts_equal = counts_equal && cs.pairs == oracle::brute_pair_counts(pts, 3, cs.radii, cs.theiler_window);
  }
  if (!counts_equal) failed.push_back("correlation sum");

  double amp_worst = 0.0, power_worst = 0.0;
  for (std::size_t n : {std::size_t{5}, std::size_t{64}, std::size_t{257}, std::size_t{1000}}) {
    std::vector<double> x(n);
    double v = 0.0;
    for (double& s : x) s = (v = 0.8 * v + gen::normal(rng)) + 3.0;
    const auto s = ft_surrogate(x, 1000 + n);
    const auto ax = oracle::dft_amplitudes(x), as = oracle::dft_amplitudes(s);
    const double peak = *std::max_element(ax.begin(), ax.end());
    for (std::size_t k = 0; k < ax.size(); ++k) amp_worst = std::max(amp_worst, std::fabs(ax[k] - as[k]) / peak);
    power_worst = std::max(power_worst, gen::rel_err(oracle::sum_sq(x), oracle::sum_sq(s)));
  }
  if (!(amp_worst <= 1e-10 && power_worst <= 1e-10)) failed.push_back("surrogate spectrum");

  double pow_worst = 0.0;
  const int dens[] = {1, 2, 5, 10, 25, 50, 100};
  for (int i = 0; i < 1000; ++i) {
    const int d = dens[rng.below(7)];
    const int n = 2 * static_cast<int>(1 + rng.below(static_cast<std::uint64_t>(3 * d)));
    const double x = gen::signed_magnitude(rng, -3.0, 3.0);
    pow_worst = std::max(pow_worst, gen::rel_err(frac_pow(x, FracExponent(n, d)), oracle::mpfr_frac_pow(x, n, d)));
  }
  if (!(pow_worst < 1e-12)) failed.push_back("frac_pow");

  std::string detail = "ridge " + fmt(ridge_worst, 2) + ", step " + fmt(step_worst, 2) + ", pair counts " +
                       (counts_equal ? "exact" : "differ") + ", spectrum " + fmt(amp_worst, 2) + "/power " +
                       fmt(power_worst, 2) + ", frac_pow " + fmt(pow_worst, 2);
  for (const auto& f : failed) detail += "; " + f + " out of tolerance";
  return {failed.empty(), detail};
}

// ---------------------------------------------------------------- 8

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

std::map<std::string, std::string> tree_contents(const fs::path& root) {
  std::map<std::string, std::string> out;
  for (const auto& e : fs::recursive_directory_iterator(root)) {
    if (e.is_regular_file()) out[fs::relative(e.path(), root).string()] = slurp(e.path());
  }
  return out;
}

Outcome determinism() {
  const fs::path root = fresh("c8");
  const std::map<std::string, std::string> configs{
      {"generate", R"({"n_steps": 2000, "transient": 500})"},
      {"lyap-grid", R"({"a_values": [1.3, 2.0], "xi": ["100/50", "110/50"], "n_steps": 5000, "transient": 1000})"},
      {"eta-sweep", R"({"system": {"type": "halvorsen", "a": 1.3}, "xi": ["100/50", "120/50"], "eta_window": 2,
        "eta_step": 4, "repetitions": 2, "offset_range": 500, "reference_len": 3000,
        "model": {"sync_len": 200, "train_len": 800, "predict_len": 1000, "transient": 2000}})"},
      {"two-exp", R"({"a": 1.3, "numerator_min": 96, "numerator_max": 110, "trajectories": 2, "reference_len": 3000,
        "model": {"eta": {"first": 90, "last": 120, "step": 10}, "sync_len": 200, "train_len": 800,
                  "predict_len": 1500, "transient": 2000}})"},
      {"three-exp", R"({"a": 1.3, "numerator_min": 96, "numerator_max": 110, "trajectories": 2, "reference_len": 3000,
        "model": {"eta": {"first": 90, "last": 120, "step": 10}, "sync_len": 200, "train_len": 800,
                  "predict_len": 1500, "transient": 2000}})"},
      {"probe", R"({"source": {"system": {"type": "lorenz"}, "n_steps": 3000},
        "probe": {"eta_grid": {"first": 90, "last": 110, "step": 10}, "surrogates": 4, "predict_len": 1500}})"},
      {"library-compare", R"({"repetitions": 2, "sync_len": 100, "train_len": 500, "predict_len": 300,
        "reference_len": 3000, "arms": [{"name": "a", "reservoir_dim": 30},
        {"name": "b", "reservoir_dim": 30, "library": ["50/50", "100/50"]}, {"name": "c", "reservoir_dim": 60}]})"},
  };
  const std::string cli = FRACRC_CLI;
  const auto run = [&](const std::string& recipe, const fs::path& config, const fs::path& out, int jobs) {
    const std::string cmd = cli + " " + recipe + " --config " + config.string() + " --out " + out.string() +
                            " --seed 5 --jobs " + std::to_string(jobs) + " -q > /dev/null 2>&1";
    const int rc = std::system(cmd.c_str());
    return WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
  };
  std::vector<std::string> bad;
  std::size_t files = 0;
  const auto compare = [&](const std::string& recipe, const fs::path& config) {
    const fs::path a = root / recipe / "a", b = root / recipe / "b";
    const int ra = run(recipe, config, a, 1), rb = run(recipe, config, b, 2);
    const auto ca = tree_contents(a), cb = tree_contents(b);
    // Exit 2 (partial) is fine as long as both runs agree.
    if (ra != rb || (ra != 0 && ra != 2) || ca.empty() || ca != cb) {
      bad.push_back(recipe + " (exit " + std::to_string(ra) + "/" + std::to_string(rb) + ")");
    }
    files += ca.size();
  };
  for (const auto& [recipe, json] : configs) {
    const fs::path config = root / (recipe + ".json");
    std::ofstream(config) << json;
    compare(recipe, config);
  }
  const fs::path fwhm_config = root / "fwhm.json";
  std::ofstream(fwhm_config) << Json{{"input", (root / "eta-sweep" / "a" / "summary.csv").string()}}.dump();
  compare("fwhm", fwhm_config);

  std::string detail = "8 recipes rerun at --jobs 1 and 2, " + std::to_string(files) + " files compared";
  for (const auto& r : bad) detail += "; differs or failed: " + r;
  return {bad.empty(), detail};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Acceptance criteria"};
  int only = 0;
  std::size_t jobs = 0;
  std::string work = (fs::temp_directory_path() / "fracrc_acceptance").string();
  app.add_option("--only", only, "Run a single criterion (1-8)")->check(CLI::Range(1, 8));
  app.add_option("--jobs", jobs, "Worker threads, 0 for all cores");
  app.add_option("--work", work, "Scratch directory for recipe outputs");
  CLI11_PARSE(app, argc, argv);
  g_jobs = resolve_jobs(jobs);
  g_work = work;

  const std::vector<Criterion> criteria{
      {1, "Lorenz climate", 30, lorenz_climate},
      {2, "Thomas near-zero chaoticity", 60, thomas_chaoticity},
      {3, "nonlinearity-matching peak", 20 * 60, matching_peak},
      {4, "smallest-nonlinearity transition", 30 * 60, smallest_transition},
      {5, "smallest-nonlinearity reconstruction", 30 * 60, table_reconstruction},
      {6, "smart-library ordering", 20 * 60, library_ordering},
      {7, "oracle equivalences", 60, oracle_equivalences},
      {8, "determinism", 10 * 60, determinism},
  };
  int failures = 0;
  for (const Criterion& c : criteria) {
    if (only != 0 && c.id != only) continue;
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("error: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    const bool in_time = secs <= c.budget_seconds;
    const bool pass = o.pass && in_time;
    if (!pass) ++failures;
    std::cout << "criterion " << c.id << " (" << c.title << "): " << (pass ? "PASS" : "FAIL") << "  " << o.detail
              << "; " << fmt(secs, 3) << " s of " << fmt(c.budget_seconds, 4) << " s" << (in_time ? "" : " OVER BUDGET")
              << std::endl;
  }
  return failures == 0 ? 0 : 1;
}
