#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "fracrc/harness/recipes.hpp"
#include "fracrc/harness/results_table.hpp"
#include "fracrc/harness/thread_pool.hpp"

using namespace fracrc;
namespace fs = std::filesystem;

namespace {

fs::path fresh_dir(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("fracrc_test_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

RunOptions options(const fs::path& dir, std::uint64_t seed = 7, std::size_t jobs = 1, bool resume = false) {
  RunOptions o;
  o.out_dir = dir.string();
  o.seed = seed;
  o.jobs = jobs;
  o.resume = resume;
  return o;
}

// Runs `fn` into two fresh directories and checks every listed table is byte-identical.
template <class Fn>
void check_rerun_identical(const std::string& name, const std::vector<std::string>& files, Fn fn) {
  const fs::path a = fresh_dir(name + "_a"), b = fresh_dir(name + "_b");
  fn(a, std::size_t{1});
  fn(b, std::size_t{3});
  for (const auto& f : files) {
    INFO(name, ": ", f);
    REQUIRE(fs::exists(a / f));
    CHECK(slurp(a / f) == slurp(b / f));
  }
}

EtaSweepConfig tiny_sweep() {
  return eta_sweep_config_from_json(Json::parse(R"({
    "system": {"type": "halvorsen", "a": 1.3},
    "xi": ["100/50", "120/50"], "eta_window": 2, "eta_step": 4, "repetitions": 2,
    "offset_range": 500, "reference_len": 3000,
    "model": {"sync_len": 200, "train_len": 800, "predict_len": 1000, "transient": 2000}
  })"));
}

}  // namespace

TEST_CASE("cells") {
  CHECK(cell(0.1) == "0.1");
  CHECK(cell(std::nan("")) == "");
  CHECK(cell(std::uint64_t{18446744073709551615ULL}) == "18446744073709551615");
  CHECK(cell(-3) == "-3");
  CHECK(cell(true) == "1");
  CHECK(std::isnan(parse_cell("")));
  CHECK(parse_cell("2.5") == 2.5);
}

TEST_CASE("sort_rows compares numbers numerically") {
  std::vector<Row> rows{{"10", "b"}, {"9", "a"}, {"10", "a"}, {"x", "z"}};
  sort_rows(rows, 2);
  CHECK(rows[0] == Row{"9", "a"});
  CHECK(rows[1] == Row{"10", "a"});
  CHECK(rows[2] == Row{"10", "b"});
}

TEST_CASE("results writer persists, deduplicates and resumes") {
  const fs::path dir = fresh_dir("writer");
  {
    ResultsWriter w(dir.string(), "results", {"k", "v"}, 1, false);
    w.append({"2", "b"});
    w.append({"1", "a"});
    w.append({"1", "dup"});
    CHECK(w.completed() == 2);
    CHECK(fs::exists(dir / "results.partial.csv"));
  }
  // a torn trailing line from an interrupted run is dropped
  std::ofstream(dir / "results.partial.csv", std::ios::app) << "3,c";
  {
    ResultsWriter w(dir.string(), "results", {"k", "v"}, 1, true);
    CHECK(w.done({"1"}));
    CHECK(w.done({"2"}));
    CHECK_FALSE(w.done({"3"}));
    w.append({"3", "c"});
    const std::string path = w.finalize();
    CHECK(slurp(path) == "k,v\n1,a\n2,b\n3,c\n");
    CHECK_FALSE(fs::exists(dir / "results.partial.csv"));
  }
  {
    ResultsWriter w(dir.string(), "results", {"k", "v"}, 1, false);
    CHECK(w.completed() == 0);
  }
  CHECK_THROWS_AS(ResultsWriter(dir.string(), "results", {"k", "other"}, 1, true), ConfigError);
}

TEST_CASE("manifest guards resumption") {
  const fs::path dir = fresh_dir("manifest");
  const Json cfg{{"x", 1}};
  write_manifest(dir.string(), "demo", cfg, 5, "complete");
  const Json m = read_json_file((dir / "manifest.json").string());
  CHECK(m.at("config_hash") == config_hash(cfg));
  CHECK(m.at("seed") == 5);
  CHECK(m.at("version") == code_version());
  CHECK_NOTHROW(check_resume_manifest(dir.string(), cfg, 5));
  CHECK_THROWS_AS(check_resume_manifest(dir.string(), cfg, 6), ConfigError);
  CHECK_THROWS_AS(check_resume_manifest(dir.string(), Json{{"x", 2}}, 5), ConfigError);
  CHECK(fnv1a("") == 0xcbf29ce484222325ULL);
  CHECK(fnv1a("a") == 0xaf63dc4c8601ec8cULL);
}

TEST_CASE("parallel_for") {
  std::vector<int> hit(100, 0);
  parallel_for(100, 4, [&](std::size_t i) { hit[i] += 1; });
  for (int h : hit) CHECK(h == 1);
  CHECK_THROWS_AS(parallel_for(10, 2, [](std::size_t i) {
                    if (i == 3) throw ConfigError("stop");
                  }),
                  ConfigError);
  CHECK(resolve_jobs(0) >= 1);
  CHECK(resolve_jobs(3) == 3);
}

TEST_CASE("level interval") {
  // triangle peaking at x = 5 with base [2, 8]
  std::vector<double> x, y;
  for (int i = 0; i <= 10; ++i) {
    x.push_back(i);
    y.push_back(std::max(0.0, 1.0 - std::fabs(i - 5.0) / 3.0));
  }
  const FwhmInterval half = level_interval(x, y, 0.5);
  CHECK(half.peak == 5.0);
  CHECK(half.lo == doctest::Approx(3.5));
  CHECK(half.hi == doctest::Approx(6.5));
  CHECK_FALSE(half.lo_open);
  const FwhmInterval q = level_interval(x, y, 0.75);
  CHECK(q.hi - q.lo == doctest::Approx(1.5));
  const FwhmInterval top = level_interval(x, y, 1.0);
  CHECK(top.lo == 5.0);
  CHECK(top.hi == 5.0);
  CHECK(level_interval(x, y, 1.5).empty);

  const FwhmInterval edge = level_interval({0, 1, 2}, {1.0, 0.9, 0.1}, 0.5);
  CHECK(edge.lo_open);
  CHECK(edge.lo == 0.0);
  CHECK(edge.hi == doctest::Approx(1.5));
}

TEST_CASE("lyap-grid regimes") {
  const fs::path dir = fresh_dir("lyapgrid");
  const LyapGridConfig cfg =
      lyap_grid_config_from_json(Json::parse(R"({"a_values": [1.3, 10.0, 3.98], "xi": ["100/50", "132/50"]})"));
  const RunSummary s = run_lyap_grid(cfg, options(dir));
  CHECK(s.failed == 0);
  const CsvTable t = read_csv_table((dir / "results.csv").string());
  REQUIRE(t.rows.size() == 6);
  const auto find = [&](const std::string& a, const std::string& xi) {
    for (const Row& r : t.rows) {
      if (r[0] == a && r[1] == xi) return r;
    }
    FAIL("missing cell");
    return Row{};
  };
  const std::size_t regime = t.column("regime"), lyap = t.column("lyap");
  // canonical Halvorsen is chaotic
  CHECK(find("1.3", "100")[regime] == "attractor");
  CHECK(parse_cell(find("1.3", "100")[lyap]) > 0.5);
  // heavy damping settles on the origin
  CHECK(find("10", "100")[regime] == "fixed_point");
  CHECK(find("10", "132")[regime] == "fixed_point");
  // a = 3.98 with xi = 2.64 settles on a limit cycle at these tolerances
  CHECK(find("3.98", "132")[regime] == "attractor");
  CHECK(std::fabs(parse_cell(find("3.98", "132")[lyap])) < 0.05);
}

TEST_CASE("recipes rerun byte-identically") {
  check_rerun_identical("generate", {"trajectory.csv", "manifest.json"}, [](const fs::path& d, std::size_t jobs) {
    const GenerateConfig g = generate_config_from_json(Json::parse(R"({"n_steps": 500, "transient": 100})"));
    run_generate(g, options(d, 11, jobs));
  });
  check_rerun_identical("lyap", {"results.csv", "manifest.json"}, [](const fs::path& d, std::size_t jobs) {
    const LyapGridConfig c = lyap_grid_config_from_json(
        Json::parse(R"({"a_values": [1.3, 2.0], "xi": ["100/50", "110/50"], "n_steps": 5000, "transient": 1000})"));
    run_lyap_grid(c, options(d, 1, jobs));
  });
  check_rerun_identical("sweep", {"results.csv", "summary.csv", "manifest.json"},
                        [](const fs::path& d, std::size_t jobs) { run_eta_sweep(tiny_sweep(), options(d, 3, jobs)); });
  check_rerun_identical("twoexp", {"results.csv", "summary.csv", "draws.csv"}, [](const fs::path& d, std::size_t jobs) {
    const MultiExponentConfig c = multi_exponent_config_from_json(Json::parse(R"({
      "a": 1.3, "numerator_min": 96, "numerator_max": 110, "trajectories": 2, "reference_len": 3000,
      "model": {"eta": {"first": 90, "last": 120, "step": 10}, "sync_len": 200, "train_len": 800,
                "predict_len": 1500, "transient": 2000}})"),
                                                                  2);
    run_multi_exponent(c, options(d, 5, jobs));
    CHECK_FALSE(read_csv_table((d / "results.csv").string()).rows.empty());
  });
  check_rerun_identical("probe", {"probe.csv", "probe.json"}, [](const fs::path& d, std::size_t jobs) {
    const ProbeRecipeConfig c = probe_recipe_config_from_json(Json::parse(R"({
      "source": {"system": {"type": "lorenz"}, "n_steps": 3000},
      "probe": {"eta_grid": {"first": 90, "last": 110, "step": 10}, "surrogates": 4, "predict_len": 1500}})"));
    run_probe(c, options(d, 2, jobs));
  });
  check_rerun_identical("library", {"results.csv", "summary.csv"}, [](const fs::path& d, std::size_t jobs) {
    const LibraryCompareConfig c = library_compare_config_from_json(Json::parse(R"({
      "repetitions": 2, "sync_len": 100, "train_len": 500, "predict_len": 300, "reference_len": 3000,
      "arms": [{"name": "a", "reservoir_dim": 30}, {"name": "b", "reservoir_dim": 30, "library": ["50/50", "100/50"]},
               {"name": "c", "reservoir_dim": 60}]})"));
    run_library_compare(c, options(d, 9, jobs));
  });
}

TEST_CASE("resumed sweep reproduces the uninterrupted table") {
  const fs::path full = fresh_dir("resume_full"), part = fresh_dir("resume_part");
  run_eta_sweep(tiny_sweep(), options(full));
  const std::string want = slurp(full / "results.csv");

  // keep the manifest and the first half of the rows as an interrupted run
  fs::copy_file(full / "manifest.json", part / "manifest.json");
  std::istringstream lines(want);
  std::ofstream partial(part / "results.partial.csv");
  std::string line;
  for (int i = 0; std::getline(lines, line) && i < 6; ++i) partial << line << '\n';
  partial.close();

  const RunSummary s = run_eta_sweep(tiny_sweep(), options(part, 7, 1, true));
  CHECK(s.skipped == 5);
  CHECK(slurp(part / "results.csv") == want);
  CHECK(slurp(part / "summary.csv") == slurp(full / "summary.csv"));

  CHECK_THROWS_AS(run_eta_sweep(tiny_sweep(), options(part, 8, 1, true)), ConfigError);
}

TEST_CASE("single-eta sweep normalizes to one") {
  const fs::path dir = fresh_dir("single");
  EtaSweepConfig c = tiny_sweep();
  c.xi = {FracExponent(100)};
  c.eta_window = 0;
  c.model.eta = {FracExponent(100)};
  run_eta_sweep(c, options(dir));
  const CsvTable t = read_csv_table((dir / "summary.csv").string());
  REQUIRE(t.rows.size() == 1);
  CHECK(t.rows[0][t.column("fh_norm")] == "1");
}

TEST_CASE("exhausted resampling budget gives a partial table") {
  const fs::path dir = fresh_dir("budget");
  const MultiExponentConfig c = multi_exponent_config_from_json(Json::parse(R"({
    "a": 1.3, "numerator_min": 96, "numerator_max": 110, "trajectories": 2, "budget_factor": 1.5,
    "min_lyapunov": 100.0, "reference_len": 3000,
    "model": {"eta": ["100/50"], "sync_len": 200, "train_len": 800, "predict_len": 1000, "transient": 2000}})"),
                                                                2);
  const RunSummary s = run_multi_exponent(c, options(dir));
  CHECK(s.partial);
  CHECK_FALSE(s.warnings.empty());
  const CsvTable draws = read_csv_table((dir / "draws.csv").string());
  CHECK(draws.rows.size() == 3);
}

TEST_CASE("fwhm recipe") {
  const fs::path dir = fresh_dir("fwhm");
  std::ofstream(dir / "summary.csv") << "xi_num,xi_den,rho,eta_num,eta_den,fh_norm\n"
                                        "100,50,0.001,90,50,0.2\n100,50,0.001,100,50,1\n100,50,0.001,110,50,0.4\n";
  const FwhmConfig c = fwhm_config_from_json(Json{{"input", (dir / "summary.csv").string()}, {"level", 0.5}});
  run_fwhm(c, options(dir));
  const CsvTable t = read_csv_table((dir / "fwhm.csv").string());
  REQUIRE(t.rows.size() == 1);
  CHECK(parse_cell(t.rows[0][t.column("eta_lo")]) == doctest::Approx(1.8 + 0.3 / 0.8 * 0.2));
  CHECK(parse_cell(t.rows[0][t.column("eta_hi")]) == doctest::Approx(2.2 - 0.1 / 0.6 * 0.2));
}

#ifdef FRACRC_CLI
TEST_CASE("command-line exit codes") {
  const fs::path dir = fresh_dir("cli");
  const std::string cli = FRACRC_CLI;
  const auto run = [&](const std::string& args) {
    const int rc = std::system((cli + " " + args + " -q > /dev/null 2>&1").c_str());
    return WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
  };
  std::ofstream(dir / "ok.json") << R"({"n_steps": 100, "transient": 10})";
  std::ofstream(dir / "bad.json") << R"({"n_step": 100})";
  std::ofstream(dir / "broken.json") << "{";
  std::ofstream(dir / "budget.json") << R"({"a": 1.3, "numerator_min": 96, "numerator_max": 100, "trajectories": 1,
    "budget_factor": 1, "min_lyapunov": 100.0, "reference_len": 3000,
    "model": {"eta": ["100/50"], "sync_len": 200, "train_len": 800, "predict_len": 1000, "transient": 2000}})";
  CHECK(run("generate --config " + (dir / "ok.json").string() + " --out " + (dir / "g").string()) == 0);
  CHECK(fs::exists(dir / "g" / "trajectory.csv"));
  CHECK(run("generate --config " + (dir / "bad.json").string() + " --out " + (dir / "b").string()) == 1);
  CHECK(run("generate --config " + (dir / "broken.json").string() + " --out " + (dir / "b").string()) == 1);
  CHECK(run("generate --config /nonexistent.json --out " + (dir / "b").string()) == 1);
  CHECK(run("no-such-command") == 1);
  CHECK(run("two-exp --config " + (dir / "budget.json").string() + " --out " + (dir / "p").string()) == 2);
}
#endif
