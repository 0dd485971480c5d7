// Command-line front end for the experiment recipes.

#include <CLI11.hpp>
#include <functional>
#include <iostream>
#include <map>
#include <optional>

#include "fracrc/harness/recipes.hpp"

namespace {

using fracrc::Json;
using fracrc::RunOptions;
using fracrc::RunSummary;

using Runner = std::function<RunSummary(const Json&, const RunOptions&)>;

const std::map<std::string, std::pair<std::string, Runner>>& recipes() {
  static const std::map<std::string, std::pair<std::string, Runner>> table{
      {"generate",
       {"Integrate a system and write its trajectory",
        [](const Json& j, const RunOptions& o) { return run_generate(fracrc::generate_config_from_json(j), o); }}},
      {"lyap-grid",
       {"Largest Lyapunov exponent over the Halvorsen (a, xi) grid",
        [](const Json& j, const RunOptions& o) { return run_lyap_grid(fracrc::lyap_grid_config_from_json(j), o); }}},
      {"eta-sweep",
       {"Forecast horizon and climate over data exponent xi and model exponent eta",
        [](const Json& j, const RunOptions& o) { return run_eta_sweep(fracrc::eta_sweep_config_from_json(j), o); }}},
      {"two-exp",
       {"Eta sweeps on Halvorsen flows with xi1 = xi2 != xi3",
        [](const Json& j, const RunOptions& o) {
          return run_multi_exponent(fracrc::multi_exponent_config_from_json(j, 2), o);
        }}},
      {"three-exp",
       {"Eta sweeps on Halvorsen flows with three random exponents",
        [](const Json& j, const RunOptions& o) {
          return run_multi_exponent(fracrc::multi_exponent_config_from_json(j, 3), o);
        }}},
      {"probe",
       {"Estimate the smallest nonlinearity in a series against a surrogate background",
        [](const Json& j, const RunOptions& o) { return run_probe(fracrc::probe_recipe_config_from_json(j), o); }}},
      {"library-compare",
       {"Forecast horizon of plain, fractional and large classic reservoirs",
        [](const Json& j, const RunOptions& o) {
          return run_library_compare(fracrc::library_compare_config_from_json(j), o);
        }}},
      {"fwhm",
       {"Width of the eta interval above a level of the normalized forecast horizon",
        [](const Json& j, const RunOptions& o) { return run_fwhm(fracrc::fwhm_config_from_json(j), o); }}},
  };
  return table;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Fractional-nonlinearity reservoir computing experiments"};
  app.require_subcommand(1);
  std::string config_path, out_dir = ".";
  std::optional<std::uint64_t> seed;
  std::size_t jobs = 1;
  bool resume = false, quiet = false;
  for (const auto& [name, entry] : recipes()) {
    CLI::App* sub = app.add_subcommand(name, entry.first);
    sub->add_option("--config", config_path, "JSON config file (defaults apply to absent keys)")->check(CLI::ExistingFile);
    sub->add_option("--out", out_dir, "Output directory")->capture_default_str();
    sub->add_option("--seed", seed, "Master seed (overrides the config's seed)");
    sub->add_option("--jobs", jobs, "Worker threads, 0 for all cores")->capture_default_str();
    sub->add_flag("--resume", resume, "Keep completed cells from a previous run in --out");
    sub->add_flag("-q,--quiet", quiet, "No progress output");
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }
  const std::string name = app.get_subcommands().front()->get_name();
  try {
    Json config = Json::object();
    if (!config_path.empty()) config = fracrc::read_json_file(config_path);
    RunOptions opt;
    opt.out_dir = out_dir;
    opt.jobs = jobs;
    opt.resume = resume;
    opt.log = quiet ? nullptr : &std::cerr;
    if (seed) {
      opt.seed = *seed;
    } else if (config.is_object() && config.contains("seed")) {
      if (!config.at("seed").is_number_unsigned()) throw fracrc::ConfigError("config: seed must be a non-negative integer");
      opt.seed = config.at("seed").get<std::uint64_t>();
    }
    const RunSummary s = recipes().at(name).second(config, opt);
    std::cout << name << ": " << s.cells << " cells, " << s.skipped << " resumed, " << s.failed << " failed\n";
    for (const auto& w : s.warnings) std::cout << "warning: " << w << '\n';
    for (const auto& o : s.outputs) std::cout << "wrote " << o << '\n';
    return s.partial ? 2 : 0;
  } catch (const fracrc::ConfigError& e) {
    std::cerr << "configuration error: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "run aborted: " << e.what() << '\n';
    return 2;
  }
}
