#include "fracrc/serialization.hpp"

#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

namespace fracrc {

using json_detail::check_keys;
using json_detail::read;

void json_detail::check_keys(const Json& j, std::initializer_list<const char*> allowed, const std::string& where) {
  if (!j.is_object()) throw ConfigError(where + ": expected a JSON object");
  for (const auto& item : j.items()) {
    bool ok = false;
    for (const char* k : allowed) ok = ok || item.key() == k;
    if (!ok) throw ConfigError(where + ": unknown field '" + item.key() + "'");
  }
}

namespace {

// NaN has no JSON literal; write null and read it back as NaN.
Json number(double v) { return std::isfinite(v) ? Json(v) : Json(nullptr); }

}  // namespace

Json to_json(const FracExponent& e) { return Json{{"numerator", e.numerator()}, {"denominator", e.denominator()}}; }

FracExponent exponent_from_json(const Json& j) {
  if (j.is_string()) {
    const std::string s = j.get<std::string>();
    const auto slash = s.find('/');
    try {
      if (slash == std::string::npos) throw ConfigError("");
      std::size_t used_n = 0, used_d = 0;
      const int n = std::stoi(s.substr(0, slash), &used_n);
      const int d = std::stoi(s.substr(slash + 1), &used_d);
      if (used_n != slash || used_d != s.size() - slash - 1) throw ConfigError("");
      if (n == d) return FracExponent::linear(d);
      return FracExponent(n, d);
    } catch (const ConfigError& e) {
      if (std::string(e.what()).empty()) throw ConfigError("exponent: expected \"n/d\", got \"" + s + "\"");
      throw;
    } catch (const std::exception&) {
      throw ConfigError("exponent: expected \"n/d\", got \"" + s + "\"");
    }
  }
  check_keys(j, {"numerator", "denominator"}, "exponent");
  if (!j.contains("numerator")) throw ConfigError("exponent: missing numerator");
  int n = 0, d = FracExponent::kDefaultDenominator;
  read(j, "numerator", n, "exponent");
  read(j, "denominator", d, "exponent");
  if (n == d) return FracExponent::linear(d);
  return FracExponent(n, d);
}

Json exponents_to_json(const std::vector<FracExponent>& list) {
  Json a = Json::array();
  for (const auto& e : list) a.push_back(to_json(e));
  return a;
}

std::vector<FracExponent> exponents_from_json(const Json& j) {
  if (!j.is_array()) throw ConfigError("exponent list: expected an array");
  std::vector<FracExponent> out;
  for (const auto& e : j) out.push_back(exponent_from_json(e));
  return out;
}

Json to_json(const MinRCConfig& cfg) {
  return Json{{"input_dim", cfg.input_dim},
              {"block_size", cfg.block_size},
              {"spectral_radius", cfg.spectral_radius},
              {"ridge", cfg.ridge},
              {"exponents", exponents_to_json(cfg.exponents)}};
}

MinRCConfig minrc_from_json(const Json& j, MinRCConfig base) {
  const std::string w = "minimal RC config";
  check_keys(j, {"input_dim", "block_size", "spectral_radius", "ridge", "exponents"}, w);
  read(j, "input_dim", base.input_dim, w);
  read(j, "block_size", base.block_size, w);
  read(j, "spectral_radius", base.spectral_radius, w);
  read(j, "ridge", base.ridge, w);
  if (j.contains("exponents")) base.exponents = exponents_from_json(j.at("exponents"));
  base.validate();
  return base;
}

Json to_json(const ClassicRCConfig& cfg) {
  return Json{{"input_dim", cfg.input_dim},
              {"reservoir_dim", cfg.reservoir_dim},
              {"spectral_radius", cfg.spectral_radius},
              {"ridge", cfg.ridge},
              {"edge_probability", cfg.edge_probability},
              {"weights", cfg.weights == WeightDistribution::Uniform ? "uniform" : "constant"},
              {"input_scale", cfg.input_scale},
              {"library", exponents_to_json(cfg.library)},
              {"seed", cfg.seed}};
}

ClassicRCConfig classic_from_json(const Json& j, ClassicRCConfig base) {
  const std::string w = "classic RC config";
  check_keys(j,
             {"input_dim", "reservoir_dim", "spectral_radius", "ridge", "edge_probability", "weights", "input_scale",
              "library", "seed"},
             w);
  read(j, "input_dim", base.input_dim, w);
  read(j, "reservoir_dim", base.reservoir_dim, w);
  read(j, "spectral_radius", base.spectral_radius, w);
  read(j, "ridge", base.ridge, w);
  read(j, "edge_probability", base.edge_probability, w);
  read(j, "input_scale", base.input_scale, w);
  read(j, "seed", base.seed, w);
  if (j.contains("weights")) {
    std::string s;
    read(j, "weights", s, w);
    if (s == "uniform") {
      base.weights = WeightDistribution::Uniform;
    } else if (s == "constant") {
      base.weights = WeightDistribution::Constant;
    } else {
      throw ConfigError(w + ": weights must be \"uniform\" or \"constant\"");
    }
  }
  if (j.contains("library")) {
    const Json& lib = j.at("library");
    if (lib.is_string()) {
      const std::string s = lib.get<std::string>();
      if (s == "plain") {
        base.library.clear();
      } else if (s == "fractional") {
        base.library = default_fractional_library();
      } else {
        throw ConfigError(w + ": library must be an exponent list, \"plain\" or \"fractional\"");
      }
    } else {
      base.library = exponents_from_json(lib);
    }
  }
  base.validate();
  return base;
}

Json to_json(const Readout& readout) {
  Json w = Json::array();
  for (double v : readout.weights) w.push_back(number(v));
  return Json{{"outputs", readout.outputs}, {"features", readout.features}, {"weights", w}};
}

Readout readout_from_json(const Json& j) {
  const std::string w = "readout";
  check_keys(j, {"outputs", "features", "weights"}, w);
  Readout r;
  read(j, "outputs", r.outputs, w);
  read(j, "features", r.features, w);
  read(j, "weights", r.weights, w);
  if (r.weights.size() != r.outputs * r.features) throw ConfigError("readout: weight count does not match the shape");
  return r;
}

Json to_json(const IntegratorConfig& cfg) {
  return Json{{"dt", cfg.dt_sample},
              {"rel_tol", cfg.rel_tol},
              {"abs_tol", cfg.abs_tol},
              {"divergence_bound", cfg.divergence_bound}};
}

IntegratorConfig integrator_from_json(const Json& j, IntegratorConfig base) {
  const std::string w = "integrator config";
  check_keys(j, {"dt", "rel_tol", "abs_tol", "divergence_bound"}, w);
  read(j, "dt", base.dt_sample, w);
  read(j, "rel_tol", base.rel_tol, w);
  read(j, "abs_tol", base.abs_tol, w);
  read(j, "divergence_bound", base.divergence_bound, w);
  base.validate();
  return base;
}

Json to_json(const SystemSpec& spec) {
  return std::visit(
      [](const auto& s) -> Json {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, Lorenz>) {
          return Json{{"type", "lorenz"}, {"sigma", s.sigma}, {"rho", s.rho}, {"beta", s.beta}};
        } else if constexpr (std::is_same_v<T, FractionalHalvorsen>) {
          return Json{{"type", "halvorsen"}, {"a", s.a}, {"xi", exponents_to_json({s.xi1, s.xi2, s.xi3})}};
        } else {
          return Json{{"type", "thomas"}, {"b", s.b}};
        }
      },
      spec);
}

SystemSpec system_from_json(const Json& j) {
  const std::string w = "system";
  if (!j.is_object() || !j.contains("type")) throw ConfigError("system: expected an object with a \"type\" field");
  std::string type;
  read(j, "type", type, w);
  if (type == "lorenz") {
    check_keys(j, {"type", "sigma", "rho", "beta"}, w);
    Lorenz s;
    read(j, "sigma", s.sigma, w);
    read(j, "rho", s.rho, w);
    read(j, "beta", s.beta, w);
    return make_system(s);
  }
  if (type == "halvorsen") {
    check_keys(j, {"type", "a", "xi"}, w);
    FractionalHalvorsen s;
    read(j, "a", s.a, w);
    if (j.contains("xi")) {
      const Json& xi = j.at("xi");
      std::vector<FracExponent> e;
      if (xi.is_array()) {
        e = exponents_from_json(xi);
      } else {
        e.assign(3, exponent_from_json(xi));
      }
      if (e.size() == 1) e.assign(3, e.front());
      if (e.size() != 3) throw ConfigError("system: halvorsen xi needs one or three exponents");
      s.xi1 = e[0];
      s.xi2 = e[1];
      s.xi3 = e[2];
    }
    return make_system(s);
  }
  if (type == "thomas") {
    check_keys(j, {"type", "b"}, w);
    Thomas s;
    read(j, "b", s.b, w);
    return make_system(s);
  }
  throw ConfigError("system: unknown type '" + type + "'");
}

Json to_json(const CorrelationDimensionConfig& cfg) {
  Json j{{"radii", cfg.radii},
         {"low_percentile", cfg.low_percentile},
         {"high_percentile", cfg.high_percentile},
         {"percentile_sample", cfg.percentile_sample},
         {"max_points", cfg.max_points},
         {"min_points", cfg.min_points}};
  if (cfg.theiler_window == CorrelationDimensionConfig::kAutoWindow) {
    j["theiler_window"] = "auto";
  } else {
    j["theiler_window"] = cfg.theiler_window;
  }
  return j;
}

CorrelationDimensionConfig correlation_from_json(const Json& j, CorrelationDimensionConfig base) {
  const std::string w = "correlation dimension config";
  check_keys(j,
             {"radii", "low_percentile", "high_percentile", "percentile_sample", "max_points", "min_points",
              "theiler_window"},
             w);
  read(j, "radii", base.radii, w);
  read(j, "low_percentile", base.low_percentile, w);
  read(j, "high_percentile", base.high_percentile, w);
  read(j, "percentile_sample", base.percentile_sample, w);
  read(j, "max_points", base.max_points, w);
  read(j, "min_points", base.min_points, w);
  if (j.contains("theiler_window")) {
    if (j.at("theiler_window").is_string()) {
      if (j.at("theiler_window").get<std::string>() != "auto") throw ConfigError(w + ": theiler_window must be a count or \"auto\"");
      base.theiler_window = CorrelationDimensionConfig::kAutoWindow;
    } else {
      read(j, "theiler_window", base.theiler_window, w);
    }
  }
  base.validate();
  return base;
}

Json to_json(const RosensteinConfig& cfg) {
  return Json{{"theiler_window", cfg.theiler_window}, {"follow_periods", cfg.follow_periods},
              {"follow_steps", cfg.follow_steps},     {"fit_fraction", cfg.fit_fraction},
              {"skip_fraction", cfg.skip_fraction},   {"embedding_dim", cfg.embedding_dim},
              {"embedding_lag", cfg.embedding_lag},   {"min_pairs", cfg.min_pairs}};
}

RosensteinConfig rosenstein_from_json(const Json& j, RosensteinConfig base) {
  const std::string w = "lyapunov config";
  check_keys(j,
             {"theiler_window", "follow_periods", "follow_steps", "fit_fraction", "skip_fraction", "embedding_dim",
              "embedding_lag", "min_pairs"},
             w);
  read(j, "theiler_window", base.theiler_window, w);
  read(j, "follow_periods", base.follow_periods, w);
  read(j, "follow_steps", base.follow_steps, w);
  read(j, "fit_fraction", base.fit_fraction, w);
  read(j, "skip_fraction", base.skip_fraction, w);
  read(j, "embedding_dim", base.embedding_dim, w);
  read(j, "embedding_lag", base.embedding_lag, w);
  read(j, "min_pairs", base.min_pairs, w);
  base.validate();
  return base;
}

std::vector<FracExponent> grid_from_json(const Json& j, const std::string& where) {
  if (j.is_array()) return exponents_from_json(j);
  check_keys(j, {"first", "last", "step", "denominator"}, where);
  int first = 52, last = 280, step = 2, den = FracExponent::kDefaultDenominator;
  read(j, "first", first, where);
  read(j, "last", last, where);
  read(j, "step", step, where);
  read(j, "denominator", den, where);
  return eta_grid(first, last, step, den);
}

Json to_json(const ProbeConfig& cfg) {
  return Json{{"eta_grid", exponents_to_json(cfg.eta_grid)},
              {"minrc", to_json(cfg.minrc)},
              {"sync_len", cfg.sync_len},
              {"train_len", cfg.train_len},
              {"predict_len", cfg.predict_len},
              {"surrogates", cfg.surrogates},
              {"match_tol", cfg.match_tol},
              {"correlation", to_json(cfg.correlation)}};
}

ProbeConfig probe_from_json(const Json& j, ProbeConfig base) {
  const std::string w = "probe config";
  check_keys(j,
             {"eta_grid", "minrc", "sync_len", "train_len", "predict_len", "surrogates", "match_tol", "correlation"},
             w);
  if (j.contains("eta_grid")) base.eta_grid = grid_from_json(j.at("eta_grid"), w + " eta_grid");
  if (j.contains("minrc")) {
    // The swept exponent is filled in per run.
    base.minrc = minrc_from_json(j.at("minrc"), base.minrc);
    base.minrc.exponents.clear();
  }
  read(j, "sync_len", base.sync_len, w);
  read(j, "train_len", base.train_len, w);
  read(j, "predict_len", base.predict_len, w);
  read(j, "surrogates", base.surrogates, w);
  read(j, "match_tol", base.match_tol, w);
  if (j.contains("correlation")) base.correlation = correlation_from_json(j.at("correlation"), base.correlation);
  base.validate();
  return base;
}

Json to_json(const ProbeReport& report) {
  Json records = Json::array();
  for (const ProbeRecord& r : report.records) {
    records.push_back(Json{{"eta", to_json(r.eta)},
                           {"cdim_pred", number(r.cdim_pred)},
                           {"diverged", r.diverged},
                           {"surrogate_mean", number(r.surrogate_mean)},
                           {"surrogate_std", number(r.surrogate_std)},
                           {"surrogate_failures", r.surrogate_failures},
                           {"outside_band", r.outside_band},
                           {"matches_true", r.matches_true}});
  }
  Json j{{"cdim_true", number(report.cdim_true)},
         {"verdict", report.found() ? "found" : "failed"},
         {"mu_recon", report.mu_recon ? to_json(*report.mu_recon) : Json(nullptr)},
         {"records", records}};
  return j;
}

Json parse_json(const std::string& text, const std::string& origin) {
  try {
    return Json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError(origin + ": invalid JSON: " + e.what());
  }
}

Json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_json(ss.str(), path);
}

}  // namespace fracrc
