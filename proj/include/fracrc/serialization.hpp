#pragma once

#include <json.hpp>
#include <string>

#include "fracrc/classic_rc.hpp"
#include "fracrc/dynamics.hpp"
#include "fracrc/linalg.hpp"
#include "fracrc/minimal_rc.hpp"
#include "fracrc/probe.hpp"

namespace fracrc {

using Json = nlohmann::json;

// Readers reject unknown keys and wrong types with ConfigError. Keys that are
// absent keep the value of `base`.

/// {"numerator": n, "denominator": d}. Readers also accept the string "n/d".
Json to_json(const FracExponent& e);
FracExponent exponent_from_json(const Json& j);
Json exponents_to_json(const std::vector<FracExponent>& list);
std::vector<FracExponent> exponents_from_json(const Json& j);

Json to_json(const MinRCConfig& cfg);
MinRCConfig minrc_from_json(const Json& j, MinRCConfig base = {});

Json to_json(const ClassicRCConfig& cfg);
ClassicRCConfig classic_from_json(const Json& j, ClassicRCConfig base = {});

Json to_json(const Readout& readout);
Readout readout_from_json(const Json& j);

Json to_json(const IntegratorConfig& cfg);
IntegratorConfig integrator_from_json(const Json& j, IntegratorConfig base = {});

/// {"type": "lorenz"|"halvorsen"|"thomas", ...parameters}
Json to_json(const SystemSpec& spec);
SystemSpec system_from_json(const Json& j);

Json to_json(const CorrelationDimensionConfig& cfg);
CorrelationDimensionConfig correlation_from_json(const Json& j, CorrelationDimensionConfig base = {});

Json to_json(const RosensteinConfig& cfg);
RosensteinConfig rosenstein_from_json(const Json& j, RosensteinConfig base = {});

/// Exponent grid as a list or {"first", "last", "step", "denominator"}.
std::vector<FracExponent> grid_from_json(const Json& j, const std::string& where);

Json to_json(const ProbeConfig& cfg);
ProbeConfig probe_from_json(const Json& j, ProbeConfig base = {});

Json to_json(const ProbeReport& report);

/// Parse a JSON document; syntax errors become ConfigError.
Json parse_json(const std::string& text, const std::string& origin);
Json read_json_file(const std::string& path);

namespace json_detail {

/// Throws ConfigError naming the first key of `j` that is not in `allowed`.
void check_keys(const Json& j, std::initializer_list<const char*> allowed, const std::string& where);

template <class T>
void read(const Json& j, const char* key, T& out, const std::string& where) {
  if (!j.contains(key)) return;
  try {
    out = j.at(key).get<T>();
  } catch (const nlohmann::json::exception&) {
    throw ConfigError(where + ": field '" + key + "' has the wrong type");
  }
}

}  // namespace json_detail

}  // namespace fracrc
