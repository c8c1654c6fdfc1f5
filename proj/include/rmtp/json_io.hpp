#pragma once

#include <initializer_list>
#include <string>

#include "json.hpp"
#include "rmtp/predict.hpp"
#include "rmtp/simulate.hpp"

namespace rmtp {

using Json = nlohmann::json;

// Throws ConfigError if obj is not an object or has a key outside allowed.
void require_keys(const Json& obj, std::initializer_list<const char*> allowed, const std::string& where);

// {"kind": "atomic", "atoms": [[s, w], ...]}, {"kind": "pointmass", "x0": ..},
// {"kind": "ginibre", "gamma": ..}, {"kind": "jacobi", "alpha_hat": .., "R_hat": ..},
// {"kind": "free_power", "base": {...}, "power": M}
Json measure_to_json(const SpectralMeasure& mu);
SpectralMeasure measure_from_json(const Json& j);

// {"kind": "fixed", "lambda": [...]} | {"kind": "jacobi", "N", "alpha", "R"} | {"kind": "ginibre", "N", "L"}
Json factor_spec_to_json(const FactorSpec& spec);
FactorSpec factor_spec_from_json(const Json& j);

Json contour_spec_to_json(const ContourSpec& spec);
Json prediction_to_json(const Prediction& p);

// Typed field access with ConfigError diagnostics.
double json_number(const Json& j, const char* key, const std::string& where);
int json_int(const Json& j, const char* key, const std::string& where);

}  // namespace rmtp
