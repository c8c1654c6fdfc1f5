#include "rmtp/json_io.hpp"

#include <cmath>

#include "rmtp/errors.hpp"

namespace rmtp {

void require_keys(const Json& obj, std::initializer_list<const char*> allowed, const std::string& where) {
  if (!obj.is_object()) throw ConfigError(where + ": expected a JSON object");
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    bool ok = false;
    for (const char* k : allowed) ok = ok || it.key() == k;
    if (!ok) throw ConfigError(where + ": unknown key '" + it.key() + "'");
  }
}

double json_number(const Json& j, const char* key, const std::string& where) {
  if (!j.contains(key)) throw ConfigError(where + ": missing key '" + key + "'");
  const Json& v = j.at(key);
  if (!v.is_number()) throw ConfigError(where + ": '" + key + "' must be a number");
  double x = v.get<double>();
  if (!std::isfinite(x)) throw ConfigError(where + ": '" + key + "' must be finite");
  return x;
}

int json_int(const Json& j, const char* key, const std::string& where) {
  if (!j.contains(key)) throw ConfigError(where + ": missing key '" + key + "'");
  const Json& v = j.at(key);
  if (!v.is_number_integer()) throw ConfigError(where + ": '" + key + "' must be an integer");
  return v.get<int>();
}

Json measure_to_json(const SpectralMeasure& mu) {
  using K = SpectralMeasure::Kind;
  switch (mu.kind()) {
    case K::Atomic: {
      Json atoms = Json::array();
      for (std::size_t i = 0; i < mu.points().size(); ++i) atoms.push_back({mu.points()[i], mu.weights()[i]});
      return {{"kind", "atomic"}, {"atoms", atoms}};
    }
    case K::PointMass:
      return {{"kind", "pointmass"}, {"x0", mu.x0()}};
    case K::GinibreLimit:
      return {{"kind", "ginibre"}, {"gamma", mu.gamma()}};
    case K::JacobiLimit:
      return {{"kind", "jacobi"}, {"alpha_hat", mu.alpha_hat()}, {"R_hat", mu.R_hat()}};
    case K::FreePower:
      return {{"kind", "free_power"}, {"base", measure_to_json(mu.base())}, {"power", mu.power()}};
  }
  throw ConfigError("unknown measure kind");
}

SpectralMeasure measure_from_json(const Json& j) {
  const std::string where = "measure";
  if (!j.is_object() || !j.contains("kind") || !j.at("kind").is_string())
    throw ConfigError(where + ": needs a string 'kind'");
  std::string kind = j.at("kind").get<std::string>();
  if (kind == "atomic") {
    require_keys(j, {"kind", "atoms"}, where);
    if (!j.contains("atoms") || !j.at("atoms").is_array()) throw ConfigError(where + ": 'atoms' must be an array");
    std::vector<double> s, w;
    for (const auto& a : j.at("atoms")) {
      if (!a.is_array() || a.size() != 2 || !a[0].is_number() || !a[1].is_number())
        throw ConfigError(where + ": each atom must be [s, w]");
      s.push_back(a[0].get<double>());
      w.push_back(a[1].get<double>());
    }
    return SpectralMeasure::atomic(s, w);
  }
  if (kind == "pointmass") {
    require_keys(j, {"kind", "x0"}, where);
    return SpectralMeasure::point_mass(json_number(j, "x0", where));
  }
  if (kind == "ginibre") {
    require_keys(j, {"kind", "gamma"}, where);
    return SpectralMeasure::ginibre(json_number(j, "gamma", where));
  }
  if (kind == "jacobi") {
    require_keys(j, {"kind", "alpha_hat", "R_hat"}, where);
    return SpectralMeasure::jacobi(json_number(j, "alpha_hat", where), json_number(j, "R_hat", where));
  }
  if (kind == "free_power") {
    require_keys(j, {"kind", "base", "power"}, where);
    if (!j.contains("base")) throw ConfigError(where + ": missing key 'base'");
    return SpectralMeasure::free_power(measure_from_json(j.at("base")), json_int(j, "power", where));
  }
  throw ConfigError(where + ": unknown kind '" + kind + "'");
}

Json factor_spec_to_json(const FactorSpec& spec) {
  switch (spec.kind) {
    case FactorSpec::Kind::FixedSpectrum:
      return {{"kind", "fixed"}, {"lambda", spec.lambda}};
    case FactorSpec::Kind::Jacobi:
      return {{"kind", "jacobi"}, {"N", spec.N}, {"alpha", spec.alpha}, {"R", spec.R}};
    case FactorSpec::Kind::Ginibre:
      return {{"kind", "ginibre"}, {"N", spec.N}, {"L", spec.L}};
  }
  throw ConfigError("unknown factor kind");
}

FactorSpec factor_spec_from_json(const Json& j) {
  const std::string where = "factor";
  if (!j.is_object() || !j.contains("kind") || !j.at("kind").is_string())
    throw ConfigError(where + ": needs a string 'kind'");
  std::string kind = j.at("kind").get<std::string>();
  FactorSpec spec;
  if (kind == "fixed") {
    require_keys(j, {"kind", "lambda"}, where);
    if (!j.contains("lambda") || !j.at("lambda").is_array()) throw ConfigError(where + ": 'lambda' must be an array");
    std::vector<double> lam;
    for (const auto& v : j.at("lambda")) {
      if (!v.is_number()) throw ConfigError(where + ": 'lambda' entries must be numbers");
      lam.push_back(v.get<double>());
    }
    spec = FactorSpec::fixed(lam);
  } else if (kind == "jacobi") {
    require_keys(j, {"kind", "N", "alpha", "R"}, where);
    spec = FactorSpec::jacobi(json_int(j, "N", where), json_int(j, "alpha", where), json_int(j, "R", where));
  } else if (kind == "ginibre") {
    require_keys(j, {"kind", "N", "L"}, where);
    spec = FactorSpec::ginibre(json_int(j, "N", where), json_int(j, "L", where));
  } else {
    throw ConfigError(where + ": unknown kind '" + kind + "'");
  }
  spec.validate();
  return spec;
}

Json contour_spec_to_json(const ContourSpec& spec) {
  return {{"eps_inner", spec.eps_inner}, {"eps_outer", spec.eps_outer}, {"phase", spec.phase}};
}

Json prediction_to_json(const Prediction& p) {
  return {{"statistic", p.statistic},
          {"k", p.k},
          {"l", p.l},
          {"value", p.value},
          {"quadrature_error", p.quadrature_error},
          {"contour_spec", contour_spec_to_json(p.contour)}};
}

}  // namespace rmtp
