#pragma once

#include "nodal_atlas/doubling/profiles.hpp"
#include "nodal_atlas/fem/coefficients.hpp"
#include "nodal_atlas/geometry/domain.hpp"

#include <nlohmann/json.hpp>

#include <filesystem>
#include <fstream>
#include <map>
#include <set>

namespace nodal_atlas::experiments {

/// Errors in the configuration document itself (exit code 2).
struct ConfigError : InvalidInput {
  using InvalidInput::InvalidInput;
};

struct RadiusGrid {
  std::string kind = "dyadic";  // dyadic | list | linear
  double r_max = 0.4;
  double r_min = 0.05;          // linear only
  int levels = 4;               // dyadic levels / linear count
  std::vector<double> values;   // list only

  std::vector<double> resolve() const {
    if (kind == "dyadic") return doubling::dyadic_radii(r_max, levels);
    if (kind == "list") {
      if (values.empty()) throw InvalidInput("radii: empty list");
      return values;
    }
    if (kind == "linear") {
      if (levels < 2 || !(r_min > 0.0) || !(r_min < r_max)) throw InvalidInput("radii: linear grid needs 0 < r_min < r_max, levels >= 2");
      std::vector<double> r;
      for (int i = 0; i < levels; ++i) r.push_back(r_min + (r_max - r_min) * i / (levels - 1));
      return r;
    }
    throw InvalidInput("radii: unknown kind '" + kind + "' (known: dyadic, list, linear)");
  }

  nlohmann::json to_json() const {
    nlohmann::json j{{"kind", kind}};
    if (kind == "list") {
      j["values"] = values;
    } else {
      j["r_max"] = r_max;
      j["levels"] = levels;
      if (kind == "linear") j["r_min"] = r_min;
    }
    return j;
  }

  static RadiusGrid from_json(const nlohmann::json& j) {
    RadiusGrid g;
    g.kind = j.value("kind", g.kind);
    g.r_max = j.value("r_max", g.r_max);
    g.r_min = j.value("r_min", g.r_min);
    g.levels = j.value("levels", g.levels);
    if (j.contains("values")) g.values = j.at("values").get<std::vector<double>>();
    return g;
  }
};

struct CuboidSpec {
  double s_center = 0.0;  // abscissa in the frame of patch 0
  double side = 0.25;
  double L = 1.0;
  int k = 3;
  int level = 0;          // maximal-index sample level

  nlohmann::json to_json() const {
    return {{"s_center", s_center}, {"side", side}, {"L", L}, {"k", k}, {"level", level}};
  }
  static CuboidSpec from_json(const nlohmann::json& j) {
    CuboidSpec c;
    c.s_center = j.value("s_center", c.s_center);
    c.side = j.value("side", c.side);
    c.L = j.value("L", c.L);
    c.k = j.value("k", c.k);
    c.level = j.value("level", c.level);
    return c;
  }
};

struct ExperimentConfig {
  std::string name;
  std::string domain = "unit-square";                     // preset name or path to a domain JSON
  nlohmann::json domain_params = nlohmann::json::object();
  nlohmann::json coefficients = {{"preset", "identity"}};
  double mesh_h = 0.05;
  int mode_count = 10;
  RadiusGrid radii;
  CuboidSpec cuboid;
  std::map<std::string, double> tolerances;
  std::string output_dir = "out";
  std::uint64_t seed = 1234;
  nlohmann::json params = nlohmann::json::object();       // experiment-specific settings

  double tol(const std::string& key, double fallback) const {
    const auto it = tolerances.find(key);
    return it == tolerances.end() ? fallback : it->second;
  }

  nlohmann::json to_json() const {
    return {{"name", name},
            {"domain", domain},
            {"domain_params", domain_params},
            {"coefficients", coefficients},
            {"mesh_h", mesh_h},
            {"mode_count", mode_count},
            {"radii", radii.to_json()},
            {"cuboid", cuboid.to_json()},
            {"tolerances", tolerances},
            {"output_dir", output_dir},
            {"seed", seed},
            {"params", params}};
  }

  static ExperimentConfig from_json(const nlohmann::json& j) {
    static const std::set<std::string> known{"name", "domain", "domain_params", "coefficients", "mesh_h", "mode_count",
                                             "radii", "cuboid", "tolerances", "output_dir", "seed", "params"};
    if (!j.is_object()) throw ConfigError("config: top level must be a JSON object");
    for (const auto& [k, v] : j.items())
      if (!known.count(k)) throw ConfigError("config: unknown key '" + k + "'");
    try {
      ExperimentConfig c;
      c.name = j.at("name").get<std::string>();
      c.domain = j.value("domain", c.domain);
      c.domain_params = j.value("domain_params", c.domain_params);
      c.coefficients = j.value("coefficients", c.coefficients);
      c.mesh_h = j.value("mesh_h", c.mesh_h);
      c.mode_count = j.value("mode_count", c.mode_count);
      if (j.contains("radii")) c.radii = RadiusGrid::from_json(j.at("radii"));
      if (j.contains("cuboid")) c.cuboid = CuboidSpec::from_json(j.at("cuboid"));
      if (j.contains("tolerances")) c.tolerances = j.at("tolerances").get<std::map<std::string, double>>();
      c.output_dir = j.value("output_dir", c.output_dir);
      c.seed = j.value("seed", c.seed);
      c.params = j.value("params", c.params);
      return c;
    } catch (const nlohmann::json::exception& e) {
      throw ConfigError(std::string("config: ") + e.what());
    }
  }

  static ExperimentConfig load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot read config '" + path + "'");
    nlohmann::json j;
    try {
      in >> j;
    } catch (const nlohmann::json::exception& e) {
      throw ConfigError("config '" + path + "': " + e.what());
    }
    return from_json(j);
  }

  /// Checks presets and ranges without building anything expensive.
  void validate() const {
    if (name.empty()) throw ConfigError("config: empty experiment name");
    if (!(mesh_h > 0.0) || mesh_h > 1.0) throw ConfigError("config: mesh_h must lie in (0, 1]");
    if (mode_count < 1) throw ConfigError("config: mode_count must be >= 1");
    for (const auto& [k, v] : tolerances)
      if (!(v > 0.0)) throw ConfigError("config: tolerance '" + k + "' must be positive");
    try {
      (void)make_domain();
      (void)make_coefficients();
      (void)radii.resolve();
    } catch (const ConfigError&) {
      throw;
    } catch (const InvalidInput& e) {
      throw ConfigError(e.what());
    }
  }

  geometry::PlanarDomain make_domain() const {
    if (domain.size() > 5 && domain.substr(domain.size() - 5) == ".json") return geometry::load_domain(domain);
    return geometry::make_domain(domain, domain_params);
  }

  geometry::PlanarDomain make_mesh_domain() const {
    if (domain.size() > 5 && domain.substr(domain.size() - 5) == ".json") return geometry::load_domain(domain);
    return geometry::make_domain_for_mesh(domain, mesh_h, domain_params);
  }

  fem::CoefficientField make_coefficients() const { return fem::CoefficientField::from_json(coefficients); }
};

}  // namespace nodal_atlas::experiments
