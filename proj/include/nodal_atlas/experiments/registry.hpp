#pragma once

#include "nodal_atlas/experiments/drivers.hpp"

#include <chrono>
#include <functional>

namespace nodal_atlas::experiments {

struct Experiment {
  std::function<void(Context&, Report&)> run;
  std::function<nlohmann::json(const ExperimentConfig&)> estimate;  // extra dry-run figures
};

Report run_experiment(const ExperimentConfig& config);

inline void run_report(Context& ctx, Report& rep);

inline const std::map<std::string, Experiment>& registry() {
  auto modes = [](const ExperimentConfig& c) {
    auto j = detail::mesh_estimate(c);
    j["modes"] = c.mode_count;
    j["dense_eigen_bytes_est"] = 8.0 * std::pow(j["vertices_est"].get<double>(), 2) *
                                 (j["vertices_est"].get<double>() <= fem::EigenOptions{}.dense_limit ? 2.0 : 0.0);
    j["subspace_bytes_est"] = 8.0 * j["vertices_est"].get<double>() * std::max(2 * c.mode_count, c.mode_count + 8) * 4.0;
    return j;
  };
  auto mesh = [](const ExperimentConfig& c) { return detail::mesh_estimate(c); };
  auto none = [](const ExperimentConfig&) { return nlohmann::json::object(); };
  static const std::map<std::string, Experiment> reg{
      {"eigen", {run_eigen, modes}},
      {"nodal-scaling", {run_nodal_scaling, modes}},
      {"frequency",
       {run_frequency,
        [mesh](const ExperimentConfig& c) {
          auto j = mesh(c);
          j["profiles"] = c.params.value("fields", nlohmann::json::array({1})).size();
          j["radii"] = c.radii.resolve().size();
          return j;
        }}},
      {"doubling",
       {run_doubling,
        [mesh](const ExperimentConfig& c) {
          auto j = mesh(c);
          j["profiles"] = c.params.value("fields", nlohmann::json::array({1})).size();
          j["radii"] = c.radii.resolve().size();
          return j;
        }}},
      {"three-ball",
       {run_three_ball,
        [mesh](const ExperimentConfig& c) {
          auto j = mesh(c);
          j["ball_integrals_est"] = 3 * c.params.value("count", 1000);
          return j;
        }}},
      {"flatspot", {run_flatspot, none}},
      {"hull", {run_hull, none}},
      {"pathological", {run_pathological, none}},
      {"decompose", {run_decompose, none}},
      {"drop-audit",
       {run_drop_audit,
        [modes](const ExperimentConfig& c) {
          auto j = modes(c);
          const double per = std::pow(8 * (1 << c.cuboid.level) + 1, 2) * (4 * (1 << c.cuboid.level) + 1) * 2.0;
          const double cases = static_cast<double>(std::max<std::size_t>(1, c.params.value("cases", nlohmann::json::array()).size()));
          j["ball_integrals_est"] = cases * ((1 << c.cuboid.k) + 1) * per;
          return j;
        }}},
      {"extension", {run_extension, modes}},
      {"cauchy",
       {run_cauchy,
        [mesh](const ExperimentConfig& c) {
          auto j = mesh(c);
          j["harmonic_solves"] = 1 + 2 * c.params.value("basis_degree", CauchyOptions{}.basis_degree);
          return j;
        }}},
      {"report",
       {run_report,
        [](const ExperimentConfig& c) {
          nlohmann::json subs = nlohmann::json::array();
          for (const auto& s : c.params.value("configs", nlohmann::json::array()))
            subs.push_back(s.is_string() ? nlohmann::json(s) : nlohmann::json(s.value("name", "")));
          return nlohmann::json{{"sub_experiments", subs}};
        }}},
  };
  return reg;
}

inline std::string registered_names() {
  std::string s;
  for (const auto& [name, e] : registry()) s += (s.empty() ? "" : ", ") + name;
  return s;
}

inline const Experiment& lookup(const std::string& name) {
  const auto& reg = registry();
  const auto it = reg.find(name);
  if (it == reg.end()) throw ConfigError("unknown experiment '" + name + "' (registered: " + registered_names() + ")");
  return it->second;
}

/// Validates the config and reports resource estimates without meshing or solving.
inline nlohmann::json dry_run(const ExperimentConfig& config) {
  const auto& e = lookup(config.name);
  config.validate();
  nlohmann::json j{{"experiment", config.name}, {"dry_run", true}, {"config", config.to_json()}};
  try {
    j["estimate"] = e.estimate(config);
  } catch (const ConfigError&) {
    throw;
  } catch (const InvalidInput& err) {
    throw ConfigError(err.what());
  } catch (const nlohmann::json::exception& err) {
    throw ConfigError(std::string("config: ") + err.what());
  }
  return j;
}

inline Report run_experiment(const ExperimentConfig& config) {
  const auto& e = lookup(config.name);
  config.validate();
  Report rep;
  rep.config = config;
  const auto start = std::chrono::steady_clock::now();
  log_kv({{"event", "start"}, {"experiment", config.name}, {"domain", config.domain}, {"seed", std::to_string(config.seed)}});
  try {
    Context ctx(config);
    e.run(ctx, rep);
  } catch (const nlohmann::json::exception& err) {
    throw ConfigError(std::string("config params: ") + err.what());
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  for (const auto& i : rep.items)
    log_kv({{"event", "item"}, {"experiment", config.name}, {"name", i.name}, {"status", i.status}, {"value", num(i.value)}});
  log_kv({{"event", "done"}, {"experiment", config.name}, {"pass", rep.passed() ? "true" : "false"}, {"seconds", num(secs)}});
  return rep;
}

/// Runs the sub-configs listed in params.configs (inline objects or paths) and aggregates them.
inline void run_report(Context& ctx, Report& rep) {
  const auto& c = ctx.config;
  const auto subs = c.params.value("configs", nlohmann::json::array());
  if (subs.empty()) throw ConfigError("report: params.configs is empty");
  auto& t = rep.table("experiments", {"name", "directory", "pass", "items", "failed", "inconclusive"});
  for (std::size_t i = 0; i < subs.size(); ++i) {
    ExperimentConfig sub = subs[i].is_string() ? ExperimentConfig::load(subs[i].get<std::string>())
                                               : ExperimentConfig::from_json(subs[i]);
    if (sub.name == "report") throw ConfigError("report: nested report configs are not allowed");
    const std::string dir = fmt::format("{:02d}-{}", i + 1, sub.name);
    const Report r = run_experiment(sub);
    std::size_t failed = 0, inconclusive = 0;
    for (const auto& it : r.items) {
      failed += it.status == "fail";
      inconclusive += it.status == "inconclusive";
    }
    const auto row = t.row(sub.name, dir, r.passed(), r.items.size(), failed, inconclusive);
    rep.check(dir, r.passed(), static_cast<double>(failed), "failed items == 0", {detail::row("experiments", row)});
    for (const auto& [name, tab] : r.tables) rep.files[dir + "/" + name + ".csv"] = tab.csv();
    for (const auto* group : {&r.svgs, &r.files})
      for (const auto& [name, body] : *group) rep.files[dir + "/" + name] = body;
    rep.files[dir + "/summary.json"] = r.summary().dump(2) + "\n";
  }
}

}  // namespace nodal_atlas::experiments
