#include "nodal_atlas/experiments/registry.hpp"

#include <CLI11.hpp>

#include <iostream>

namespace na = nodal_atlas;
namespace ex = nodal_atlas::experiments;

int main(int argc, char** argv) {
  CLI::App app{"Numerical audits of nodal sets and doubling indices on planar domains"};
  std::string experiment, config_path, out;
  bool dry = false;
  app.add_option("experiment", experiment, "one of: " + ex::registered_names())->required();
  app.add_option("--config", config_path, "experiment config (JSON)")->required();
  app.add_option("--out", out, "output directory (overrides output_dir)");
  app.add_flag("--dry-run", dry, "validate the config and print resource estimates");
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  try {
    (void)ex::lookup(experiment);
    auto config = ex::ExperimentConfig::load(config_path);
    if (config.name != experiment)
      throw ex::ConfigError("config names experiment '" + config.name + "' but '" + experiment + "' was requested");
    if (!out.empty()) config.output_dir = out;
    ex::log_kv({{"event", "config"}, {"path", config_path}, {"threads", std::to_string(na::thread_cap())}});
    if (dry) {
      std::cout << ex::dry_run(config).dump(2) << "\n";
      return 0;
    }
    const auto report = ex::run_experiment(config);
    report.write(config.output_dir);
    ex::log_kv({{"event", "written"}, {"dir", config.output_dir}});
    return report.passed() ? 0 : 1;
  } catch (const ex::ConfigError& e) {
    ex::log_kv({{"event", "error"}, {"kind", "config"}, {"message", e.what()}});
    return 2;
  } catch (const na::InvalidInput& e) {
    ex::log_kv({{"event", "error"}, {"kind", "invalid-input"}, {"message", e.what()}});
    return 2;
  } catch (const std::exception& e) {
    ex::log_kv({{"event", "error"}, {"kind", "runtime"}, {"message", e.what()}});
    return 1;
  }
}
