#include "nodal_atlas/experiments/registry.hpp"

#include <gtest/gtest.h>

#include <sys/wait.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

using namespace nodal_atlas;
using namespace nodal_atlas::experiments;
namespace fs = std::filesystem;

namespace {

const fs::path kSource = NODAL_ATLAS_SOURCE_DIR;
const std::string kCli = NODAL_ATLAS_CLI;

ExperimentConfig preset(const std::string& stem) { return ExperimentConfig::load((kSource / "configs" / (stem + ".json")).string()); }

fs::path scratch(const std::string& name) {
  const auto p = fs::temp_directory_path() / ("nodal_atlas_test_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

int cli(const std::vector<std::string>& args) {
  std::string cmd = kCli;
  for (const auto& a : args) cmd += " '" + a + "'";
  cmd += " 2>/dev/null >/dev/null";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

void write_json(const fs::path& p, const nlohmann::json& j) { std::ofstream(p) << j.dump(2); }

ExperimentConfig small_three_ball() {
  auto c = preset("three-ball");
  c.params["count"] = 25;
  c.mesh_h = 0.2;
  return c;
}

}  // namespace

TEST(Config, RoundTrip) {
  auto c = preset("monotonicity-shear");
  c.tolerances["extra"] = 0.125;
  c.seed = 987654321;
  const auto j = c.to_json();
  const auto back = ExperimentConfig::from_json(j);
  EXPECT_EQ(back.to_json(), j);
  EXPECT_EQ(back.coefficients.at("preset"), "linear-shear");
  EXPECT_EQ(back.radii.resolve(), c.radii.resolve());
  EXPECT_EQ(ExperimentConfig::from_json(nlohmann::json::parse(j.dump())).to_json(), j);
}

TEST(Config, ShippedPresetsLoadAndValidate) {
  int n = 0;
  for (const auto& e : fs::directory_iterator(kSource / "configs")) {
    const auto c = ExperimentConfig::load(e.path().string());
    EXPECT_NO_THROW(c.validate()) << e.path();
    EXPECT_NO_THROW(lookup(c.name)) << e.path();
    ++n;
  }
  EXPECT_GE(n, 13);
}

TEST(Config, Rejections) {
  EXPECT_THROW(ExperimentConfig::from_json({{"name", "eigen"}, {"mesh", 0.1}}), ConfigError);
  EXPECT_THROW(ExperimentConfig::from_json({{"domain", "unit-square"}}), ConfigError);
  EXPECT_THROW(ExperimentConfig::from_json({{"name", "eigen"}, {"mesh_h", "fine"}}), ConfigError);
  EXPECT_THROW(ExperimentConfig::from_json(nlohmann::json::array()), ConfigError);
  EXPECT_THROW(ExperimentConfig::load("/nonexistent/config.json"), ConfigError);

  ExperimentConfig c;
  c.name = "eigen";
  c.domain = "no-such-domain";
  EXPECT_THROW(c.validate(), ConfigError);
  c.domain = "unit-square";
  c.coefficients = {{"preset", "no-such-coefficients"}};
  EXPECT_THROW(c.validate(), ConfigError);
  c.coefficients = {{"preset", "identity"}};
  c.tolerances["rel_error"] = -1.0;
  EXPECT_THROW(c.validate(), ConfigError);
  c.tolerances.clear();
  c.mesh_h = 0.0;
  EXPECT_THROW(c.validate(), ConfigError);
}

TEST(Registry, UnknownNameListsRegistered) {
  ExperimentConfig c;
  c.name = "foo";
  try {
    run_experiment(c);
    FAIL() << "expected rejection";
  } catch (const ConfigError& e) {
    const std::string msg = e.what();
    for (const char* name : {"eigen", "nodal-scaling", "frequency", "doubling", "three-ball", "flatspot", "hull",
                             "pathological", "decompose", "drop-audit", "extension", "cauchy", "report"})
      EXPECT_NE(msg.find(name), std::string::npos) << name;
  }
  EXPECT_EQ(registry().size(), 13u);
}

TEST(Registry, DryRunEveryExperiment) {
  std::set<std::string> seen;
  for (const auto& e : fs::directory_iterator(kSource / "configs")) {
    const auto c = ExperimentConfig::load(e.path().string());
    const auto j = dry_run(c);
    EXPECT_TRUE(j.at("dry_run").get<bool>());
    EXPECT_TRUE(j.contains("estimate"));
    seen.insert(c.name);
  }
  EXPECT_EQ(seen.size(), registry().size());
  ExperimentConfig bad = preset("eigen-square");
  bad.domain = "nowhere";
  EXPECT_THROW(dry_run(bad), ConfigError);
}

TEST(Reference, BesselZeros) {
  EXPECT_NEAR(detail::bessel_zero(0, 1), 2.404825557695773, 1e-13);
  EXPECT_NEAR(detail::bessel_zero(1, 1), 3.831705970207512, 1e-13);
  EXPECT_NEAR(detail::bessel_zero(0, 2), 5.520078110286311, 1e-13);
  const auto s = detail::disk_spectrum(6, true);
  ASSERT_EQ(s.size(), 6u);
  EXPECT_NEAR(s[1], s[2], 1e-12);
  EXPECT_NEAR(s[5], 5.520078110286311 * 5.520078110286311, 1e-10);
  const auto half = detail::disk_spectrum(3, false);
  EXPECT_NEAR(half[0], 3.831705970207512 * 3.831705970207512, 1e-10);
}

TEST(Report, ItemsCiteExistingRows) {
  for (const auto& c : {preset("flatspot"), preset("decompose"), small_three_ball(), preset("doubling")}) {
    const auto r = run_experiment(c);
    ASSERT_FALSE(r.items.empty()) << c.name;
    for (const auto& it : r.items) {
      ASSERT_FALSE(it.cites.empty()) << c.name << " " << it.name;
      for (const auto& ref : it.cites) {
        ASSERT_TRUE(r.tables.count(ref.table)) << ref.table;
        ASSERT_FALSE(ref.rows.empty());
        for (auto row : ref.rows) EXPECT_LT(row, r.tables.at(ref.table).size());
      }
    }
    const auto s = r.summary();
    EXPECT_EQ(s.at("experiment"), c.name);
    EXPECT_EQ(s.at("config"), c.to_json());
    EXPECT_EQ(s.at("tables").size(), r.tables.size());
  }
}

TEST(Report, DeterministicTables) {
  for (const auto& c : {small_three_ball(), preset("hull"), preset("cauchy")}) {
    const auto a = run_experiment(c);
    setenv("NODAL_ATLAS_THREADS", "3", 1);
    const auto b = run_experiment(c);
    unsetenv("NODAL_ATLAS_THREADS");
    EXPECT_EQ(a.table_hashes(), b.table_hashes()) << c.name;
    EXPECT_EQ(a.files, b.files) << c.name;
  }
}

TEST(Report, WritesTablesAndSummary) {
  const auto dir = scratch("write");
  const auto r = run_experiment(preset("decompose"));
  r.write(dir);
  EXPECT_TRUE(fs::exists(dir / "summary.json"));
  EXPECT_TRUE(fs::exists(dir / "cuboids.csv"));
  EXPECT_TRUE(fs::exists(dir / "decomposition.svg"));
  std::ifstream in(dir / "summary.json");
  const auto j = nlohmann::json::parse(in);
  EXPECT_TRUE(j.at("pass").get<bool>());
  EXPECT_EQ(j.at("figures"), nlohmann::json::array({"decomposition.svg"}));
  std::ifstream csv(dir / "cuboids.csv");
  std::stringstream ss;
  ss << csv.rdbuf();
  EXPECT_EQ(ss.str(), r.tables.at("cuboids").csv());
  EXPECT_EQ(j.at("tables").at("cuboids.csv"), hex64(fnv1a(ss.str())));
}

TEST(Table, RowWidthAndFormatting) {
  Table t({"a", "b"});
  EXPECT_THROW(t.row(1), InvalidInput);
  t.row(0.1, std::nan(""));
  t.row(std::string("x"), true);
  EXPECT_EQ(t.csv(), "a,b\n0.1,\nx,true\n");
  EXPECT_DOUBLE_EQ(t.number(0, "a"), 0.1);
  EXPECT_TRUE(std::isnan(t.number(0, "b")));
  EXPECT_THROW(t.column("c"), InvalidInput);
}

TEST(Cauchy, LadderRulesAndZeroRung) {
  auto c = preset("cauchy");
  c.mesh_h = 0.05;
  c.params["basis_degree"] = 6;
  const auto r = run_experiment(c);
  const auto& t = r.tables.at("ladder");
  ASSERT_EQ(t.size(), 5u);
  for (std::size_t i = 1; i < t.size(); ++i) EXPECT_LE(t.number(i, "sup_l2"), t.number(i - 1, "sup_l2"));
  EXPECT_LE(r.tables.at("zero_rung").number(0, "sup_l2"), 1e-8);
  EXPECT_EQ(r.extra.at("label"), "analogue");
  const double tau = r.extra.at("tau").get<double>();
  EXPECT_GT(tau, 0.0);
  EXPECT_LE(tau, 1.0);

  c.params["eps"] = {1e-1, 1e-2, 1e-3, 1e-4};
  EXPECT_THROW(run_experiment(c), InvalidInput);
  c.params["eps"] = {1e-1, 1e-2, 5e-3, 1e-4, 1e-5};
  EXPECT_THROW(run_experiment(c), InvalidInput);
  c.params["eps"] = {1e-1, 1e-2, 1e-3, 1e-4, 1e-5};
  c.params["ball"] = 1.5;
  EXPECT_THROW(run_experiment(c), InvalidInput);
}

TEST(Cli, ExitCodes) {
  const auto dir = scratch("cli");
  const std::string flat = (kSource / "configs" / "flatspot.json").string();
  EXPECT_EQ(cli({"flatspot", "--config", flat, "--out", (dir / "ok").string()}), 0);
  EXPECT_TRUE(fs::exists(dir / "ok" / "summary.json"));

  auto failing = preset("flatspot").to_json();
  failing["tolerances"]["ratio_bound"] = 1e-3;
  write_json(dir / "fail.json", failing);
  EXPECT_EQ(cli({"flatspot", "--config", (dir / "fail.json").string(), "--out", (dir / "fail").string()}), 1);

  auto broken = preset("flatspot").to_json();
  broken["unexpected"] = 1;
  write_json(dir / "broken.json", broken);
  EXPECT_EQ(cli({"flatspot", "--config", (dir / "broken.json").string()}), 2);
  EXPECT_EQ(cli({"foo", "--config", flat}), 2);
  EXPECT_EQ(cli({"hull", "--config", flat}), 2);
  EXPECT_EQ(cli({"flatspot"}), 2);
  EXPECT_EQ(cli({"flatspot", "--config", (dir / "missing.json").string()}), 2);
}

TEST(Cli, DryRunWritesNothing) {
  const auto dir = scratch("dry");
  EXPECT_EQ(cli({"nodal-scaling", "--config", (kSource / "configs" / "nodal-scaling-disk.json").string(), "--out",
                 (dir / "out").string(), "--dry-run"}),
            0);
  EXPECT_FALSE(fs::exists(dir / "out"));
  auto bad = preset("nodal-scaling-disk").to_json();
  bad["mode_count"] = 0;
  write_json(dir / "bad.json", bad);
  EXPECT_EQ(cli({"nodal-scaling", "--config", (dir / "bad.json").string(), "--dry-run"}), 2);
}

TEST(Report, AggregatesSubExperiments) {
  ExperimentConfig c;
  c.name = "report";
  auto failing = preset("flatspot").to_json();
  failing["tolerances"]["ratio_bound"] = 1e-3;
  c.params["configs"] = {preset("flatspot").to_json(), failing};
  const auto r = run_experiment(c);
  ASSERT_EQ(r.tables.at("experiments").size(), 2u);
  EXPECT_EQ(r.items.size(), 2u);
  EXPECT_EQ(r.items[0].status, "pass");
  EXPECT_EQ(r.items[1].status, "fail");
  EXPECT_FALSE(r.passed());
  EXPECT_TRUE(r.files.count("01-flatspot/summary.json"));
  EXPECT_TRUE(r.files.count("02-flatspot/flatspots.csv"));
  c.params["configs"] = {c.to_json()};
  EXPECT_THROW(run_experiment(c), ConfigError);
}
