#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <regex>
#include <sstream>
#include <string>

#include "distplan/artifacts.hpp"
#include "distplan/commands.hpp"
#include "distplan/error.hpp"
#include "distplan/scenario.hpp"

using namespace distplan;
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

const fs::path kScenarios = fs::path(DISTPLAN_SOURCE_DIR) / "scenarios";

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("distplan_test_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

json fig(const std::string& name) { return json::parse(slurp(kScenarios / (name + ".json"))); }

std::size_t count(const std::string& text, const std::string& needle) {
  std::size_t n = 0;
  for (auto pos = text.find(needle); pos != std::string::npos; pos = text.find(needle, pos + 1)) ++n;
  return n;
}

int run_cli(const std::string& args) {
  const std::string cmd = std::string("\"") + DISTPLAN_CLI + "\" " + args + " > /dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

}  // namespace

TEST(Scenario, ShippedFilesLoadWithoutDefaults) {
  std::size_t n = 0;
  for (const auto& entry : fs::directory_iterator(kScenarios)) {
    if (entry.path().extension() != ".json") continue;
    const Scenario s = load_scenario(entry.path());
    EXPECT_TRUE(s.defaulted.empty()) << entry.path() << " defaults " << s.defaulted.front();
    ++n;
  }
  EXPECT_GE(n, 10u);
}

TEST(Scenario, RoundTrip) {
  const fs::path dir = scratch("roundtrip");
  for (const auto& entry : fs::directory_iterator(kScenarios)) {
    const Scenario s = load_scenario(entry.path());
    write_scenario(s, dir / entry.path().filename());
    EXPECT_TRUE(load_scenario(dir / entry.path().filename()) == s) << entry.path();
  }
}

TEST(Scenario, MissingFieldsAreRecordedAsDefaults) {
  json doc = fig("fig2a");
  doc["cem"].erase("variance_floor");
  doc["planner"].erase("lambda_mode");
  const Scenario s = parse_scenario(doc);
  EXPECT_NE(std::find(s.defaulted.begin(), s.defaulted.end(), "cem.variance_floor"), s.defaulted.end());
  EXPECT_NE(std::find(s.defaulted.begin(), s.defaulted.end(), "planner.lambda_mode"), s.defaulted.end());
}

TEST(Scenario, GmmWeightsMustSumToOne) {
  json doc = fig("fig2b");
  doc["goal"]["weights"] = {0.2, 0.7};
  EXPECT_THROW(parse_scenario(doc), ValidationError);
}

TEST(Scenario, UnknownKeyRejected) {
  json doc = fig("fig2a");
  doc["planner"]["horizn"] = 5;
  try {
    parse_scenario(doc);
    FAIL();
  } catch (const ValidationError& e) {
    EXPECT_NE(std::string(e.what()).find("horizn"), std::string::npos);
  }
}

TEST(Scenario, ParseErrorReportsLine) {
  try {
    parse_scenario_text("{\n  \"name\": \"x\",\n  \"seed\": ,\n}\n", "broken.json");
    FAIL();
  } catch (const ValidationError& e) {
    EXPECT_NE(std::string(e.what()).find("line 3"), std::string::npos) << e.what();
  }
}

TEST(Scenario, PointGoalsRejectIProjection) {
  for (const char* name : {"fig2e", "fig2f"}) {
    json doc = fig(name);
    doc["projection"] = "I";
    try {
      parse_scenario(doc);
      FAIL() << name;
    } catch (const UnsupportedProjection& e) {
      EXPECT_NE(std::string(e.what()).find("divides by zero"), std::string::npos);
    }
  }
}

TEST(Scenario, HashTracksSemanticFields) {
  const Scenario a = load_scenario(kScenarios / "fig2a.json");
  Scenario b = a;
  b.name = "renamed";
  b.description = "other words";
  EXPECT_EQ(config_hash(a), config_hash(b));
  b.planner.eta = a.planner.eta + 0.5;
  EXPECT_NE(config_hash(a), config_hash(b));
  Scenario c = a;
  c.seed = a.seed + 1;
  EXPECT_NE(config_hash(a), config_hash(c));
  EXPECT_EQ(config_hash(a).size(), 16u);
}

TEST(TrajectoryCsv, RoundTrip) {
  std::vector<TrajectoryRow> rows(2);
  rows[0] = {0, Vector::Ones(2), Vector::Zero(2), Matrix::Identity(2, 2), 0.25, 1.5, 0.0};
  rows[1] = {1, Vector(), Vector::Ones(2), 0.5 * Matrix::Identity(2, 2), 0.1, std::nan(""), 0.0};
  const fs::path p = scratch("csv") / "t.csv";
  write_trajectory_csv(p, rows, 2, 2);
  const auto back = read_trajectory_csv(p, 2, 2);
  ASSERT_EQ(back.size(), 2u);
  EXPECT_EQ(back[0].action, rows[0].action);
  EXPECT_EQ(back[1].action.size(), 0);
  EXPECT_EQ(back[1].covariance, rows[1].covariance);
  EXPECT_EQ(slurp(p).substr(0, slurp(p).find('\n')),
            "step,action_0,action_1,mean_0,mean_1,cov_0_0,cov_0_1,cov_1_0,cov_1_1,divergence,cost,ms");
}

TEST(CmdPlan, DeterministicAndStructuredSvg) {
  const Scenario s = load_scenario(kScenarios / "fig2a.json");
  const fs::path a = scratch("plan_a");
  const fs::path b = scratch("plan_b");
  RunOptions opts;
  cmd_plan(s, a, opts);
  opts.threads = 8;
  cmd_plan(s, b, opts);
  EXPECT_EQ(slurp(a / "trajectory.csv"), slurp(b / "trajectory.csv"));
  EXPECT_EQ(slurp(a / "plot.svg"), slurp(b / "plot.svg"));
  const std::string svg = slurp(a / "plot.svg");
  EXPECT_EQ(count(svg, "<polyline"), 1u);
  EXPECT_EQ(count(svg, "class=\"sigma1\""), s.planner.horizon);
  EXPECT_EQ(count(svg, "class=\"sigma2\""), s.planner.horizon);
  EXPECT_EQ(svg.rfind("<?xml", 0), 0u);
}

TEST(CmdPlan, MixturePlannerDrawsSeveralPaths) {
  const Scenario s = load_scenario(kScenarios / "fig2g.json");
  const fs::path dir = scratch("plan_g");
  cmd_plan(s, dir, RunOptions{});
  const std::string svg = slurp(dir / "plot.svg");
  EXPECT_GE(count(svg, "<polyline"), 2u);
  std::regex points("<polyline[^>]*points=\"([^\"]*)\"");
  std::vector<std::string> distinct;
  for (auto it = std::sregex_iterator(svg.begin(), svg.end(), points); it != std::sregex_iterator(); ++it) {
    if (std::find(distinct.begin(), distinct.end(), (*it)[1].str()) == distinct.end()) distinct.push_back((*it)[1]);
  }
  EXPECT_GE(distinct.size(), 2u);
}

TEST(CmdMpc, SummaryAndDeterminism) {
  Scenario s = load_scenario(kScenarios / "fig2a.json");
  s.planner.max_mpc_steps = 3;
  s.planner.cem.max_iters = 5;
  const fs::path a = scratch("mpc_a");
  const fs::path b = scratch("mpc_b");
  RunOptions opts;
  const json sa = cmd_mpc(s, a, 2, opts);
  opts.threads = 8;
  cmd_mpc(s, b, 2, opts);
  for (const char* run : {"run_000", "run_001"}) {
    EXPECT_EQ(slurp(a / run / "trajectory.csv"), slurp(b / run / "trajectory.csv"));
  }
  ASSERT_EQ(sa["runs"].size(), 2u);
  for (const auto& r : sa["runs"]) {
    EXPECT_TRUE(r.contains("terminal_state"));
    EXPECT_TRUE(r.contains("divergence_series"));
    EXPECT_EQ(r["status"], "max_steps");
  }
}

TEST(CmdPlot, EmptyTrajectoryAndStableBytes) {
  const Scenario s = load_scenario(kScenarios / "fig2b.json");
  const fs::path dir = scratch("plot");
  write_scenario(s, dir / "scenario.json");
  write_trajectory_csv(dir / "trajectory.csv", {}, 3, 3);
  cmd_plot(dir, dir / "a.svg");
  cmd_plot(dir, dir / "b.svg");
  const std::string svg = slurp(dir / "a.svg");
  EXPECT_EQ(svg, slurp(dir / "b.svg"));
  EXPECT_EQ(count(svg, "<polyline"), 0u);
  EXPECT_EQ(count(svg, "class=\"obstacle\""), 4u);
  // one ellipse pair per goal component
  EXPECT_EQ(count(svg, "class=\"goal\""), 4u);
}

TEST(Cli, ExitCodes) {
  const fs::path dir = scratch("cli");
  json doc = fig("fig2e");
  doc["projection"] = "I";
  std::ofstream(dir / "bad.json") << doc.dump(2);
  EXPECT_EQ(run_cli("plan --scenario \"" + (dir / "bad.json").string() + "\" --out \"" + (dir / "out").string() + "\""), 2);
  EXPECT_EQ(run_cli("plan --scenario \"" + (dir / "missing.json").string() + "\" --out \"" + (dir / "out").string() + "\""), 2);
  EXPECT_EQ(run_cli("verify --suite reductions --instances 3"), 0);
}
