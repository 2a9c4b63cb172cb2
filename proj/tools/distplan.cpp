#include <cstdint>
#include <exception>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"

#include "distplan/commands.hpp"
#include "distplan/error.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitViolations = 1;
constexpr int kExitValidation = 2;
constexpr int kExitInfeasible = 3;
constexpr int kExitInternal = 4;

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Belief-space planning toward goal distributions"};
  app.require_subcommand(1);
  int threads = 1;
  app.add_option("--threads", threads, "Worker threads (results do not depend on this)")->check(CLI::Range(1, 256));

  std::string scenario_path;
  std::string out;
  std::uint64_t seed = 0;
  bool record_time = false;

  auto* plan = app.add_subcommand("plan", "Single planning call from the start belief");
  plan->add_option("--scenario", scenario_path, "Scenario JSON")->required();
  plan->add_option("--out", out, "Output directory")->required();
  auto* plan_seed = plan->add_option("--seed", seed, "Override the scenario seed");
  plan->add_flag("--record-time", record_time, "Write wall time into the CSV ms column");

  std::size_t runs = 1;
  auto* mpc = app.add_subcommand("mpc", "Receding-horizon executions");
  mpc->add_option("--scenario", scenario_path, "Scenario JSON")->required();
  mpc->add_option("--out", out, "Output directory")->required();
  mpc->add_option("--runs", runs, "Number of executions (seeds seed, seed+1, ...)")->check(CLI::PositiveNumber);
  auto* mpc_seed = mpc->add_option("--seed", seed, "Override the scenario seed");
  mpc->add_flag("--record-time", record_time, "Write wall time into the CSV ms column");

  std::string suite;
  std::size_t instances = 100;
  std::uint64_t verify_seed = 1;
  auto* verify = app.add_subcommand("verify", "Brute-force checks of the divergence reductions");
  verify->add_option("--suite", suite, "Suite name (reductions)")->required();
  verify->add_option("--instances", instances, "Random instances per reduction")->check(CLI::PositiveNumber);
  verify->add_option("--seed", verify_seed, "Seed for the random instances");

  std::string run_dir;
  auto* plot = app.add_subcommand("plot", "Render a run directory to SVG");
  plot->add_option("--run", run_dir, "Run directory")->required();
  plot->add_option("--out", out, "Output SVG file")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitValidation;
  }

  try {
    distplan::RunOptions opts;
    opts.threads = threads;
    opts.record_time = record_time;
    if (*plan) {
      if (plan_seed->count()) opts.seed = seed;
      const auto scenario = distplan::load_scenario(scenario_path);
      const auto meta = distplan::cmd_plan(scenario, out, opts);
      std::cout << meta.dump(2) << "\n";
      return kExitOk;
    }
    if (*mpc) {
      if (mpc_seed->count()) opts.seed = seed;
      const auto scenario = distplan::load_scenario(scenario_path);
      const auto summary = distplan::cmd_mpc(scenario, out, runs, opts);
      const auto& counts = summary["status_counts"];
      std::cout << "runs: " << runs << ", status counts: " << counts.dump() << "\n";
      if (counts.contains("error")) return kExitInternal;
      if (counts.contains("infeasible")) return kExitInfeasible;
      return kExitOk;
    }
    if (*verify) {
      const auto report = distplan::cmd_verify(suite, instances, verify_seed, threads);
      std::cout << report.dump(2) << "\n";
      return report["ok"].get<bool>() ? kExitOk : kExitViolations;
    }
    distplan::cmd_plot(run_dir, out);
    return kExitOk;
  } catch (const distplan::ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitValidation;
  } catch (const distplan::InfeasibleError& e) {
    std::cerr << "infeasible: " << e.what() << "\n";
    return kExitInfeasible;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return kExitInternal;
  }
}
