#include "distplan/commands.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>

#include <Eigen/Core>

#include "distplan/artifacts.hpp"
#include "distplan/error.hpp"
#include "distplan/oracles.hpp"
#include "distplan/parallel.hpp"
#include "distplan/svg.hpp"

namespace distplan {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

json vec_json(const Vector& v) {
  json out = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(v[i]);
  return out;
}

json finite_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

json metadata(const Scenario& s, std::uint64_t seed, const std::string& command) {
  return json{{"command", command},
              {"scenario", s.name},
              {"config_hash", config_hash(s)},
              {"seed", seed},
              {"lambda_mode", std::string(to_string(s.planner.lambda_mode))},
              {"projection", std::string(to_string(s.planner.projection))},
              {"goal_type", std::string(kind_name(s.goal))},
              {"defaulted", s.defaulted},
              {"versions",
               json{{"distplan", kVersion},
                    {"eigen", std::to_string(EIGEN_WORLD_VERSION) + "." + std::to_string(EIGEN_MAJOR_VERSION) + "." +
                                  std::to_string(EIGEN_MINOR_VERSION)},
                    {"nlohmann_json", std::to_string(NLOHMANN_JSON_VERSION_MAJOR) + "." +
                                          std::to_string(NLOHMANN_JSON_VERSION_MINOR) + "." +
                                          std::to_string(NLOHMANN_JSON_VERSION_PATCH)}}}};
}

// Positions along the noise-free path of `actions` from `start`.
Polyline nominal_path(const Environment& env, const Vector& start, const Vector& actions) {
  const Eigen::Index a = env.action_dim();
  Polyline out{env.position(start)};
  Vector x = start;
  for (Eigen::Index k = 0; k + a <= actions.size(); k += a) {
    const Vector u = actions.segment(k, a);
    for (auto& p : env.path(x, u, 16)) out.push_back(p);
    x = env.step(x, u);
  }
  return out;
}

void write_plot(const fs::path& dir) { cmd_plot(dir, dir / "plot.svg"); }

std::string run_name(std::size_t r) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "run_%03zu", r);
  return buf;
}

}  // namespace

std::pair<std::size_t, std::vector<double>> attribute_mode(const Gmm& goal, const Vector& x) {
  std::vector<double> d;
  for (const auto& c : goal.components()) d.push_back(std::sqrt(c.mahalanobis_squared(x)));
  const auto best = static_cast<std::size_t>(std::min_element(d.begin(), d.end()) - d.begin());
  return {best, d};
}

json cmd_plan(const Scenario& scenario, const fs::path& out_dir, const RunOptions& opts) {
  fs::create_directories(out_dir);
  const std::uint64_t seed = opts.seed.value_or(scenario.seed);
  const auto env = scenario.make_environment();
  PlannerConfig cfg = scenario.planner;
  cfg.cem.threads = opts.threads;
  cfg.ut.process_noise = env->process_noise();

  const auto t0 = std::chrono::steady_clock::now();
  const PlanOutcome plan = plan_once(scenario.start, scenario.goal, *env, cfg, seed);
  const double ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();

  const Eigen::Index a = env->action_dim();
  const std::vector<double> lambda = horizon_weights(cfg.lambda_mode, cfg.horizon);
  std::vector<TrajectoryRow> rows;
  rows.push_back(TrajectoryRow{0, plan.actions.head(a), scenario.start.mean(), scenario.start.covariance(),
                               goal_cost(scenario.start, scenario.goal, cfg.projection, cfg.ut.beta), 0.0,
                               opts.record_time ? ms : 0.0});
  for (std::size_t t = 0; t < cfg.horizon; ++t) {
    const Gaussian& b = plan.rollout.beliefs[t];
    const Vector next_action =
        t + 1 < cfg.horizon ? Vector(plan.actions.segment(static_cast<Eigen::Index>(t + 1) * a, a)) : Vector();
    const double step_cost = lambda[t] * plan.rollout.divergences[t] +
                             env->collision_gain() * static_cast<double>(plan.rollout.collisions[t]);
    rows.push_back(TrajectoryRow{t + 1, next_action, b.mean(), b.covariance(), plan.rollout.divergences[t], step_cost,
                                 0.0});
  }

  std::vector<Polyline> paths;
  const ActionScaling scaling(*env, cfg.horizon);
  if (const auto* mix = std::get_if<Gmm>(&plan.cem.distribution)) {
    for (const auto& c : mix->components()) {
      const Vector z = c.mean().cwiseMax(-1.0).cwiseMin(1.0);
      paths.push_back(nominal_path(*env, scenario.start.mean(), scaling.to_physical(z)));
    }
  } else {
    paths.push_back(nominal_path(*env, scenario.start.mean(), plan.actions));
  }

  json meta = metadata(scenario, seed, "plan");
  meta["total_cost"] = finite_or_null(plan.rollout.cost);
  meta["cem_iterations"] = plan.cem.trace.size();
  meta["planned_actions"] = vec_json(plan.actions);
  meta["wall_ms"] = ms;

  write_scenario(scenario, out_dir / "scenario.json");
  write_json(out_dir / "metadata.json", meta);
  write_trajectory_csv(out_dir / "trajectory.csv", rows, a, env->state_dim());
  {
    std::ofstream trace(out_dir / "trace.jsonl", std::ios::binary);
    for (const auto& it : plan.cem.trace) trace << trace_to_json(it).dump() << "\n";
  }
  write_paths(out_dir / "paths.json", paths);
  write_plot(out_dir);
  return meta;
}

json cmd_mpc(const Scenario& scenario, const fs::path& out_dir, std::size_t n_runs, const RunOptions& opts) {
  if (n_runs < 1) throw ValidationError("--runs must be >= 1");
  fs::create_directories(out_dir);
  const std::uint64_t base_seed = opts.seed.value_or(scenario.seed);
  const auto env = scenario.make_environment();
  MpcProblem problem = scenario.problem();

  // Runs are independent; with several runs the workers go to whole runs.
  const int run_workers = n_runs > 1 ? opts.threads : 1;
  problem.cfg.cem.threads = n_runs > 1 ? 1 : opts.threads;

  std::vector<json> entries(n_runs);
  parallel_for(n_runs, run_workers, [&](std::size_t r) {
    const std::uint64_t seed = base_seed + r;
    const fs::path dir = out_dir / run_name(r);
    fs::create_directories(dir);
    json entry{{"run", r}, {"seed", seed}, {"dir", run_name(r)}};
    json meta = metadata(scenario, seed, "mpc");
    meta["run"] = r;
    try {
      const TrajectoryLog log = run_mpc(problem, seed);
      meta["status"] = std::string(to_string(log.status));
      meta["planning_calls"] = log.planning_calls;
      meta["divergence_offset"] = log.divergence_offset;
      meta["divergence_note"] = log.divergence_note;
      meta["eta"] = scenario.planner.eta;

      Polyline path;
      std::size_t predicted = 0;
      std::size_t path_hits = 0;
      json series = json::array();
      for (const auto& s : log.steps) {
        path.push_back(env->position(s.true_state));
        series.push_back(finite_or_null(s.divergence));
        predicted += s.predicted_collisions;
        path_hits += s.path_collision ? 1 : 0;
      }
      const StepRecord& last = log.steps.back();
      entry["status"] = std::string(to_string(log.status));
      entry["steps"] = log.steps.size();
      entry["planning_calls"] = log.planning_calls;
      entry["final_mean"] = vec_json(last.belief.mean());
      entry["terminal_state"] = vec_json(last.true_state);
      entry["terminal_position"] = vec_json(env->position(last.true_state));
      entry["final_divergence"] = finite_or_null(last.divergence);
      entry["divergence_series"] = series;
      entry["predicted_sigma_collisions"] = predicted;
      entry["executed_path_collisions"] = path_hits;
      if (!log.error.empty()) entry["error"] = log.error;
      if (const auto* mix = std::get_if<Gmm>(&scenario.goal)) {
        const auto [mode, dists] = attribute_mode(*mix, last.belief.mean());
        entry["attributed_component"] = mode;
        entry["mahalanobis"] = dists;
      }
      if (const auto* arm = std::get_if<ArmConfig>(&scenario.environment)) {
        entry["ee_error"] = (env->position(last.true_state) - Vector(arm->target)).norm();
      }

      write_scenario(scenario, dir / "scenario.json");
      write_json(dir / "metadata.json", meta);
      write_trajectory_csv(dir / "trajectory.csv", rows_from_log(log, opts.record_time), env->action_dim(),
                           env->state_dim());
      write_run_log(dir / "run.jsonl", meta, log);
      write_paths(dir / "paths.json", {path});
      write_plot(dir);
    } catch (const std::exception& e) {
      entry["status"] = "error";
      entry["error"] = e.what();
      meta["status"] = "error";
      meta["error"] = e.what();
      write_json(dir / "metadata.json", meta);
    }
    entries[r] = std::move(entry);
  });

  json summary = metadata(scenario, base_seed, "mpc");
  summary["n_runs"] = n_runs;
  summary["eta"] = scenario.planner.eta;
  json counts = json::object();
  json modes = json::object();
  for (const auto& e : entries) {
    counts[e["status"].get<std::string>()] = counts.value(e["status"].get<std::string>(), 0) + 1;
    if (e.contains("attributed_component")) {
      const std::string k = std::to_string(e["attributed_component"].get<std::size_t>());
      modes[k] = modes.value(k, 0) + 1;
    }
  }
  summary["status_counts"] = counts;
  if (std::holds_alternative<Gmm>(scenario.goal)) summary["attribution_counts"] = modes;
  summary["runs"] = entries;
  write_json(out_dir / "summary.json", summary);
  return summary;
}

json cmd_verify(const std::string& suite, std::size_t instances, std::uint64_t seed, int threads) {
  if (suite != "reductions") throw ValidationError("unknown verify suite \"" + suite + "\" (available: reductions)");
  if (instances < 1) throw ValidationError("--instances must be >= 1");
  const auto reports = run_reductions_suite(instances, seed, threads);
  json out{{"suite", suite}, {"instances", instances}, {"seed", seed}};
  json arr = json::array();
  bool ok = true;
  for (const auto& r : reports) {
    ok = ok && r.violations.empty();
    arr.push_back(json{{"reduction", r.reduction},
                       {"instances", r.instances},
                       {"violations", r.violations},
                       {"notes", r.notes}});
  }
  out["reports"] = arr;
  out["ok"] = ok;
  return out;
}

void cmd_plot(const fs::path& run_dir, const fs::path& out_svg) {
  const Scenario scenario = load_scenario(run_dir / "scenario.json");
  const auto env = scenario.make_environment();
  PlotInput input;
  if (fs::exists(run_dir / "trajectory.csv")) {
    for (const auto& row : read_trajectory_csv(run_dir / "trajectory.csv", env->action_dim(), env->state_dim())) {
      if (row.step == 0) continue;
      input.ellipses.emplace_back(row.mean, row.covariance);
    }
  }
  if (fs::exists(run_dir / "paths.json")) input.paths = read_paths(run_dir / "paths.json");
  std::ofstream out(out_svg, std::ios::binary);
  if (!out) throw Error("cannot write " + out_svg.string());
  out << render_svg(scenario, input);
}

}  // namespace distplan
