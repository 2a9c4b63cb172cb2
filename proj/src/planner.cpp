#include "distplan/planner.hpp"

#include <chrono>
#include <cmath>
#include <limits>
#include <optional>
#include <string>

#include "distplan/error.hpp"

namespace distplan {

std::string_view to_string(LambdaMode m) {
  return m == LambdaMode::AlgTOverH ? "alg_t_over_H" : "text_i_minus_t_over_H";
}

LambdaMode parse_lambda_mode(std::string_view s) {
  if (s == "alg_t_over_H") return LambdaMode::AlgTOverH;
  if (s == "text_i_minus_t_over_H") return LambdaMode::TextIMinusTOverH;
  throw ValidationError("lambda_mode must be alg_t_over_H or text_i_minus_t_over_H, got \"" + std::string(s) + "\"");
}

std::vector<double> horizon_weights(LambdaMode /*mode*/, std::size_t horizon) {
  if (horizon < 1) throw ValidationError("horizon must be >= 1");
  // The (i - t)/H mode indexes beliefs i = t..t+H with the current belief at i = t.
  // That term has weight 0 and is skipped, leaving (i - t)/H = k/H on the
  // predicted beliefs, the same values as the t/H mode.
  const double h = static_cast<double>(horizon);
  std::vector<double> w(horizon);
  for (std::size_t k = 1; k <= horizon; ++k) {
    w[k - 1] = static_cast<double>(k) / h;
  }
  w.back() = 1.0;
  return w;
}

std::string_view to_string(RunStatus s) {
  switch (s) {
    case RunStatus::Converged: return "converged";
    case RunStatus::Infeasible: return "infeasible";
    default: return "max_steps";
  }
}

void PlannerConfig::validate() const {
  if (horizon < 1) throw ValidationError("planner.horizon must be >= 1");
  if (!(eta > 0.0)) throw ValidationError("planner.eta must be > 0");
  if (max_mpc_steps < 1) throw ValidationError("planner.max_mpc_steps must be >= 1");
}

ActionScaling::ActionScaling(const Environment& env, std::size_t horizon) {
  const Vector lo = env.action_lower();
  const Vector hi = env.action_upper();
  const Eigen::Index a = lo.size();
  lower.resize(a * static_cast<Eigen::Index>(horizon));
  upper.resize(lower.size());
  for (std::size_t t = 0; t < horizon; ++t) {
    lower.segment(static_cast<Eigen::Index>(t) * a, a) = lo;
    upper.segment(static_cast<Eigen::Index>(t) * a, a) = hi;
  }
}

Vector ActionScaling::to_physical(const Vector& z) const {
  if (z.size() != lower.size()) throw DimensionError("action sequence has the wrong length");
  return lower + (0.5 * (z.array() + 1.0) * (upper - lower).array()).matrix();
}

Vector ActionScaling::to_normalized(const Vector& u) const {
  if (u.size() != lower.size()) throw DimensionError("action sequence has the wrong length");
  return (2.0 * (u - lower).array() / (upper - lower).array() - 1.0).matrix();
}

Rollout rollout_cost(const Vector& actions, const Gaussian& start, const GoalSpec& goal, const Environment& env,
                     const PlannerConfig& cfg) {
  const Eigen::Index a = env.action_dim();
  if (actions.size() != a * static_cast<Eigen::Index>(cfg.horizon)) {
    throw DimensionError("rollout needs " + std::to_string(cfg.horizon) + " actions of dimension " +
                         std::to_string(a));
  }
  const std::vector<double> lambda = horizon_weights(cfg.lambda_mode, cfg.horizon);
  const Dynamics f = [&env](const Vector& x, const Vector& u) { return env.step(x, u); };

  Rollout out;
  out.beliefs.reserve(cfg.horizon);
  out.sigma.reserve(cfg.horizon);
  Gaussian belief = start;
  for (std::size_t t = 0; t < cfg.horizon; ++t) {
    const Vector u = actions.segment(static_cast<Eigen::Index>(t) * a, a);
    UtResult ut = unscented_transform(belief, u, f, cfg.ut);
    const double d = goal_cost(ut.belief, goal, cfg.projection, cfg.ut.beta);
    const std::size_t hits = env.count_collisions(ut.prior, ut.propagated, u);
    out.cost += lambda[t] * d + env.collision_gain() * static_cast<double>(hits);
    out.divergences.push_back(d);
    out.collisions.push_back(hits);
    belief = ut.belief;
    out.beliefs.push_back(std::move(ut.belief));
    out.sigma.push_back(std::move(ut.propagated));
  }
  out.cost += env.belief_cost(out.beliefs, lambda);
  if (std::isnan(out.cost)) throw NumericalError("rollout cost is NaN");
  return out;
}

TerminationMetric::TerminationMetric(GoalSpec goal, Projection proj, double beta, const Matrix& observation_cov)
    : goal_(std::move(goal)), proj_(proj), beta_(beta) {
  if (const auto* d = std::get_if<DiracDelta>(&goal_)) {
    offset_ = goal_cost(Gaussian(d->point, observation_cov), goal_, proj_, beta_);
    note_ = "dirac goal: divergence = -log N(g | belief) + log N(g | g, observation_cov)";
  } else if (const auto* b = std::get_if<UniformBox>(&goal_)) {
    offset_ = goal_cost(Gaussian(b->center(), observation_cov), goal_, proj_, beta_);
    note_ = "uniform goal: divergence = cost(belief) - cost(N(box center, observation_cov))";
  } else {
    note_ = std::string(kind_name(goal_)) + " goal: divergence = goal_cost(belief)";
  }
}

double TerminationMetric::operator()(const Gaussian& belief) const {
  return goal_cost(belief, goal_, proj_, beta_) - offset_;
}

PlanOutcome plan_once(const Gaussian& start, const GoalSpec& goal, const Environment& env, const PlannerConfig& cfg,
                      std::uint64_t seed) {
  const ActionScaling scaling(env, cfg.horizon);
  CemConfig cem = cfg.cem;
  cem.lower = Vector::Constant(scaling.lower.size(), -1.0);
  cem.upper = Vector::Constant(scaling.lower.size(), 1.0);
  const RolloutCostFn fn = [&](const Vector& z) {
    return rollout_cost(scaling.to_physical(z), start, goal, env, cfg);
  };
  PlanOutcome out{plan_cem(fn, cem, seed), Vector(), Rollout()};
  out.actions = scaling.to_physical(out.cem.actions);
  out.rollout = rollout_cost(out.actions, start, goal, env, cfg);
  return out;
}

TrajectoryLog run_mpc(const MpcProblem& problem, std::uint64_t seed) {
  const Environment& env = *problem.env;
  const PlannerConfig& cfg = problem.cfg;
  cfg.validate();
  const Eigen::Index n = env.state_dim();
  if (problem.start.dim() != n || dim(problem.goal) != n) {
    throw DimensionError("start belief and goal must match the environment state dimension " + std::to_string(n));
  }
  const TerminationMetric metric(problem.goal, cfg.projection, cfg.ut.beta, problem.observation_cov);

  TrajectoryLog log;
  log.divergence_offset = metric.offset();
  log.divergence_note = metric.note();

  PlannerConfig planner = cfg;
  planner.ut.process_noise = env.process_noise();
  const Matrix noise = env.process_noise();
  const Matrix noise_chol = robust_cholesky(noise).lower;
  Rng noise_rng = make_rng(seed, {stream::kMpcNoise});

  Vector x_true = problem.start.mean();
  Gaussian belief = problem.start;
  for (std::size_t step = 0;; ++step) {
    StepRecord rec{step, Vector(), belief, x_true, metric(belief), std::numeric_limits<double>::quiet_NaN()};
    if (rec.divergence < cfg.eta) {
      log.steps.push_back(std::move(rec));
      log.status = RunStatus::Converged;
      break;
    }
    if (step >= cfg.max_mpc_steps) {
      log.steps.push_back(std::move(rec));
      log.status = RunStatus::MaxSteps;
      break;
    }
    const auto t0 = std::chrono::steady_clock::now();
    std::optional<PlanOutcome> plan;
    ++log.planning_calls;
    try {
      plan = plan_once(belief, problem.goal, env, planner, derive_seed(seed, {stream::kMpcPlan, step}));
    } catch (const InfeasibleError& e) {
      log.error = e.what();
      log.steps.push_back(std::move(rec));
      log.status = RunStatus::Infeasible;
      break;
    }
    const Eigen::Index a = env.action_dim();
    const Vector u = plan->actions.head(a);
    rec.action = u;
    rec.cost = plan->rollout.cost;
    rec.trace = plan->cem.trace;
    rec.predicted_collisions = plan->rollout.collisions.front();
    rec.path_collision = env.path_collides(x_true, u);
    rec.wall_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
    log.steps.push_back(std::move(rec));

    x_true = env.normalize_state(env.step(x_true, u) + noise_chol * standard_normal(n, noise_rng));
    if (!x_true.allFinite()) throw NumericalError("true state became non-finite at step " + std::to_string(step));
    belief = Gaussian(x_true, problem.observation_cov);
  }
  return log;
}

}  // namespace distplan
