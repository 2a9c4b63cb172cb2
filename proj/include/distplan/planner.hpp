#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include "distplan/cem.hpp"
#include "distplan/environment.hpp"

namespace distplan {

enum class LambdaMode {
  AlgTOverH,         // lambda_t = t / H for t = 1..H
  TextIMinusTOverH,  // lambda_i = (i - t) / H for i = t..t+H; the start belief gets weight 0
};

std::string_view to_string(LambdaMode m);
LambdaMode parse_lambda_mode(std::string_view s);

/// Weights of the H predicted beliefs (index 0 is the first step after the
/// start). Both modes are strictly increasing and end at exactly 1.
std::vector<double> horizon_weights(LambdaMode mode, std::size_t horizon);

struct PlannerConfig {
  std::size_t horizon = 5;  // H, one UT step per action
  double eta = 1.0;         // stop when the goal divergence drops below eta
  std::size_t max_mpc_steps = 200;
  Projection projection = Projection::M;
  LambdaMode lambda_mode = LambdaMode::AlgTOverH;
  UtConfig ut;
  CemConfig cem;  // bounds are set by the planner: samples live in [-1, 1]

  void validate() const;
};

/// Affine map between the CEM sampling box [-1, 1]^(H a) and physical
/// per-step action bounds tiled over the horizon.
struct ActionScaling {
  Vector lower;
  Vector upper;

  ActionScaling(const Environment& env, std::size_t horizon);
  Vector to_physical(const Vector& z) const;
  Vector to_normalized(const Vector& u) const;
};

/// Cost of a physical action sequence:
///   sum_t lambda_t goal_cost(belief_t) + phi(P_sigma,t)  (+ environment belief cost)
Rollout rollout_cost(const Vector& actions, const Gaussian& start, const GoalSpec& goal, const Environment& env,
                     const PlannerConfig& cfg);

/// Goal divergence used for termination. Gaussian and GMM goals use
/// goal_cost directly; Dirac and Uniform goals subtract the value at a
/// reference belief (the goal point, or the box center, with the observation
/// covariance) so eta means the same thing across goal types.
class TerminationMetric {
 public:
  TerminationMetric(GoalSpec goal, Projection proj, double beta, const Matrix& observation_cov);
  double operator()(const Gaussian& belief) const;
  double offset() const { return offset_; }
  const std::string& note() const { return note_; }

 private:
  GoalSpec goal_;
  Projection proj_;
  double beta_;
  double offset_ = 0.0;
  std::string note_;
};

struct MpcProblem {
  std::shared_ptr<const Environment> env;
  Gaussian start;
  GoalSpec goal;
  PlannerConfig cfg;
  Matrix observation_cov;  // covariance of the belief after each executed step
};

enum class RunStatus { Converged, MaxSteps, Infeasible };
std::string_view to_string(RunStatus s);

struct StepRecord {
  std::size_t step = 0;
  Vector action;            // physical action executed from this belief; empty on the final row
  Gaussian belief;          // belief at the start of the step
  Vector true_state;
  double divergence = 0.0;  // termination divergence of `belief`
  double cost = 0.0;        // rollout cost of the chosen plan, NaN when no plan was made
  double wall_ms = 0.0;
  std::size_t predicted_collisions = 0;  // colliding sigma points on the executed step
  bool path_collision = false;           // true-state path of the executed step collides
  std::vector<CemIteration> trace;
};

struct TrajectoryLog {
  std::vector<StepRecord> steps;
  RunStatus status = RunStatus::MaxSteps;
  double divergence_offset = 0.0;
  std::string divergence_note;
  std::size_t planning_calls = 0;
  std::string error;  // message when the run stopped on an error
};

/// One planning call from `start`: CEM over normalized actions, returning
/// the physical plan and its rollout.
struct PlanOutcome {
  CemResult cem;
  Vector actions;  // physical
  Rollout rollout;
};
PlanOutcome plan_once(const Gaussian& start, const GoalSpec& goal, const Environment& env, const PlannerConfig& cfg,
                      std::uint64_t seed);

/// Receding-horizon loop: plan, execute the first action with process
/// noise, observe the true state, repeat until the divergence is below eta.
TrajectoryLog run_mpc(const MpcProblem& problem, std::uint64_t seed);

}  // namespace distplan
