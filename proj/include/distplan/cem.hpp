#pragma once

#include <cstdint>
#include <functional>
#include <string_view>
#include <variant>
#include <vector>

#include "distplan/distributions.hpp"
#include "distplan/unscented.hpp"

namespace distplan {

enum class CovarianceMode { Auto, Full, Diagonal };

std::string_view to_string(CovarianceMode m);
CovarianceMode parse_covariance_mode(std::string_view s);

struct CemConfig {
  std::size_t n_samples = 128;  // M
  std::size_t n_elite = 16;     // K
  std::size_t max_iters = 30;
  double epsilon = 1e-3;        // stop when D(prev || next) < epsilon
  Vector lower;                 // per-dimension sample bounds
  Vector upper;
  double init_scale = 1.0;      // theta_u starts as N(0, init_scale^2 I)
  std::size_t n_components = 1;  // 1 = Gaussian planner, >1 = GMM planner
  CovarianceMode covariance = CovarianceMode::Auto;  // Auto: full up to 32 dims
  double variance_floor = 1e-6;
  double beta = 1.0;            // sigma dispersion for the GMM stopping rule
  int threads = 1;

  void validate(Eigen::Index dim) const;
  bool diagonal_covariance(Eigen::Index dim) const;
};

using PlanDistribution = std::variant<Gaussian, Gmm>;

struct Rollout {
  double cost = 0.0;
  std::vector<Gaussian> beliefs;      // predicted belief after each step
  std::vector<SigmaPointSet> sigma;   // propagated sigma points of each step
  std::vector<double> divergences;    // goal_cost of each predicted belief
  std::vector<std::size_t> collisions;  // colliding sigma points per step
};

// Action sequence (flattened, sampling space) -> rollout. Must be pure.
using RolloutCostFn = std::function<Rollout(const Vector& actions)>;

struct CemIteration {
  std::size_t iter = 0;
  double elite_mean_cost = 0.0;
  double elite_min_cost = 0.0;
  double elite_threshold = 0.0;  // K-th smallest cost
  double kl_step = 0.0;
};

struct CemResult {
  Vector actions;
  PlanDistribution distribution;
  std::vector<CemIteration> trace;
};

/// D(prev || next); closed form for Gaussians, sigma-point approximation
/// for mixtures. Throws on a family mismatch.
double convergence_metric(const PlanDistribution& prev, const PlanDistribution& next, double beta);

/// Cross-entropy search over action sequences. Every sample draws from its
/// own stream derived from (seed, attempt, sample index), so results do not
/// depend on cfg.threads.
CemResult plan_cem(const RolloutCostFn& cost_fn, const CemConfig& cfg, std::uint64_t seed);

}  // namespace distplan
