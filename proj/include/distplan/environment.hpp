#pragma once

#include <cstddef>
#include <span>
#include <string_view>
#include <vector>

#include "distplan/distributions.hpp"
#include "distplan/unscented.hpp"

namespace distplan {

// What the planner needs from a world: dynamics f, process noise, the
// per-step sigma-point cost phi, and optional belief-level extra costs.
class Environment {
 public:
  virtual ~Environment() = default;

  virtual std::string_view kind() const = 0;
  virtual Eigen::Index state_dim() const = 0;
  virtual Eigen::Index action_dim() const = 0;  // per step
  virtual Vector action_lower() const = 0;
  virtual Vector action_upper() const = 0;

  // Deterministic part of the dynamics, as used for sigma-point propagation.
  virtual Vector step(const Vector& state, const Vector& action) const = 0;
  // Applied to the true state after each executed step (heading wrap etc.).
  virtual Vector normalize_state(const Vector& state) const { return state; }
  virtual Matrix process_noise() const = 0;

  // Number of sigma points whose path from prior to propagated collides.
  virtual std::size_t count_collisions(const SigmaPointSet& prior, const SigmaPointSet& propagated,
                                       const Vector& action) const = 0;
  virtual double collision_gain() const = 0;

  double sigma_cost(const SigmaPointSet& prior, const SigmaPointSet& propagated, const Vector& action) const {
    return collision_gain() * static_cast<double>(count_collisions(prior, propagated, action));
  }

  // Whether the path of a single state under action collides.
  virtual bool path_collides(const Vector& state, const Vector& action) const = 0;

  // Extra cost on the predicted beliefs of a rollout, weights[t] for step t.
  virtual double belief_cost(std::span<const Gaussian> /*beliefs*/,
                             std::span<const double> /*weights*/) const {
    return 0.0;
  }

  // Workspace position used for plotting and distance checks.
  virtual Vector position(const Vector& state) const = 0;
  // Workspace positions along the path of one step (excluding the start).
  virtual std::vector<Vector> path(const Vector& state, const Vector& action, int substeps) const = 0;
};

}  // namespace distplan
