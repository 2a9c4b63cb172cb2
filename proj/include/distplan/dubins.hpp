#pragma once

#include <numbers>
#include <vector>

#include "distplan/environment.hpp"

namespace distplan {

struct Rect {
  double xmin = 0, ymin = 0, xmax = 0, ymax = 0;
  // Closed set: boundary points are inside.
  bool contains(double x, double y) const { return x >= xmin && x <= xmax && y >= ymin && y <= ymax; }
};

struct DubinsConfig {
  double v_max = 1.0;                       // m/s
  double psi_max = std::numbers::pi / 3.0;  // rad, turn rate bounded by tan(psi_max)
  double tau_min = 0.2;                     // s
  double tau_max = 2.0;                     // s
  std::size_t m_primitives = 5;
  double alpha = 0.02;                      // process noise variance per primitive
  double u_epsilon = 1e-5;                  // turn-rate offset u'
  double gamma = 100.0;                     // collision gain
  std::vector<Rect> obstacles;
  Rect world{-6.0, -3.0, 6.0, 3.0};
  int collision_substeps = 8;

  void validate() const;
};

// Wraps an angle into (-pi, pi].
double wrap_angle(double a);

/// One arc primitive (v, u, tau) from pose (px, py, phi) with u~ = u + u':
///   px' = px + v/u~ (sin(phi + tau u~) - sin phi)
///   py' = py + v/u~ (cos phi - cos(phi + tau u~))
///   phi' = wrap(phi + tau u~)
Vector dubins_step(const Vector& state, const Vector& primitive, double u_epsilon = 1e-5);

// Same arc without the heading wrap; used inside sigma-point propagation so
// headings near +-pi average correctly.
Vector dubins_arc(const Vector& state, const Vector& primitive, double u_epsilon);

/// States after each of the m primitives in a flattened (v, u, tau)* action.
std::vector<Vector> dubins_rollout(const Vector& state, const Vector& action, double u_epsilon = 1e-5);

class DubinsEnv final : public Environment {
 public:
  explicit DubinsEnv(DubinsConfig cfg);

  const DubinsConfig& config() const { return cfg_; }

  std::string_view kind() const override { return "dubins"; }
  Eigen::Index state_dim() const override { return 3; }
  Eigen::Index action_dim() const override { return 3; }
  Vector action_lower() const override;
  Vector action_upper() const override;
  Vector step(const Vector& state, const Vector& action) const override;
  Vector normalize_state(const Vector& state) const override;
  Matrix process_noise() const override;
  std::size_t count_collisions(const SigmaPointSet& prior, const SigmaPointSet& propagated,
                               const Vector& action) const override;
  double collision_gain() const override { return cfg_.gamma; }
  bool path_collides(const Vector& state, const Vector& action) const override;
  Vector position(const Vector& state) const override { return state.head<2>(); }
  std::vector<Vector> path(const Vector& state, const Vector& action, int substeps) const override;

  // Position-only indicator: inside an obstacle or outside the world.
  bool in_collision(const Vector& state) const;

  /// gamma * number of points in collision (endpoints only, no sweep).
  double collision_cost(const SigmaPointSet& points) const;

 private:
  DubinsConfig cfg_;
};

}  // namespace distplan
