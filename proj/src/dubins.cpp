#include "distplan/dubins.hpp"

#include <cmath>
#include <string>

#include "distplan/error.hpp"

namespace distplan {

void DubinsConfig::validate() const {
  if (!(v_max > 0.0)) throw ValidationError("dubins.v_max must be > 0");
  if (!(psi_max > 0.0 && psi_max < std::numbers::pi / 2.0)) throw ValidationError("dubins.psi_max must lie in (0, pi/2)");
  if (!(tau_min >= 0.0 && tau_min < tau_max)) throw ValidationError("dubins.tau_bounds need 0 <= min < max");
  if (m_primitives < 1) throw ValidationError("dubins.m_primitives must be >= 1");
  if (!(alpha >= 0.0)) throw ValidationError("dubins.alpha must be >= 0");
  if (!(u_epsilon > 0.0)) throw ValidationError("dubins.u_epsilon must be > 0");
  if (!(gamma > 0.0)) throw ValidationError("dubins.gamma must be > 0");
  if (!(world.xmin < world.xmax && world.ymin < world.ymax)) throw ValidationError("dubins.world must have xmin < xmax and ymin < ymax");
  for (std::size_t i = 0; i < obstacles.size(); ++i) {
    const Rect& r = obstacles[i];
    if (!(r.xmin <= r.xmax && r.ymin <= r.ymax)) {
      throw ValidationError("dubins.obstacles[" + std::to_string(i) + "] must have min <= max");
    }
  }
  if (collision_substeps < 1) throw ValidationError("dubins.collision_substeps must be >= 1");
}

double wrap_angle(double a) {
  double r = std::remainder(a, 2.0 * std::numbers::pi);
  if (r <= -std::numbers::pi) r += 2.0 * std::numbers::pi;
  return r;
}

Vector dubins_arc(const Vector& state, const Vector& primitive, double u_epsilon) {
  if (state.size() != 3 || primitive.size() != 3) throw DimensionError("dubins step needs a 3-D state and a (v, u, tau) primitive");
  const double v = primitive[0];
  const double u = primitive[1] + u_epsilon;
  const double tau = primitive[2];
  const double phi = state[2];
  const double phi_end = phi + tau * u;
  Vector out(3);
  out[0] = state[0] + (v / u) * (std::sin(phi_end) - std::sin(phi));
  out[1] = state[1] + (v / u) * (std::cos(phi) - std::cos(phi_end));
  out[2] = phi_end;
  return out;
}

Vector dubins_step(const Vector& state, const Vector& primitive, double u_epsilon) {
  Vector out = dubins_arc(state, primitive, u_epsilon);
  out[2] = wrap_angle(out[2]);
  return out;
}

std::vector<Vector> dubins_rollout(const Vector& state, const Vector& action, double u_epsilon) {
  if (action.size() % 3 != 0) throw DimensionError("dubins action length must be a multiple of 3");
  if (!action.allFinite()) throw ValidationError("dubins action has non-finite entries");
  std::vector<Vector> out;
  Vector x = state;
  for (Eigen::Index i = 0; i < action.size(); i += 3) {
    x = dubins_step(x, action.segment(i, 3), u_epsilon);
    out.push_back(x);
  }
  return out;
}

DubinsEnv::DubinsEnv(DubinsConfig cfg) : cfg_(std::move(cfg)) { cfg_.validate(); }

Vector DubinsEnv::action_lower() const {
  Vector v(3);
  v << 0.0, -std::tan(cfg_.psi_max), cfg_.tau_min;
  return v;
}

Vector DubinsEnv::action_upper() const {
  Vector v(3);
  v << cfg_.v_max, std::tan(cfg_.psi_max), cfg_.tau_max;
  return v;
}

Vector DubinsEnv::step(const Vector& state, const Vector& action) const {
  return dubins_arc(state, action, cfg_.u_epsilon);
}

Vector DubinsEnv::normalize_state(const Vector& state) const {
  // The true heading stays continuous; beliefs are built around it and a
  // jump of 2 pi would look like a large move to every Gaussian goal.
  return state;
}

Matrix DubinsEnv::process_noise() const { return cfg_.alpha * Matrix::Identity(3, 3); }

bool DubinsEnv::in_collision(const Vector& state) const {
  const double x = state[0];
  const double y = state[1];
  if (x < cfg_.world.xmin || x > cfg_.world.xmax || y < cfg_.world.ymin || y > cfg_.world.ymax) return true;
  for (const Rect& r : cfg_.obstacles) {
    if (r.contains(x, y)) return true;
  }
  return false;
}

double DubinsEnv::collision_cost(const SigmaPointSet& points) const {
  std::size_t count = 0;
  for (const auto& p : points.points) count += in_collision(p) ? 1 : 0;
  return cfg_.gamma * static_cast<double>(count);
}

bool DubinsEnv::path_collides(const Vector& state, const Vector& action) const {
  Vector sub = action;
  for (int k = 1; k <= cfg_.collision_substeps; ++k) {
    sub[2] = action[2] * static_cast<double>(k) / cfg_.collision_substeps;
    if (in_collision(dubins_arc(state, sub, cfg_.u_epsilon))) return true;
  }
  return false;
}

std::size_t DubinsEnv::count_collisions(const SigmaPointSet& prior, const SigmaPointSet& /*propagated*/,
                                        const Vector& action) const {
  std::size_t count = 0;
  for (const auto& p : prior.points) count += path_collides(p, action) ? 1 : 0;
  return count;
}

std::vector<Vector> DubinsEnv::path(const Vector& state, const Vector& action, int substeps) const {
  std::vector<Vector> out;
  Vector sub = action;
  for (int k = 1; k <= substeps; ++k) {
    sub[2] = action[2] * static_cast<double>(k) / substeps;
    out.push_back(dubins_arc(state, sub, cfg_.u_epsilon).head<2>());
  }
  return out;
}

}  // namespace distplan
