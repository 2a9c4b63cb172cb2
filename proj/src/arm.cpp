#include "distplan/arm.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "distplan/error.hpp"

namespace distplan {

void ArmConfig::validate() const {
  const auto n = static_cast<Eigen::Index>(joints.size());
  if (n < 2) throw ValidationError("arm.joints needs at least 2 joints");
  if (lower_limits.size() != n || upper_limits.size() != n) {
    throw ValidationError("arm joint limits must have one entry per joint");
  }
  for (Eigen::Index i = 0; i < n; ++i) {
    if (!(lower_limits[i] < upper_limits[i])) {
      throw ValidationError("arm joint limits need lower < upper (joint " + std::to_string(i) + ")");
    }
    const Joint& j = joints[static_cast<std::size_t>(i)];
    if (!j.axis.allFinite() || !(j.axis.norm() > 0.0) || !j.offset.allFinite()) {
      throw ValidationError("arm.joints[" + std::to_string(i) + "] needs a finite nonzero axis and finite offset");
    }
  }
  if (!(max_step > 0.0)) throw ValidationError("arm.max_step must be > 0");
  if (!(alpha >= 0.0)) throw ValidationError("arm.alpha must be >= 0");
  if (!(link_radius > 0.0)) throw ValidationError("arm.link_radius must be > 0");
  if (spheres_per_link < 1) throw ValidationError("arm.spheres_per_link must be >= 1");
  for (std::size_t i = 0; i < obstacles.size(); ++i) {
    if (!(obstacles[i].radius > 0.0) || !obstacles[i].center.allFinite()) {
      throw ValidationError("arm.obstacles[" + std::to_string(i) + "] needs a finite center and radius > 0");
    }
  }
  if (!target.allFinite()) throw ValidationError("arm.target must be finite");
  if (!(gamma > 0.0)) throw ValidationError("arm.gamma must be > 0");
  if (!(ee_weight >= 0.0)) throw ValidationError("arm.ee_weight must be >= 0");
  if (collision_substeps < 1) throw ValidationError("arm.collision_substeps must be >= 1");
}

ArmConfig ArmConfig::reference_chain() {
  ArmConfig cfg;
  const Eigen::Vector3d z = Eigen::Vector3d::UnitZ();
  const Eigen::Vector3d y = Eigen::Vector3d::UnitY();
  const Eigen::Vector3d x = Eigen::Vector3d::UnitX();
  const double lengths[7] = {0.10, 0.15, 0.15, 0.15, 0.10, 0.10, 0.05};
  const Eigen::Vector3d axes[7] = {z, y, x, y, x, y, x};
  for (int i = 0; i < 7; ++i) cfg.joints.push_back({axes[i], lengths[i] * x});
  cfg.lower_limits = Vector::Constant(7, -2.9);
  cfg.upper_limits = Vector::Constant(7, 2.9);
  cfg.target = Eigen::Vector3d(0.8, 0.0, 0.0);
  return cfg;
}

ArmFk arm_fk(const ArmConfig& cfg, const Vector& q) {
  const auto n = static_cast<Eigen::Index>(cfg.joints.size());
  if (q.size() != n) {
    throw DimensionError("arm_fk expects " + std::to_string(n) + " joint values, got " + std::to_string(q.size()));
  }
  const double slack = 2.0 * std::numbers::pi;
  for (Eigen::Index i = 0; i < n; ++i) {
    if (!std::isfinite(q[i]) || q[i] < cfg.lower_limits[i] - slack || q[i] > cfg.upper_limits[i] + slack) {
      throw ValidationError("arm_fk joint " + std::to_string(i) + " is outside its limits by more than 2 pi");
    }
  }
  ArmFk out;
  out.joint_positions.reserve(static_cast<std::size_t>(n) + 1);
  out.proxy_centers.reserve(static_cast<std::size_t>(n * cfg.spheres_per_link));
  Eigen::Matrix3d rot = Eigen::Matrix3d::Identity();
  Eigen::Vector3d pos = Eigen::Vector3d::Zero();
  for (Eigen::Index i = 0; i < n; ++i) {
    const Joint& j = cfg.joints[static_cast<std::size_t>(i)];
    out.joint_positions.push_back(pos);
    rot = rot * Eigen::AngleAxisd(q[i], j.axis.normalized()).toRotationMatrix();
    const Eigen::Vector3d next = pos + rot * j.offset;
    for (int k = 1; k <= cfg.spheres_per_link; ++k) {
      out.proxy_centers.push_back(pos + (static_cast<double>(k) / cfg.spheres_per_link) * (next - pos));
    }
    pos = next;
  }
  out.joint_positions.push_back(pos);
  out.end_effector = pos;
  return out;
}

double arm_ee_cost(const ArmConfig& cfg, std::span<const Gaussian> beliefs, const Eigen::Vector3d& target,
                   std::span<const double> lambdas) {
  if (beliefs.size() != lambdas.size()) throw DimensionError("arm_ee_cost needs one weight per belief");
  double total = 0.0;
  for (std::size_t t = 0; t < beliefs.size(); ++t) {
    total += lambdas[t] * (target - arm_fk(cfg, beliefs[t].mean()).end_effector).squaredNorm();
  }
  return total;
}

ArmEnv::ArmEnv(ArmConfig cfg) : cfg_(std::move(cfg)) {
  cfg_.validate();
  for (auto& j : cfg_.joints) j.axis.normalize();
}

Vector ArmEnv::step(const Vector& state, const Vector& action) const {
  if (state.size() != state_dim() || action.size() != state_dim()) throw DimensionError("arm step dimension mismatch");
  return state + action;
}

Matrix ArmEnv::process_noise() const { return cfg_.alpha * Matrix::Identity(state_dim(), state_dim()); }

bool ArmEnv::in_collision(const Vector& q) const {
  for (Eigen::Index i = 0; i < q.size(); ++i) {
    if (q[i] < cfg_.lower_limits[i] || q[i] > cfg_.upper_limits[i]) return true;
  }
  const ArmFk fk = arm_fk(cfg_, q);
  for (const auto& c : fk.proxy_centers) {
    for (const Sphere& s : cfg_.obstacles) {
      const double reach = s.radius + cfg_.link_radius;
      if ((c - s.center).squaredNorm() <= reach * reach) return true;
    }
  }
  return false;
}

bool ArmEnv::path_collides(const Vector& state, const Vector& action) const {
  for (int k = 1; k <= cfg_.collision_substeps; ++k) {
    if (in_collision(state + (static_cast<double>(k) / cfg_.collision_substeps) * action)) return true;
  }
  return false;
}

std::size_t ArmEnv::count_collisions(const SigmaPointSet& prior, const SigmaPointSet& /*propagated*/,
                                     const Vector& action) const {
  std::size_t count = 0;
  for (const auto& p : prior.points) count += path_collides(p, action) ? 1 : 0;
  return count;
}

double ArmEnv::belief_cost(std::span<const Gaussian> beliefs, std::span<const double> weights) const {
  if (cfg_.ee_weight == 0.0) return 0.0;
  return cfg_.ee_weight * arm_ee_cost(cfg_, beliefs, cfg_.target, weights);
}

Vector ArmEnv::position(const Vector& state) const { return arm_fk(cfg_, state).end_effector; }

std::vector<Vector> ArmEnv::path(const Vector& state, const Vector& action, int substeps) const {
  std::vector<Vector> out;
  for (int k = 1; k <= substeps; ++k) {
    out.push_back(position(state + (static_cast<double>(k) / substeps) * action));
  }
  return out;
}

}  // namespace distplan
