#pragma once

#include <span>
#include <vector>

#include <Eigen/Geometry>

#include "distplan/environment.hpp"

namespace distplan {

struct Joint {
  Eigen::Vector3d axis;    // rotation axis in the parent frame (unit length after validation)
  Eigen::Vector3d offset;  // translation to the next joint, applied after the rotation
};

struct Sphere {
  Eigen::Vector3d center;
  double radius = 0.0;
};

struct ArmConfig {
  std::vector<Joint> joints;
  Vector lower_limits;  // rad
  Vector upper_limits;  // rad
  double max_step = 0.2;  // per-step joint command bound (rad)
  double alpha = 1e-4;    // process noise variance (rad^2)
  std::vector<Sphere> obstacles;
  double link_radius = 0.04;  // proxy sphere radius (m)
  int spheres_per_link = 3;
  Eigen::Vector3d target = Eigen::Vector3d::Zero();  // x_d (m)
  double gamma = 100.0;
  double ee_weight = 1.0;  // gain on the end-effector term
  int collision_substeps = 8;

  std::size_t n_joints() const { return joints.size(); }
  void validate() const;

  /// 7-joint chain, straight along +x at q = 0, total reach 0.8 m.
  static ArmConfig reference_chain();
};

struct ArmFk {
  Eigen::Vector3d end_effector;
  std::vector<Eigen::Vector3d> joint_positions;  // origin of each joint, then the end effector
  std::vector<Eigen::Vector3d> proxy_centers;
};

/// T = prod_j Rot(axis_j, q_j) Trans(offset_j) from the base at the origin.
ArmFk arm_fk(const ArmConfig& cfg, const Vector& q);

/// sum_t lambda_t ||x_d - FK(mean_t)||^2
double arm_ee_cost(const ArmConfig& cfg, std::span<const Gaussian> beliefs, const Eigen::Vector3d& target,
                   std::span<const double> lambdas);

class ArmEnv final : public Environment {
 public:
  explicit ArmEnv(ArmConfig cfg);

  const ArmConfig& config() const { return cfg_; }

  std::string_view kind() const override { return "arm"; }
  Eigen::Index state_dim() const override { return static_cast<Eigen::Index>(cfg_.n_joints()); }
  Eigen::Index action_dim() const override { return state_dim(); }
  Vector action_lower() const override { return Vector::Constant(state_dim(), -cfg_.max_step); }
  Vector action_upper() const override { return Vector::Constant(state_dim(), cfg_.max_step); }
  Vector step(const Vector& state, const Vector& action) const override;
  Matrix process_noise() const override;
  std::size_t count_collisions(const SigmaPointSet& prior, const SigmaPointSet& propagated,
                               const Vector& action) const override;
  double collision_gain() const override { return cfg_.gamma; }
  bool path_collides(const Vector& state, const Vector& action) const override;
  double belief_cost(std::span<const Gaussian> beliefs, std::span<const double> weights) const override;
  Vector position(const Vector& state) const override;
  std::vector<Vector> path(const Vector& state, const Vector& action, int substeps) const override;

  // Proxy spheres touching an obstacle, or joints outside their limits.
  bool in_collision(const Vector& q) const;

 private:
  ArmConfig cfg_;
};

}  // namespace distplan
