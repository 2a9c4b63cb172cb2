#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "distplan/arm.hpp"
#include "distplan/dubins.hpp"
#include "distplan/error.hpp"
#include "test_support.hpp"

using namespace distplan;
using testing_support::vec;

namespace {

constexpr double kPi = std::numbers::pi;

SigmaPointSet points(std::vector<Vector> pts) {
  SigmaPointSet s;
  s.points = std::move(pts);
  s.n = 3;
  return s;
}

ArmConfig planar_two_link() {
  ArmConfig c;
  c.joints = {{Eigen::Vector3d::UnitZ(), Eigen::Vector3d::UnitX()}, {Eigen::Vector3d::UnitZ(), Eigen::Vector3d::UnitX()}};
  c.lower_limits = Vector::Constant(2, -kPi);
  c.upper_limits = Vector::Constant(2, kPi);
  return c;
}

}  // namespace

TEST(DubinsStep, StraightLineLimit) {
  const Vector s = dubins_step(vec({0, 0, 0}), vec({1, 0, 1}));
  EXPECT_NEAR(s[0], 1.0, 1e-4);
  EXPECT_NEAR(s[1], 0.0, 1e-4);
  EXPECT_NEAR(s[2], 0.0, 1e-4);
}

TEST(DubinsStep, QuarterCircle) {
  const Vector s = dubins_step(vec({0, 0, 0}), vec({kPi / 2, kPi / 2, 1}));
  EXPECT_NEAR(s[0], 1.0, 1e-4);
  EXPECT_NEAR(s[1], 1.0, 1e-4);
  EXPECT_NEAR(s[2], kPi / 2, 1e-4);
}

TEST(DubinsStep, ZeroDurationIsIdentity) {
  const Vector start = vec({1, 2, 0.3});
  EXPECT_NEAR((dubins_step(start, vec({1, 0.5, 0})) - start).norm(), 0.0, 1e-15);
}

TEST(DubinsStep, HeadingWrapsIntoHalfOpenInterval) {
  EXPECT_DOUBLE_EQ(wrap_angle(-kPi), kPi);
  EXPECT_DOUBLE_EQ(wrap_angle(kPi), kPi);
  EXPECT_NEAR(wrap_angle(3 * kPi / 2), -kPi / 2, 1e-15);
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(-3, 3);
  for (int i = 0; i < 1000; ++i) {
    const Vector s = dubins_step(vec({0, 0, u(rng)}), vec({1, u(rng), std::abs(u(rng))}));
    EXPECT_GT(s[2], -kPi);
    EXPECT_LE(s[2], kPi);
  }
}

TEST(DubinsStep, ChordNoLongerThanArc) {
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> u(0, 2);
  for (int i = 0; i < 1000; ++i) {
    const double v = u(rng);
    const double tau = u(rng);
    const Vector s = dubins_step(vec({0, 0, u(rng)}), vec({v, u(rng) - 1.0, tau}));
    EXPECT_LE(s.head<2>().norm(), v * tau + 1e-9);
  }
}

TEST(DubinsStep, RotationEquivariance) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(-1, 1);
  for (int i = 0; i < 200; ++i) {
    const Vector start = vec({u(rng), u(rng), u(rng)});
    const Vector prim = vec({1 + u(rng), u(rng), 1 + u(rng)});
    const double a = 2 * u(rng);
    const Eigen::Rotation2Dd rot(a);
    Vector rotated_start = start;
    rotated_start.head<2>() = rot * start.head<2>();
    rotated_start[2] += a;
    const Vector end = dubins_step(start, prim);
    const Vector end_rot = dubins_step(rotated_start, prim);
    EXPECT_NEAR((rot * end.head<2>() - end_rot.head<2>()).norm(), 0.0, 1e-9);
    EXPECT_NEAR(wrap_angle(end[2] + a - end_rot[2]), 0.0, 1e-9);
  }
}

TEST(DubinsRollout, ComposesSteps) {
  const Vector start = vec({0, 0, 0});
  const Vector action = vec({1, 0, 1, kPi / 2, kPi / 2, 1});
  const auto states = dubins_rollout(start, action);
  ASSERT_EQ(states.size(), 2u);
  const Vector first = dubins_step(start, action.head(3));
  const Vector second = dubins_step(first, action.tail(3));
  EXPECT_NEAR((states[0] - first).norm(), 0.0, 1e-15);
  EXPECT_NEAR((states[1] - second).norm(), 0.0, 1e-15);
  EXPECT_NEAR(states[1][0], 2.0, 2e-4);
  EXPECT_NEAR(states[1][1], 1.0, 2e-4);
}

TEST(DubinsRollout, ZeroDurationsRepeatStart) {
  const Vector start = vec({1, 1, 1});
  for (const auto& s : dubins_rollout(start, vec({1, 1, 0, 0.5, -1, 0}))) {
    EXPECT_NEAR((s - start).norm(), 0.0, 1e-15);
  }
}

TEST(DubinsRollout, RejectsNonFiniteAction) {
  EXPECT_THROW(dubins_rollout(vec({0, 0, 0}), vec({1, std::nan(""), 1})), ValidationError);
}

TEST(DubinsConfig, Invariants) {
  DubinsConfig c;
  c.psi_max = kPi / 2;
  EXPECT_THROW(c.validate(), ValidationError);
  c = DubinsConfig{};
  c.u_epsilon = 0;
  EXPECT_THROW(c.validate(), ValidationError);
  c = DubinsConfig{};
  c.gamma = 0;
  EXPECT_THROW(c.validate(), ValidationError);
}

TEST(CollisionCost, CountsPointsInsideObstacles) {
  DubinsConfig c;
  c.obstacles = {Rect{0, 0, 1, 1}};
  const DubinsEnv env(c);
  EXPECT_EQ(env.collision_cost(points({vec({-1, -1, 0}), vec({2, 2, 0})})), 0.0);
  const auto seven = points({vec({0.5, 0.5, 0}), vec({0.2, 0.9, 1}), vec({0.7, 0.1, 2}), vec({-1, 0, 0}),
                             vec({-2, 0, 0}), vec({-3, 0, 0}), vec({-4, 0, 0})});
  EXPECT_EQ(env.collision_cost(seven), 300.0);
}

TEST(CollisionCost, BoundaryCountsAsCollision) {
  DubinsConfig c;
  c.obstacles = {Rect{0, 0, 1, 1}};
  const DubinsEnv env(c);
  EXPECT_EQ(env.collision_cost(points({vec({1, 0.5, 0})})), 100.0);
}

TEST(CollisionCost, OutsideWorldCollides) {
  const DubinsEnv env(DubinsConfig{});
  EXPECT_TRUE(env.in_collision(vec({7, 0, 0})));
  EXPECT_FALSE(env.in_collision(vec({6, 0, 0})));
}

TEST(CollisionCost, MonotoneInObstacleSet) {
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> u(-5, 5);
  std::vector<Vector> pts;
  for (int i = 0; i < 50; ++i) pts.push_back(vec({u(rng), u(rng) / 2, 0}));
  DubinsConfig c;
  double prev = DubinsEnv(c).collision_cost(points(pts));
  for (int k = 0; k < 10; ++k) {
    const double x = u(rng);
    const double y = u(rng) / 2;
    c.obstacles.push_back(Rect{x, y, x + 1, y + 1});
    const double now = DubinsEnv(c).collision_cost(points(pts));
    EXPECT_GE(now, prev);
    prev = now;
  }
}

TEST(DubinsEnv, SweptCheckCatchesThinWall) {
  DubinsConfig c;
  c.obstacles = {Rect{0.95, -1, 1.05, 1}};
  const DubinsEnv env(c);
  // Both endpoints are free but the straight segment crosses the wall.
  EXPECT_FALSE(env.in_collision(vec({0, 0, 0})));
  EXPECT_FALSE(env.in_collision(vec({2, 0, 0})));
  EXPECT_TRUE(env.path_collides(vec({0, 0, 0}), vec({1, 0, 2})));
}

TEST(ArmFk, StraightChainAtZero) {
  const ArmConfig c = ArmConfig::reference_chain();
  double reach = 0.0;
  for (const auto& j : c.joints) reach += j.offset.norm();
  const auto fk = arm_fk(c, Vector::Zero(7));
  EXPECT_NEAR((fk.end_effector - Eigen::Vector3d(reach, 0, 0)).norm(), 0.0, 1e-15);
  EXPECT_NEAR(reach, 0.8, 1e-12);
  EXPECT_EQ(fk.proxy_centers.size(), 7u * static_cast<std::size_t>(c.spheres_per_link));
}

TEST(ArmFk, BaseRotationRotatesEndEffector) {
  const ArmConfig c = ArmConfig::reference_chain();
  Vector q = Vector::Zero(7);
  q << 0.0, 0.3, 0.2, -0.5, 0.1, 0.4, 0.0;
  const Eigen::Vector3d p0 = arm_fk(c, q).end_effector;
  q[0] = 0.7;
  const Eigen::Vector3d p1 = arm_fk(c, q).end_effector;
  EXPECT_NEAR(p0.norm(), p1.norm(), 1e-12);
  EXPECT_NEAR((Eigen::AngleAxisd(0.7, Eigen::Vector3d::UnitZ()) * p0 - p1).norm(), 0.0, 1e-12);
}

TEST(ArmFk, PlanarTwoLink) {
  const auto fk = arm_fk(planar_two_link(), vec({kPi / 2, 0}));
  EXPECT_NEAR(fk.end_effector[0], 0.0, 1e-12);
  EXPECT_NEAR(fk.end_effector[1], 2.0, 1e-12);
}

TEST(ArmFk, DimensionMismatch) { EXPECT_THROW(arm_fk(planar_two_link(), vec({0, 0, 0})), DimensionError); }

TEST(ArmFk, ContinuousInEachJoint) {
  const ArmConfig c = ArmConfig::reference_chain();
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(-2, 2);
  for (int t = 0; t < 50; ++t) {
    const Vector q = Vector::NullaryExpr(7, [&] { return u(rng); });
    for (int j = 0; j < 7; ++j) {
      Vector qp = q;
      qp[j] += 1e-6;
      EXPECT_LE((arm_fk(c, qp).end_effector - arm_fk(c, q).end_effector).norm(), 0.8 * 1e-6 + 1e-12);
    }
  }
}

TEST(ArmEeCost, Examples) {
  const ArmConfig c = planar_two_link();
  const Matrix cov = 0.01 * Matrix::Identity(2, 2);
  const Gaussian stretched(vec({0, 0}), cov);  // end effector (2, 0, 0)
  const Gaussian folded(vec({0, kPi}), cov);   // end effector back at the origin
  const std::vector<Gaussian> one{stretched};
  const std::vector<double> w1{1.0};
  EXPECT_NEAR(arm_ee_cost(c, one, Eigen::Vector3d(2, 0, 0), w1), 0.0, 1e-15);
  EXPECT_NEAR(arm_ee_cost(c, one, Eigen::Vector3d(3, 0, 0), w1), 1.0, 1e-12);
  // target 1 m from (2, 0, 0) and 2 m from the origin
  const Eigen::Vector3d target(1.75, std::sqrt(15.0) / 4.0, 0);
  const std::vector<Gaussian> two{stretched, folded};
  const std::vector<double> w2{0.5, 1.0};
  EXPECT_NEAR(arm_ee_cost(c, two, target, w2), 4.5, 1e-12);
}

TEST(ArmEnv, SphereCollisionAndLimits) {
  ArmConfig c = planar_two_link();
  c.obstacles = {Sphere{Eigen::Vector3d(1.0, 0.5, 0), 0.2}};
  const ArmEnv env(c);
  EXPECT_FALSE(env.in_collision(vec({0, 0})));
  EXPECT_TRUE(env.in_collision(vec({0.45, 0})));
  EXPECT_TRUE(env.in_collision(vec({4.0, 0})));  // beyond the joint limit
}
