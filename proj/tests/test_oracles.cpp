#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <random>

#include "distplan/error.hpp"
#include "distplan/oracles.hpp"
#include "test_support.hpp"

using namespace distplan;
using testing_support::random_spd;
using testing_support::random_vector;
using testing_support::vec;

namespace {

QuadratureGrid line(double lo, double hi, std::size_t n) { return QuadratureGrid{vec({lo}), vec({hi}), {n}}; }

}  // namespace

TEST(QuadratureGrid, Validation) {
  EXPECT_THROW(line(0, 1, 16).validate(), ValidationError);
  EXPECT_THROW(line(1, 0, 33).validate(), ValidationError);
  EXPECT_NO_THROW(line(0, 1, 17).validate());
  QuadratureGrid four{Vector::Zero(4), Vector::Ones(4), {17, 17, 17, 17}};
  EXPECT_THROW(four.validate(), ValidationError);
}

TEST(QuadratureGrid, MidpointsAndVolume) {
  const auto g = line(0, 1, 20);
  EXPECT_EQ(g.size(), 20u);
  EXPECT_NEAR(g.cell_volume(), 0.05, 1e-15);
  EXPECT_NEAR(g.point(0)[0], 0.025, 1e-15);
  EXPECT_NEAR(g.point(19)[0], 0.975, 1e-15);
}

TEST(NumericKl, UnitShiftIsOneHalf) {
  const Gaussian p(vec({0}), Matrix::Identity(1, 1));
  const Gaussian q(vec({1}), Matrix::Identity(1, 1));
  EXPECT_NEAR(numeric_kl(GoalSpec{p}, GoalSpec{q}, line(-8, 9, 4097)), 0.5, 1e-5);
}

TEST(NumericKl, SelfIsZero) {
  const Gaussian p(vec({0.3, -1}), (Matrix(2, 2) << 1.0, 0.4, 0.4, 0.5).finished());
  const auto g = QuadratureGrid::around(p, 7.0, 129, 513);
  EXPECT_LT(std::abs(numeric_kl(GoalSpec{p}, GoalSpec{p}, g)), 1e-6);
}

TEST(NumericKl, UncoveredSupportIsInfinite) {
  const Gaussian p(vec({0}), Matrix::Identity(1, 1));
  const UniformBox q(vec({-1}), vec({1}));
  EXPECT_EQ(numeric_kl(GoalSpec{p}, GoalSpec{q}, line(-8, 8, 1025)), std::numeric_limits<double>::infinity());
}

TEST(NumericKl, UniformAgainstGaussian) {
  // D(U[-1, 1] || N(0, 1)) = -log 2 + log sqrt(2 pi) + E[x^2] / 2 with E[x^2] = 1/3.
  const UniformBox p(vec({-1}), vec({1}));
  const Gaussian q(vec({0}), Matrix::Identity(1, 1));
  const double expected = -std::log(2.0) + 0.5 * std::log(2.0 * std::numbers::pi) + 1.0 / 6.0;
  EXPECT_NEAR(numeric_kl(GoalSpec{p}, GoalSpec{q}, line(-1, 1, 4096)), expected, 1e-7);
}

TEST(NumericKl, MassOutsideGridThrows) {
  const Gaussian p(vec({0}), Matrix::Identity(1, 1));
  EXPECT_THROW(numeric_kl(GoalSpec{p}, GoalSpec{p}, line(-2, 2, 257)), NumericalError);
}

TEST(NumericKl, RejectsDirac) {
  const Gaussian p(vec({0}), Matrix::Identity(1, 1));
  EXPECT_THROW(numeric_kl(GoalSpec{p}, GoalSpec{DiracDelta(vec({0}))}, line(-8, 8, 257)), ValidationError);
}

TEST(NumericKl, MatchesClosedFormOnRandomPairs) {
  std::mt19937_64 rng(2024);
  for (int i = 0; i < 100; ++i) {
    const Eigen::Index n = (i % 2) + 1;
    const Gaussian p(random_vector(n, -1, 1, rng), random_spd(n, 0.05, 1e3, rng));
    const Gaussian q(random_vector(n, -1, 1, rng), random_spd(n, 0.05, 1e3, rng));
    const auto g = QuadratureGrid::around(p, 7.0, n == 1 ? 4097 : 257, n == 1 ? 4097 : 1025);
    const double numeric = numeric_kl(GoalSpec{p}, GoalSpec{q}, g);
    EXPECT_NEAR(numeric, kl_gaussian(p, q), 1e-5) << "pair " << i;
    EXPECT_GE(numeric, -1e-6);
  }
}

TEST(GoalSetIndicator, Examples) {
  const UniformBox unit(vec({0, 0}), vec({1, 1}));
  const std::vector<Vector> inside{vec({0.5, 0.5}), vec({0, 1})};
  EXPECT_TRUE(verify_goal_set_indicator(unit, inside).ok());
  const UniformBox four(vec({0, 0}), vec({2, 2}));
  EXPECT_NEAR(four.log_volume(), std::log(4.0), 1e-12);
  const std::vector<Vector> mixed{vec({1, 1}), vec({3, 3})};
  EXPECT_TRUE(verify_goal_set_indicator(four, mixed).ok());
}

TEST(WeightedEuclidean, Examples) {
  const std::vector<Vector> at_goal{vec({0})};
  EXPECT_TRUE(verify_weighted_euclidean(vec({0}), Matrix::Identity(1, 1), at_goal).ok());
  // 1/2 * 2^2 = 2 on both sides.
  const Gaussian g(vec({0}), Matrix::Identity(1, 1));
  EXPECT_NEAR(-g.log_density(vec({2})) + g.log_density(vec({0})), 2.0, 1e-12);
  const std::vector<Vector> states{vec({2}), vec({-1}), vec({0.5})};
  EXPECT_TRUE(verify_weighted_euclidean(vec({0}), Matrix::Identity(1, 1), states).ok());
  const Matrix drop = vec({1.0, 0.0}).asDiagonal();
  const std::vector<Vector> planar{vec({1, 100}), vec({0.5, -50}), vec({2, 0})};
  EXPECT_TRUE(verify_weighted_euclidean(vec({0, 0}), drop, planar).ok());
}

TEST(MaxProb, Examples) {
  const Vector g = vec({1, 1});
  const std::vector<Gaussian> two{Gaussian(vec({3, 0}), Matrix::Identity(2, 2)), Gaussian(g, Matrix::Identity(2, 2))};
  EXPECT_TRUE(verify_max_prob(g, two).ok());
  const std::vector<Gaussian> tied{Gaussian(vec({2, 1}), Matrix::Identity(2, 2)),
                                   Gaussian(vec({0, 1}), Matrix::Identity(2, 2))};
  const auto r = verify_max_prob(g, tied);
  EXPECT_TRUE(r.ok());
  EXPECT_FALSE(r.notes.empty());
  std::mt19937_64 rng(8);
  std::vector<Gaussian> five;
  for (int i = 0; i < 5; ++i) five.emplace_back(random_vector(2, -2, 2, rng), random_spd(2, 0.1, 10, rng));
  EXPECT_TRUE(verify_max_prob(g, five).ok());
}

TEST(ChanceConstrained, Examples) {
  const UniformBox box(vec({-1}), vec({1}));
  const std::vector<Gaussian> pair{Gaussian(vec({3}), Matrix::Identity(1, 1)), Gaussian(vec({0}), Matrix::Identity(1, 1))};
  const auto r = verify_chance_constrained(box, pair);
  EXPECT_TRUE(r.ok());
  EXPECT_LT(goal_cost(pair[1], GoalSpec{box}, Projection::M, 1.0), goal_cost(pair[0], GoalSpec{box}, Projection::M, 1.0));
  const std::vector<Gaussian> same{pair[1], pair[1]};
  EXPECT_TRUE(verify_chance_constrained(box, same).ok());
}

TEST(ReductionsSuite, HundredInstancesEach) {
  const auto reports = run_reductions_suite(100, 11, 1);
  ASSERT_EQ(reports.size(), 4u);
  for (const auto& r : reports) {
    EXPECT_EQ(r.instances, 100u);
    EXPECT_TRUE(r.violations.empty()) << r.reduction << ": " << (r.violations.empty() ? "" : r.violations.front());
  }
}
