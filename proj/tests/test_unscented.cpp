#include <gtest/gtest.h>

#include <cmath>
#include <limits>

#include "distplan/error.hpp"
#include "distplan/unscented.hpp"
#include "test_support.hpp"

using namespace distplan;
using testing_support::random_spd;
using testing_support::random_vector;
using testing_support::vec;

TEST(SigmaPoints, OrderAndCount) {
  Matrix c(2, 2);
  c << 4, 0, 0, 9;
  const auto s = sigma_points(Gaussian(vec({1, 2}), c), 0.5);
  ASSERT_EQ(s.size(), 5u);
  EXPECT_NEAR((s.points[0] - vec({2, 2})).norm(), 0.0, 1e-14);
  EXPECT_NEAR((s.points[1] - vec({1, 3.5})).norm(), 0.0, 1e-14);
  EXPECT_NEAR((s.points[2] - vec({0, 2})).norm(), 0.0, 1e-14);
  EXPECT_NEAR((s.center() - vec({1, 2})).norm(), 0.0, 0.0);
}

TEST(UnscentedTransform, IdentityDynamicsPreservesBelief) {
  std::mt19937_64 rng(1);
  const Gaussian b(random_vector(3, -1, 1, rng), random_spd(3, 0.1, 10, rng));
  const Dynamics f = [](const Vector& x, const Vector&) { return x; };
  for (double beta : {0.5, 1.0, 2.0}) {
    UtConfig cfg;
    cfg.beta = beta;
    const auto r = unscented_transform(b, Vector::Zero(1), f, cfg);
    EXPECT_LT((r.belief.mean() - b.mean()).norm(), 1e-12);
    EXPECT_LT((r.belief.covariance() - b.covariance()).norm(), 1e-12);
  }
}

TEST(UnscentedTransform, AffineSystemsAreExact) {
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 10; ++trial) {
    const Eigen::Index n = 2 + trial % 7;
    const Eigen::Index m = 2;
    const Matrix a = Matrix::Random(n, n);
    const Matrix bm = Matrix::Random(n, m);
    const Vector c = Vector::Random(n);
    const Matrix noise = random_spd(n, 0.01, 10, rng);
    const Gaussian belief(random_vector(n, -1, 1, rng), random_spd(n, 0.1, 100, rng));
    const Vector u = Vector::Random(m);
    const Dynamics f = [&](const Vector& x, const Vector& uu) -> Vector { return a * x + bm * uu + c; };
    for (double beta : {0.5, 1.0, 2.0}) {
      UtConfig cfg;
      cfg.beta = beta;
      cfg.process_noise = noise;
      const auto r = unscented_transform(belief, u, f, cfg);
      const Vector mean = a * belief.mean() + bm * u + c;
      const Matrix cov = a * belief.covariance() * a.transpose() + noise;
      EXPECT_LE((r.belief.mean() - mean).norm(), 1e-8 * std::max(1.0, mean.norm()));
      EXPECT_LE((r.belief.covariance() - cov).norm(), 1e-8 * cov.norm());
    }
  }
}

TEST(UnscentedTransform, ProcessNoiseAddsToCovariance) {
  const Gaussian b(vec({0, 0}), Matrix::Identity(2, 2));
  UtConfig cfg;
  cfg.process_noise = 0.5 * Matrix::Identity(2, 2);
  const Dynamics f = [](const Vector& x, const Vector&) { return x; };
  const auto r = unscented_transform(b, Vector::Zero(1), f, cfg);
  EXPECT_NEAR(r.belief.covariance()(0, 0), 1.5, 1e-12);
}

TEST(UnscentedTransform, NonFiniteDynamicsNamesThePoint) {
  const Gaussian b(vec({0, 0}), Matrix::Identity(2, 2));
  const Dynamics f = [](const Vector& x, const Vector&) -> Vector {
    Vector y = x;
    if (x[0] > 0.5) y[0] = std::numeric_limits<double>::quiet_NaN();
    return y;
  };
  try {
    unscented_transform(b, Vector::Zero(1), f, UtConfig{});
    FAIL() << "expected NumericalError";
  } catch (const NumericalError& e) {
    EXPECT_NE(std::string(e.what()).find("sigma point 0"), std::string::npos) << e.what();
  }
}

TEST(UnscentedTransform, RejectsBadNoise) {
  UtConfig cfg;
  cfg.process_noise = -Matrix::Identity(2, 2);
  EXPECT_THROW(cfg.validate(2), ValidationError);
  cfg.process_noise = Matrix::Identity(3, 3);
  EXPECT_THROW(cfg.validate(2), Error);
}

TEST(UnscentedTransform, PropagatedSetKeepsCenter) {
  const Gaussian b(vec({1, 0}), Matrix::Identity(2, 2));
  const Dynamics f = [](const Vector& x, const Vector& u) -> Vector { return x + u; };
  const auto r = unscented_transform(b, vec({1, 1}), f, UtConfig{});
  ASSERT_EQ(r.propagated.size(), 5u);
  EXPECT_NEAR((r.propagated.center() - vec({2, 1})).norm(), 0.0, 1e-15);
}
