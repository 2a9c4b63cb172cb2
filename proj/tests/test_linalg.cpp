#include <gtest/gtest.h>

#include "distplan/error.hpp"
#include "distplan/linalg.hpp"

using namespace distplan;

TEST(RobustCholesky, PlainFactorizationAddsNoJitter) {
  Matrix a(2, 2);
  a << 4, 2, 2, 3;
  const auto r = robust_cholesky(a);
  EXPECT_EQ(r.jitter, 0.0);
  EXPECT_LT((r.lower * r.lower.transpose() - a).norm(), 1e-12);
}

TEST(RobustCholesky, SingularMatrixGetsJitter) {
  Matrix a = Matrix::Ones(2, 2);
  const auto r = robust_cholesky(a);
  EXPECT_GT(r.jitter, 0.0);
  EXPECT_LE(r.jitter, kMaxJitter);
}

TEST(RobustCholesky, IndefiniteMatrixThrows) {
  Matrix a(2, 2);
  a << 1, 0, 0, -1;
  EXPECT_THROW(robust_cholesky(a), NumericalError);
}
