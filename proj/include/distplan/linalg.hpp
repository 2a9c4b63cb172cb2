#pragma once

#include <Eigen/Dense>

namespace distplan {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

inline constexpr double kInitialJitter = 1e-9;
inline constexpr double kMaxJitter = 1e-3;

struct CholeskyResult {
  Matrix lower;         // L with L L^T = covariance + jitter I
  double jitter = 0.0;  // 0 when the plain factorization succeeded
};

// Lower Cholesky factor of a symmetric matrix. Tries the matrix as given,
// then adds initial_jitter * I (1e-9 by default) and escalates by 10x up to
// 1e-3. Throws NumericalError when every attempt fails.
CholeskyResult robust_cholesky(const Matrix& covariance, double initial_jitter = kInitialJitter);

Matrix symmetrize(const Matrix& m);

bool is_symmetric(const Matrix& m, double rel_tol = 1e-9);

bool all_finite(const Matrix& m);

// log det of L L^T given the lower factor L.
double log_det_from_cholesky(const Matrix& lower);

}  // namespace distplan
