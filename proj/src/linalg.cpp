#include "distplan/linalg.hpp"

#include <cmath>
#include <string>

#include "distplan/error.hpp"

namespace distplan {

namespace {

bool try_factor(const Matrix& a, Matrix& lower) {
  Eigen::LLT<Matrix> llt(a);
  if (llt.info() != Eigen::Success) return false;
  lower = llt.matrixL();
  const auto diag = lower.diagonal();
  for (Eigen::Index i = 0; i < diag.size(); ++i) {
    if (!(diag[i] > 0.0) || !std::isfinite(diag[i])) return false;
  }
  return true;
}

}  // namespace

CholeskyResult robust_cholesky(const Matrix& covariance, double initial_jitter) {
  if (covariance.rows() != covariance.cols()) {
    throw DimensionError("covariance must be square, got " + std::to_string(covariance.rows()) +
                         "x" + std::to_string(covariance.cols()));
  }
  if (!all_finite(covariance)) throw NumericalError("covariance has non-finite entries");

  CholeskyResult out;
  if (try_factor(covariance, out.lower)) return out;

  const auto n = covariance.rows();
  for (double jitter = initial_jitter; jitter <= kMaxJitter * (1.0 + 1e-12); jitter *= 10.0) {
    if (try_factor(covariance + jitter * Matrix::Identity(n, n), out.lower)) {
      out.jitter = jitter;
      return out;
    }
  }
  throw NumericalError("covariance not positive definite after jitter escalation to 1e-3");
}

Matrix symmetrize(const Matrix& m) { return 0.5 * (m + m.transpose()); }

bool is_symmetric(const Matrix& m, double rel_tol) {
  if (m.rows() != m.cols()) return false;
  const double scale = std::max(1.0, m.cwiseAbs().maxCoeff());
  return (m - m.transpose()).cwiseAbs().maxCoeff() <= rel_tol * scale;
}

bool all_finite(const Matrix& m) { return m.allFinite(); }

double log_det_from_cholesky(const Matrix& lower) {
  return 2.0 * lower.diagonal().array().log().sum();
}

}  // namespace distplan
