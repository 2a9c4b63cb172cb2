#include "distplan/unscented.hpp"

#include <string>

#include "distplan/error.hpp"

namespace distplan {

void UtConfig::validate(Eigen::Index state_dim) const {
  if (!(beta > 0.0) || !std::isfinite(beta)) throw ValidationError("ut.beta must be positive");
  if (!(jitter > 0.0)) throw ValidationError("ut.jitter must be positive");
  if (process_noise.size() == 0) return;
  if (process_noise.rows() != state_dim || process_noise.cols() != state_dim) {
    throw ValidationError("process noise must be " + std::to_string(state_dim) + "x" +
                          std::to_string(state_dim));
  }
  if (!is_symmetric(process_noise)) throw ValidationError("process noise must be symmetric");
  Eigen::SelfAdjointEigenSolver<Matrix> es(process_noise, Eigen::EigenvaluesOnly);
  if (es.eigenvalues().minCoeff() < -1e-12) throw ValidationError("process noise must be PSD");
}

SigmaPointSet sigma_points(const Gaussian& belief, double beta) {
  if (!(beta > 0.0)) throw ValidationError("sigma dispersion beta must be positive");
  const Eigen::Index n = belief.dim();
  SigmaPointSet s;
  s.n = n;
  s.beta = beta;
  s.points.resize(static_cast<std::size_t>(2 * n + 1));
  const Matrix& l = belief.cholesky();
  for (Eigen::Index i = 0; i < n; ++i) {
    s.points[static_cast<std::size_t>(i)] = belief.mean() + beta * l.col(i);
    s.points[static_cast<std::size_t>(n + i)] = belief.mean() - beta * l.col(i);
  }
  s.points.back() = belief.mean();
  return s;
}

UtResult unscented_transform(const Gaussian& belief, const Vector& action, const Dynamics& f,
                             const UtConfig& cfg) {
  SigmaPointSet prior = sigma_points(belief, cfg.beta);
  SigmaPointSet out;
  out.n = prior.n;
  out.beta = prior.beta;
  out.points.reserve(prior.size());
  for (std::size_t i = 0; i < prior.size(); ++i) {
    Vector p = f(prior.points[i], action);
    if (p.size() != belief.dim()) {
      throw DimensionError("dynamics returned dimension " + std::to_string(p.size()) +
                           " for sigma point " + std::to_string(i));
    }
    if (!p.allFinite()) throw NumericalError("dynamics returned a non-finite state for sigma point " + std::to_string(i));
    out.points.push_back(std::move(p));
  }

  const Eigen::Index n = belief.dim();
  const std::size_t dispersed = static_cast<std::size_t>(2 * n);
  Vector mean = Vector::Zero(n);
  for (std::size_t i = 0; i < dispersed; ++i) mean += out.points[i];
  mean /= static_cast<double>(dispersed);

  Matrix cov = Matrix::Zero(n, n);
  for (std::size_t i = 0; i < dispersed; ++i) {
    const Vector d = out.points[i] - mean;
    cov.noalias() += d * d.transpose();
  }
  cov /= 2.0 * cfg.beta * cfg.beta;
  if (cfg.process_noise.size() != 0) cov += cfg.process_noise;

  return UtResult{Gaussian(std::move(mean), symmetrize(cov), cfg.jitter), std::move(prior), std::move(out)};
}

}  // namespace distplan
