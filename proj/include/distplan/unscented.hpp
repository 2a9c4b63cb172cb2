#pragma once

#include <functional>
#include <vector>

#include "distplan/distributions.hpp"

namespace distplan {

/// 2n+1 sigma points, ordered: mu + beta L_i (i = 0..n-1), mu - beta L_i,
/// then the center. After propagation the same order holds for f(point).
struct SigmaPointSet {
  std::vector<Vector> points;
  Eigen::Index n = 0;
  double beta = 1.0;

  std::size_t size() const { return points.size(); }
  const Vector& center() const { return points.back(); }
};

struct UtConfig {
  double beta = 1.0;
  Matrix process_noise;  // Sigma_w, empty means zero noise
  double jitter = kInitialJitter;  // first regularization step if cov' is not PD

  void validate(Eigen::Index state_dim) const;
};

// Deterministic part f(x, u) of x' = f(x, u) + w.
using Dynamics = std::function<Vector(const Vector& state, const Vector& action)>;

SigmaPointSet sigma_points(const Gaussian& belief, double beta);

struct UtResult {
  Gaussian belief;          // propagated moments, noise included
  SigmaPointSet prior;      // sigma points before propagation
  SigmaPointSet propagated;  // f applied to each prior point
};

/// One prediction step. Moments come from the 2n dispersed points only:
///   mean' = 1/(2n) sum P_i,  cov' = 1/(2 beta^2) sum (P_i - mean')(P_i - mean')^T
/// then cov' += Sigma_w, symmetrized and regularized. The propagated center
/// point is carried for cost evaluation.
UtResult unscented_transform(const Gaussian& belief, const Vector& action, const Dynamics& f,
                             const UtConfig& cfg);

}  // namespace distplan
