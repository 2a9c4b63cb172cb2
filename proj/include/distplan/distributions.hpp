#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "distplan/linalg.hpp"
#include "distplan/random.hpp"

namespace distplan {

/// Multivariate normal in moment form. The stored covariance is the
/// regularized one (input + jitter I when the plain factorization failed),
/// so covariance() and cholesky() always agree.
class Gaussian {
 public:
  Gaussian(Vector mean, Matrix covariance, double initial_jitter = kInitialJitter);

  static Gaussian isotropic(Vector mean, double variance);

  Eigen::Index dim() const { return mean_.size(); }
  const Vector& mean() const { return mean_; }
  const Matrix& covariance() const { return covariance_; }
  const Matrix& cholesky() const { return lower_; }
  double jitter() const { return jitter_; }
  double log_det() const { return log_det_; }

  double mahalanobis_squared(const Vector& x) const;
  double log_density(const Vector& x) const;
  Vector sample(Rng& rng) const;

 private:
  Vector mean_;
  Matrix covariance_;
  Matrix lower_;
  double jitter_ = 0.0;
  double log_det_ = 0.0;
};

/// Finite Gaussian mixture. Weights are nonnegative and sum to one within
/// 1e-9; all components share a dimension.
class Gmm {
 public:
  Gmm(std::vector<double> weights, std::vector<Gaussian> components);
  explicit Gmm(Gaussian single);

  Eigen::Index dim() const { return components_.front().dim(); }
  std::size_t size() const { return components_.size(); }
  const std::vector<double>& weights() const { return weights_; }
  const std::vector<Gaussian>& components() const { return components_; }
  double weight(std::size_t i) const { return weights_[i]; }
  const Gaussian& component(std::size_t i) const { return components_[i]; }

  // Index of the largest weight; the lowest index wins ties.
  std::size_t dominant_component() const;
  Vector mean() const;

  double log_density(const Vector& x) const;
  Vector sample(Rng& rng) const;

 private:
  std::vector<double> weights_;
  std::vector<Gaussian> components_;
};

struct DiracDelta {
  explicit DiracDelta(Vector p);
  Eigen::Index dim() const { return point.size(); }
  Vector point;
};

/// Uniform density over the closed axis-aligned box [lower, upper].
class UniformBox {
 public:
  UniformBox(Vector lower, Vector upper);

  Eigen::Index dim() const { return lower_.size(); }
  const Vector& lower() const { return lower_; }
  const Vector& upper() const { return upper_; }
  Vector center() const { return 0.5 * (lower_ + upper_); }
  double volume() const { return std::exp(log_volume_); }
  double log_volume() const { return log_volume_; }
  bool contains(const Vector& x) const;
  double log_density(const Vector& x) const;

 private:
  Vector lower_;
  Vector upper_;
  double log_volume_ = 0.0;
};

using GoalSpec = std::variant<Gaussian, Gmm, DiracDelta, UniformBox>;

enum class Projection { I, M };

std::string_view to_string(Projection p);
Projection parse_projection(std::string_view s);

Eigen::Index dim(const GoalSpec& d);
std::string_view kind_name(const GoalSpec& d);

/// log p(x). -inf outside a box, and -inf for a Dirac unless x equals the
/// point exactly.
double log_density(const GoalSpec& d, const Vector& x);

std::vector<Vector> sample(const Gaussian& d, std::size_t n, Rng& rng);
std::vector<Vector> sample(const Gmm& d, std::size_t n, Rng& rng);

/// Closed-form D(p || q) for Gaussians, clamped at zero.
double kl_gaussian(const Gaussian& p, const Gaussian& q);

/// Sigma-point approximation of D(p || q): for every component a of p,
/// 2n points mu_a +- beta * L_a columns, each scored by log p - log q and
/// averaged with weight w_a / 2n. Can come out slightly negative.
double kl_gmm_unscented(const Gmm& p, const Gmm& q, double beta);
double kl_gmm_unscented(const Gaussian& p, const Gmm& q, double beta);
double kl_gmm_unscented(const Gmm& p, const Gaussian& q, double beta);
double kl_gmm_unscented(const Gaussian& p, const Gaussian& q, double beta);

/// E_{x ~ U(box)}[log N(x | state)], i.e. u * integral of log N over the box.
/// Exact: the integrand is quadratic, so only the box's first two moments matter.
double box_mean_log_density(const Gaussian& state, const UniformBox& box);

/// Divergence between a Gaussian state belief and a goal, dispatched on
/// (goal family, projection):
///   Gaussian  I: D(state || goal)      M: D(goal || state)
///   GMM       I: unscented(state, goal) M: unscented(goal, state)
///   Dirac     M: -log N(g | state)
///   Uniform   M: -E_{U}[log N(x | state)]   (additive constant log u dropped)
/// Dirac and Uniform goals under I throw UnsupportedProjection.
double goal_cost(const Gaussian& state, const GoalSpec& goal, Projection proj, double beta);

/// Weighted maximum-likelihood Gaussian. Covariance is the weighted average
/// outer product about the weighted mean, plus jitter * I.
Gaussian fit_gaussian_weighted(std::span<const Vector> samples, std::span<const double> weights,
                               double jitter = kInitialJitter);

/// Indices of the k smallest costs, ordered by (cost, index).
std::vector<std::size_t> elite_indices(std::span<const double> costs, std::size_t k);

struct EmOptions {
  int max_iters = 50;
  double responsibility_floor = 1e-10;
  double weight_floor = 1e-6;
  double jitter = kInitialJitter;
  double tolerance = 1e-10;  // relative log-likelihood change that stops EM early
};

/// EM fit of an n_components mixture to the n_elite lowest-cost samples,
/// seeded k-means++ style from the elite set.
Gmm fit_gmm_elite(std::span<const Vector> samples, std::span<const double> costs,
                  std::size_t n_elite, std::size_t n_components, Rng& rng,
                  const EmOptions& options = {});

}  // namespace distplan
