#include "distplan/cem.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "distplan/error.hpp"
#include "distplan/parallel.hpp"

namespace distplan {

namespace {

constexpr int kMaxFailedAttempts = 3;

Gaussian apply_floor(const Gaussian& g, bool diagonal, double floor) {
  Matrix cov = g.covariance();
  if (diagonal) {
    Vector d = cov.diagonal().cwiseMax(floor);
    return Gaussian(g.mean(), d.asDiagonal().toDenseMatrix());
  }
  Eigen::SelfAdjointEigenSolver<Matrix> es(cov);
  if (es.info() != Eigen::Success) throw NumericalError("planner covariance eigendecomposition failed");
  if (es.eigenvalues().minCoeff() >= floor) return g;
  const Vector lam = es.eigenvalues().cwiseMax(floor);
  cov = es.eigenvectors() * lam.asDiagonal() * es.eigenvectors().transpose();
  return Gaussian(g.mean(), symmetrize(cov));
}

Vector sample_from(const PlanDistribution& d, Rng& rng) {
  return std::visit([&](const auto& dist) { return dist.sample(rng); }, d);
}

}  // namespace

std::string_view to_string(CovarianceMode m) {
  switch (m) {
    case CovarianceMode::Full: return "full";
    case CovarianceMode::Diagonal: return "diagonal";
    default: return "auto";
  }
}

CovarianceMode parse_covariance_mode(std::string_view s) {
  if (s == "auto") return CovarianceMode::Auto;
  if (s == "full") return CovarianceMode::Full;
  if (s == "diagonal") return CovarianceMode::Diagonal;
  throw ValidationError("cem.covariance must be auto, full or diagonal, got \"" + std::string(s) + "\"");
}

void CemConfig::validate(Eigen::Index dim) const {
  if (n_elite < 2 || n_elite > n_samples) {
    throw ValidationError("cem needs 2 <= n_elite <= n_samples (got K=" + std::to_string(n_elite) +
                          ", M=" + std::to_string(n_samples) + ")");
  }
  if (max_iters < 1) throw ValidationError("cem.max_iters must be >= 1");
  if (!(epsilon > 0.0)) throw ValidationError("cem.epsilon must be > 0");
  if (!(init_scale > 0.0) || !std::isfinite(init_scale)) throw ValidationError("cem.init_scale must be > 0");
  if (n_components < 1) throw ValidationError("cem.n_components must be >= 1");
  if (n_components > n_elite) throw ValidationError("cem.n_components must not exceed n_elite");
  if (!(variance_floor > 0.0)) throw ValidationError("cem.variance_floor must be > 0");
  if (!(beta > 0.0)) throw ValidationError("cem.beta must be > 0");
  if (lower.size() != dim || upper.size() != dim) {
    throw ValidationError("cem bounds must have dimension " + std::to_string(dim));
  }
  for (Eigen::Index i = 0; i < dim; ++i) {
    if (!(lower[i] < upper[i])) throw ValidationError("cem bounds need lower < upper (dim " + std::to_string(i) + ")");
  }
}

bool CemConfig::diagonal_covariance(Eigen::Index dim) const {
  switch (covariance) {
    case CovarianceMode::Full: return false;
    case CovarianceMode::Diagonal: return true;
    default: return dim > 32;
  }
}

double convergence_metric(const PlanDistribution& prev, const PlanDistribution& next, double beta) {
  if (prev.index() != next.index()) {
    throw ValidationError("convergence_metric: planner distribution family changed between iterations");
  }
  if (const auto* p = std::get_if<Gaussian>(&prev)) return kl_gaussian(*p, std::get<Gaussian>(next));
  return kl_gmm_unscented(std::get<Gmm>(prev), std::get<Gmm>(next), beta);
}

CemResult plan_cem(const RolloutCostFn& cost_fn, const CemConfig& cfg, std::uint64_t seed) {
  const Eigen::Index dim = cfg.lower.size();
  cfg.validate(dim);
  const bool diagonal = cfg.diagonal_covariance(dim);

  const Gaussian init = Gaussian::isotropic(Vector::Zero(dim), cfg.init_scale * cfg.init_scale);
  PlanDistribution theta = init;
  if (cfg.n_components > 1) {
    theta = Gmm(std::vector<double>(cfg.n_components, 1.0 / static_cast<double>(cfg.n_components)),
                std::vector<Gaussian>(cfg.n_components, init));
  }

  const std::size_t m = cfg.n_samples;
  std::vector<Vector> samples(m);
  std::vector<double> costs(m);
  CemResult result{Vector(), theta, {}};
  int failed = 0;
  std::uint64_t attempt = 0;

  for (std::size_t iter = 0; iter < cfg.max_iters; ++attempt) {
    parallel_for(m, cfg.threads, [&](std::size_t i) {
      Rng rng = make_rng(seed, {stream::kCemSample, attempt, i});
      samples[i] = sample_from(theta, rng).cwiseMax(cfg.lower).cwiseMin(cfg.upper);
      costs[i] = cost_fn(samples[i]).cost;
    });
    std::size_t finite = 0;
    for (std::size_t i = 0; i < m; ++i) {
      if (std::isnan(costs[i])) throw NumericalError("cost is NaN for CEM sample " + std::to_string(i));
      if (std::isfinite(costs[i])) ++finite;
    }
    if (finite < cfg.n_elite) {
      if (++failed >= kMaxFailedAttempts) {
        throw InfeasibleError("infeasible: fewer than " + std::to_string(cfg.n_elite) +
                              " finite-cost samples for " + std::to_string(kMaxFailedAttempts) +
                              " consecutive CEM iterations");
      }
      continue;
    }
    failed = 0;

    const auto elite = elite_indices(costs, cfg.n_elite);
    CemIteration row;
    row.iter = iter;
    row.elite_min_cost = costs[elite.front()];
    row.elite_threshold = costs[elite.back()];
    for (auto i : elite) row.elite_mean_cost += costs[i];
    row.elite_mean_cost /= static_cast<double>(elite.size());

    PlanDistribution next = theta;
    if (cfg.n_components == 1) {
      std::vector<Vector> pts;
      pts.reserve(elite.size());
      for (auto i : elite) pts.push_back(samples[i]);
      const std::vector<double> ones(pts.size(), 1.0);
      next = apply_floor(fit_gaussian_weighted(pts, ones), diagonal, cfg.variance_floor);
    } else {
      Rng fit_rng = make_rng(seed, {stream::kCemFit, attempt});
      Gmm fitted = fit_gmm_elite(samples, costs, cfg.n_elite, cfg.n_components, fit_rng);
      std::vector<Gaussian> comps;
      comps.reserve(fitted.size());
      for (const auto& c : fitted.components()) comps.push_back(apply_floor(c, diagonal, cfg.variance_floor));
      next = Gmm(fitted.weights(), std::move(comps));
    }
    row.kl_step = convergence_metric(theta, next, cfg.beta);
    theta = std::move(next);
    result.trace.push_back(row);
    ++iter;
    if (row.kl_step < cfg.epsilon) break;
  }

  result.distribution = theta;
  if (const auto* g = std::get_if<Gaussian>(&theta)) {
    result.actions = g->mean();
  } else {
    const Gmm& mix = std::get<Gmm>(theta);
    result.actions = mix.component(mix.dominant_component()).mean();
  }
  result.actions = result.actions.cwiseMax(cfg.lower).cwiseMin(cfg.upper);
  return result;
}

}  // namespace distplan
