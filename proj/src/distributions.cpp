#include "distplan/distributions.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>
#include <string>

#include "distplan/error.hpp"

namespace distplan {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
const double kLog2Pi = std::log(2.0 * std::numbers::pi);

void require_dim(Eigen::Index expected, Eigen::Index got, const char* what) {
  if (expected != got) {
    throw DimensionError(std::string(what) + ": expected dimension " + std::to_string(expected) +
                         ", got " + std::to_string(got));
  }
}

double log_sum_exp(std::span<const double> v) {
  double m = -kInf;
  for (double x : v) m = std::max(m, x);
  if (!std::isfinite(m)) return m;
  double s = 0.0;
  for (double x : v) s += std::exp(x - m);
  return m + std::log(s);
}

// Mixture view so the unscented KL handles Gaussian and Gmm arguments alike.
struct MixtureView {
  std::span<const double> weights;
  std::span<const Gaussian> components;

  double log_density(const Vector& x) const {
    if (components.size() == 1) return components[0].log_density(x);
    double buf[16];
    std::vector<double> heap;
    double* terms = buf;
    if (components.size() > 16) {
      heap.resize(components.size());
      terms = heap.data();
    }
    for (std::size_t i = 0; i < components.size(); ++i) {
      terms[i] = weights[i] > 0.0 ? std::log(weights[i]) + components[i].log_density(x) : -kInf;
    }
    return log_sum_exp({terms, components.size()});
  }
};

const double kUnitWeight = 1.0;

MixtureView view_of(const Gaussian& g) { return {{&kUnitWeight, 1}, {&g, 1}}; }
MixtureView view_of(const Gmm& g) { return {g.weights(), g.components()}; }

double kl_unscented(const MixtureView& p, const MixtureView& q, double beta) {
  if (!(beta > 0.0)) throw ValidationError("sigma dispersion beta must be positive");
  const Eigen::Index n = p.components.front().dim();
  require_dim(n, q.components.front().dim(), "kl_gmm_unscented");
  double total = 0.0;
  Vector x(n);
  for (std::size_t a = 0; a < p.components.size(); ++a) {
    const double w = p.weights[a];
    if (w == 0.0) continue;
    const Gaussian& comp = p.components[a];
    double acc = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
      for (double sign : {1.0, -1.0}) {
        x = comp.mean() + sign * beta * comp.cholesky().col(i);
        acc += p.log_density(x) - q.log_density(x);
      }
    }
    total += w * acc / static_cast<double>(2 * n);
  }
  if (std::isnan(total)) throw NumericalError("kl_gmm_unscented produced NaN");
  return total;
}

}  // namespace

// ---------------------------------------------------------------- Gaussian

Gaussian::Gaussian(Vector mean, Matrix covariance, double initial_jitter)
    : mean_(std::move(mean)) {
  require_dim(mean_.size(), covariance.rows(), "Gaussian covariance rows");
  require_dim(mean_.size(), covariance.cols(), "Gaussian covariance cols");
  if (mean_.size() == 0) throw DimensionError("Gaussian must have dimension >= 1");
  if (!mean_.allFinite()) throw NumericalError("Gaussian mean has non-finite entries");
  if (!is_symmetric(covariance)) throw ValidationError("Gaussian covariance is not symmetric");
  covariance_ = symmetrize(covariance);
  auto chol = robust_cholesky(covariance_, initial_jitter);
  lower_ = std::move(chol.lower);
  jitter_ = chol.jitter;
  if (jitter_ > 0.0) covariance_.diagonal().array() += jitter_;
  log_det_ = log_det_from_cholesky(lower_);
}

Gaussian Gaussian::isotropic(Vector mean, double variance) {
  const auto n = mean.size();
  return Gaussian(std::move(mean), variance * Matrix::Identity(n, n));
}

double Gaussian::mahalanobis_squared(const Vector& x) const {
  require_dim(dim(), x.size(), "Gaussian::mahalanobis_squared");
  const Vector z = lower_.triangularView<Eigen::Lower>().solve(x - mean_);
  return z.squaredNorm();
}

double Gaussian::log_density(const Vector& x) const {
  return -0.5 * (static_cast<double>(dim()) * kLog2Pi + log_det_ + mahalanobis_squared(x));
}

Vector Gaussian::sample(Rng& rng) const { return mean_ + lower_ * standard_normal(dim(), rng); }

// --------------------------------------------------------------------- Gmm

Gmm::Gmm(std::vector<double> weights, std::vector<Gaussian> components)
    : weights_(std::move(weights)), components_(std::move(components)) {
  if (components_.empty()) throw ValidationError("GMM needs at least one component");
  if (weights_.size() != components_.size()) {
    throw ValidationError("GMM has " + std::to_string(weights_.size()) + " weights for " +
                          std::to_string(components_.size()) + " components");
  }
  double sum = 0.0;
  for (double w : weights_) {
    if (!(w >= 0.0) || !std::isfinite(w)) throw ValidationError("GMM weights must be finite and >= 0");
    sum += w;
  }
  if (std::abs(sum - 1.0) > 1e-9) {
    throw ValidationError("GMM weights sum to " + std::to_string(sum) + ", expected 1");
  }
  for (const auto& c : components_) require_dim(components_.front().dim(), c.dim(), "GMM component");
}

Gmm::Gmm(Gaussian single) : Gmm({1.0}, {std::move(single)}) {}

std::size_t Gmm::dominant_component() const {
  return static_cast<std::size_t>(std::max_element(weights_.begin(), weights_.end()) -
                                  weights_.begin());
}

Vector Gmm::mean() const {
  Vector m = Vector::Zero(dim());
  for (std::size_t i = 0; i < size(); ++i) m += weights_[i] * components_[i].mean();
  return m;
}

double Gmm::log_density(const Vector& x) const {
  require_dim(dim(), x.size(), "Gmm::log_density");
  return view_of(*this).log_density(x);
}

Vector Gmm::sample(Rng& rng) const {
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  const double r = unif(rng);
  double acc = 0.0;
  std::size_t k = components_.size() - 1;
  for (std::size_t i = 0; i < components_.size(); ++i) {
    acc += weights_[i];
    if (r < acc) {
      k = i;
      break;
    }
  }
  return components_[k].sample(rng);
}

// ------------------------------------------------------- Dirac and Uniform

DiracDelta::DiracDelta(Vector p) : point(std::move(p)) {
  if (point.size() == 0) throw DimensionError("Dirac point must have dimension >= 1");
  if (!point.allFinite()) throw ValidationError("Dirac point has non-finite entries");
}

UniformBox::UniformBox(Vector lower, Vector upper) : lower_(std::move(lower)), upper_(std::move(upper)) {
  require_dim(lower_.size(), upper_.size(), "UniformBox bounds");
  if (lower_.size() == 0) throw DimensionError("UniformBox must have dimension >= 1");
  if (!lower_.allFinite() || !upper_.allFinite()) throw ValidationError("UniformBox bounds must be finite");
  for (Eigen::Index i = 0; i < lower_.size(); ++i) {
    if (!(lower_[i] < upper_[i])) {
      throw ValidationError("UniformBox needs lower < upper in every dimension (dim " +
                            std::to_string(i) + ")");
    }
  }
  log_volume_ = (upper_ - lower_).array().log().sum();
}

bool UniformBox::contains(const Vector& x) const {
  require_dim(dim(), x.size(), "UniformBox::contains");
  return (x.array() >= lower_.array()).all() && (x.array() <= upper_.array()).all();
}

double UniformBox::log_density(const Vector& x) const { return contains(x) ? -log_volume_ : -kInf; }

// ------------------------------------------------------------ GoalSpec ops

std::string_view to_string(Projection p) { return p == Projection::I ? "I" : "M"; }

Projection parse_projection(std::string_view s) {
  if (s == "I" || s == "i") return Projection::I;
  if (s == "M" || s == "m") return Projection::M;
  throw ValidationError("projection must be \"I\" or \"M\", got \"" + std::string(s) + "\"");
}

Eigen::Index dim(const GoalSpec& d) {
  return std::visit([](const auto& v) { return v.dim(); }, d);
}

std::string_view kind_name(const GoalSpec& d) {
  struct {
    std::string_view operator()(const Gaussian&) const { return "gaussian"; }
    std::string_view operator()(const Gmm&) const { return "gmm"; }
    std::string_view operator()(const DiracDelta&) const { return "dirac"; }
    std::string_view operator()(const UniformBox&) const { return "uniform"; }
  } name;
  return std::visit(name, d);
}

double log_density(const GoalSpec& d, const Vector& x) {
  require_dim(dim(d), x.size(), "log_density");
  struct {
    const Vector& x;
    double operator()(const Gaussian& g) const { return g.log_density(x); }
    double operator()(const Gmm& g) const { return g.log_density(x); }
    double operator()(const DiracDelta& g) const { return x == g.point ? 0.0 : -kInf; }
    double operator()(const UniformBox& g) const { return g.log_density(x); }
  } eval{x};
  return std::visit(eval, d);
}

std::vector<Vector> sample(const Gaussian& d, std::size_t n, Rng& rng) {
  std::vector<Vector> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) out.push_back(d.sample(rng));
  return out;
}

std::vector<Vector> sample(const Gmm& d, std::size_t n, Rng& rng) {
  std::vector<Vector> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) out.push_back(d.sample(rng));
  return out;
}

// --------------------------------------------------------------------- KL

double kl_gaussian(const Gaussian& p, const Gaussian& q) {
  require_dim(p.dim(), q.dim(), "kl_gaussian");
  const auto lq = q.cholesky().triangularView<Eigen::Lower>();
  const Matrix a = lq.solve(p.cholesky());
  const Vector z = lq.solve(q.mean() - p.mean());
  const double n = static_cast<double>(p.dim());
  const double kl = 0.5 * (a.squaredNorm() + z.squaredNorm() - n + q.log_det() - p.log_det());
  if (std::isnan(kl)) throw NumericalError("kl_gaussian produced NaN");
  return std::max(0.0, kl);
}

double kl_gmm_unscented(const Gmm& p, const Gmm& q, double beta) {
  return kl_unscented(view_of(p), view_of(q), beta);
}
double kl_gmm_unscented(const Gaussian& p, const Gmm& q, double beta) {
  return kl_unscented(view_of(p), view_of(q), beta);
}
double kl_gmm_unscented(const Gmm& p, const Gaussian& q, double beta) {
  return kl_unscented(view_of(p), view_of(q), beta);
}
double kl_gmm_unscented(const Gaussian& p, const Gaussian& q, double beta) {
  return kl_unscented(view_of(p), view_of(q), beta);
}

double box_mean_log_density(const Gaussian& state, const UniformBox& box) {
  require_dim(state.dim(), box.dim(), "box_mean_log_density");
  const Eigen::Index n = state.dim();
  // diag(Sigma^{-1})_d = || L^{-1} e_d ||^2
  const Matrix linv =
      state.cholesky().triangularView<Eigen::Lower>().solve(Matrix::Identity(n, n));
  const Vector precision_diag = linv.colwise().squaredNorm().transpose();
  const Vector width = box.upper() - box.lower();
  const double spread = (precision_diag.array() * width.array().square()).sum() / 12.0;
  return -0.5 * (static_cast<double>(n) * kLog2Pi + state.log_det() +
                 state.mahalanobis_squared(box.center()) + spread);
}

double goal_cost(const Gaussian& state, const GoalSpec& goal, Projection proj, double beta) {
  require_dim(state.dim(), dim(goal), "goal_cost");
  struct {
    const Gaussian& state;
    Projection proj;
    double beta;

    double operator()(const Gaussian& g) const {
      return proj == Projection::I ? kl_gaussian(state, g) : kl_gaussian(g, state);
    }
    double operator()(const Gmm& g) const {
      return proj == Projection::I ? kl_gmm_unscented(state, g, beta)
                                   : kl_gmm_unscented(g, state, beta);
    }
    double operator()(const DiracDelta& g) const {
      if (proj == Projection::I) {
        throw UnsupportedProjection(
            "(dirac goal, I-projection) is undefined: the goal density is zero everywhere "
            "except the goal point, so the I-projection divides by zero; use M");
      }
      return -state.log_density(g.point);
    }
    double operator()(const UniformBox& g) const {
      if (proj == Projection::I) {
        throw UnsupportedProjection(
            "(uniform goal, I-projection) is undefined: the goal density is zero outside the "
            "goal set, so the I-projection divides by zero there; use M");
      }
      return -box_mean_log_density(state, g);
    }
  } dispatch{state, proj, beta};
  return std::visit(dispatch, goal);
}

// -------------------------------------------------------------------- fits

Gaussian fit_gaussian_weighted(std::span<const Vector> samples, std::span<const double> weights,
                               double jitter) {
  if (samples.size() < 2) throw ValidationError("fit_gaussian_weighted needs at least 2 samples");
  if (weights.size() != samples.size()) {
    throw DimensionError("fit_gaussian_weighted: " + std::to_string(weights.size()) +
                         " weights for " + std::to_string(samples.size()) + " samples");
  }
  const Eigen::Index n = samples.front().size();
  double total = 0.0;
  for (double w : weights) {
    if (!(w >= 0.0) || !std::isfinite(w)) throw ValidationError("sample weights must be finite and >= 0");
    total += w;
  }
  if (!(total > 0.0)) throw ValidationError("sample weights sum to zero");

  Vector mean = Vector::Zero(n);
  for (std::size_t i = 0; i < samples.size(); ++i) {
    require_dim(n, samples[i].size(), "fit_gaussian_weighted sample");
    mean += (weights[i] / total) * samples[i];
  }
  Matrix cov = Matrix::Zero(n, n);
  for (std::size_t i = 0; i < samples.size(); ++i) {
    if (weights[i] == 0.0) continue;
    const Vector d = samples[i] - mean;
    cov.selfadjointView<Eigen::Lower>().rankUpdate(d, weights[i] / total);
  }
  cov = cov.selfadjointView<Eigen::Lower>();
  cov.diagonal().array() += jitter;
  return Gaussian(std::move(mean), std::move(cov));
}

std::vector<std::size_t> elite_indices(std::span<const double> costs, std::size_t k) {
  if (k > costs.size()) {
    throw ValidationError("elite count " + std::to_string(k) + " exceeds sample count " +
                          std::to_string(costs.size()));
  }
  std::vector<std::size_t> idx(costs.size());
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return costs[a] < costs[b]; });
  idx.resize(k);
  return idx;
}

namespace {

std::vector<std::size_t> kmeanspp_seeds(std::span<const Vector> pts, std::size_t k, Rng& rng) {
  std::vector<std::size_t> centers;
  std::uniform_int_distribution<std::size_t> pick(0, pts.size() - 1);
  centers.push_back(pick(rng));
  std::vector<double> d2(pts.size(), kInf);
  while (centers.size() < k) {
    const Vector& last = pts[centers.back()];
    double total = 0.0;
    for (std::size_t i = 0; i < pts.size(); ++i) {
      d2[i] = std::min(d2[i], (pts[i] - last).squaredNorm());
      total += d2[i];
    }
    if (!(total > 0.0)) {
      centers.push_back(pick(rng));
      continue;
    }
    std::uniform_real_distribution<double> unif(0.0, total);
    const double r = unif(rng);
    double acc = 0.0;
    std::size_t chosen = pts.size() - 1;
    for (std::size_t i = 0; i < pts.size(); ++i) {
      acc += d2[i];
      if (r < acc) {
        chosen = i;
        break;
      }
    }
    centers.push_back(chosen);
  }
  return centers;
}

}  // namespace

Gmm fit_gmm_elite(std::span<const Vector> samples, std::span<const double> costs,
                  std::size_t n_elite, std::size_t n_components, Rng& rng, const EmOptions& options) {
  if (samples.size() != costs.size()) throw DimensionError("fit_gmm_elite: samples and costs differ in length");
  if (n_elite == 0) throw ValidationError("fit_gmm_elite: empty elite set");
  if (n_components == 0) throw ValidationError("fit_gmm_elite: n_components must be >= 1");
  if (n_components > n_elite) {
    throw ValidationError("fit_gmm_elite: more components (" + std::to_string(n_components) +
                          ") than elites (" + std::to_string(n_elite) + ")");
  }
  const auto idx = elite_indices(costs, n_elite);
  std::vector<Vector> elites;
  elites.reserve(idx.size());
  for (auto i : idx) elites.push_back(samples[i]);
  const std::size_t m = elites.size();
  const std::size_t c = n_components;

  // Initial components: k-means++ centers with the pooled elite covariance.
  const std::vector<double> ones(m, 1.0);
  const Gaussian pooled = fit_gaussian_weighted(elites, ones, options.jitter);
  std::vector<Gaussian> comps;
  for (auto s : kmeanspp_seeds(elites, c, rng)) comps.emplace_back(elites[s], pooled.covariance());
  std::vector<double> weights(c, 1.0 / static_cast<double>(c));

  Matrix resp(m, c);
  std::vector<double> row(c);
  std::vector<double> col(m);
  double prev_ll = -kInf;
  for (int iter = 0; iter < options.max_iters; ++iter) {
    // E-step.
    double ll = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
      for (std::size_t k = 0; k < c; ++k) row[k] = std::log(weights[k]) + comps[k].log_density(elites[i]);
      const double lse = log_sum_exp(row);
      ll += lse;
      double norm = 0.0;
      for (std::size_t k = 0; k < c; ++k) {
        resp(i, k) = std::max(std::exp(row[k] - lse), options.responsibility_floor);
        norm += resp(i, k);
      }
      resp.row(i) /= norm;
    }
    // M-step.
    double wsum = 0.0;
    for (std::size_t k = 0; k < c; ++k) {
      weights[k] = std::max(resp.col(k).sum() / static_cast<double>(m), options.weight_floor);
      wsum += weights[k];
    }
    for (auto& w : weights) w /= wsum;
    for (std::size_t k = 0; k < c; ++k) {
      for (std::size_t i = 0; i < m; ++i) col[i] = resp(i, k);
      comps[k] = fit_gaussian_weighted(elites, col, options.jitter);
    }
    if (std::isfinite(prev_ll) && std::abs(ll - prev_ll) <= options.tolerance * std::max(1.0, std::abs(ll))) break;
    prev_ll = ll;
  }
  // Exact renormalization so the Gmm weight check never trips on rounding.
  const double total = std::accumulate(weights.begin(), weights.end(), 0.0);
  for (auto& w : weights) w /= total;
  return Gmm(std::move(weights), std::move(comps));
}

}  // namespace distplan
