#include "distplan/oracles.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include <Eigen/LU>

#include "distplan/error.hpp"
#include "distplan/parallel.hpp"

namespace distplan {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kMassTolerance = 1e-8;

// Neumaier compensated sum; the grids reach a few million cells.
struct CompensatedSum {
  double sum = 0.0;
  double carry = 0.0;
  void add(double v) {
    const double t = sum + v;
    carry += std::abs(sum) >= std::abs(v) ? (sum - t) + v : (v - t) + sum;
    sum = t;
  }
  double value() const { return sum + carry; }
};

// Gaussian density evaluated through an LU factorization, kept apart from
// the Cholesky path the library uses.
struct LuDensity {
  Vector mean;
  Matrix inverse;
  double log_norm = 0.0;

  LuDensity(const Vector& mu, const Matrix& cov) : mean(mu) {
    Eigen::PartialPivLU<Matrix> lu(cov);
    inverse = lu.inverse();
    double log_det = 0.0;
    for (Eigen::Index i = 0; i < cov.rows(); ++i) log_det += std::log(std::abs(lu.matrixLU()(i, i)));
    log_norm = -0.5 * (static_cast<double>(mu.size()) * std::log(2.0 * std::numbers::pi) + log_det);
  }
  double log_density(const Vector& x) const {
    const Vector d = x - mean;
    return log_norm - 0.5 * d.dot(inverse * d);
  }
};

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

bool near(double a, double b, double tol) {
  if (std::isinf(a) || std::isinf(b)) return a == b;
  return std::abs(a - b) <= tol * std::max(1.0, std::abs(b));
}

int compare(double a, double b, double tol) {
  if (near(a, b, tol)) return 0;
  return a < b ? -1 : 1;
}

// Pairwise order agreement with ties resolved by tolerance. Ties found by
// the oracle are reported, not broken.
void compare_rankings(std::span<const double> system, std::span<const double> oracle, double tol,
                      const std::string& what, CheckResult& out) {
  for (std::size_t i = 0; i < system.size(); ++i) {
    for (std::size_t j = i + 1; j < system.size(); ++j) {
      const int s = compare(system[i], system[j], tol);
      const int o = compare(oracle[i], oracle[j], tol);
      if (o == 0) out.notes.push_back("tie between candidates " + std::to_string(i) + " and " + std::to_string(j));
      if (s != o) {
        out.violations.push_back(what + ": order of candidates " + std::to_string(i) + " and " + std::to_string(j) +
                                 " differs (system " + fmt(system[i]) + " vs " + fmt(system[j]) + ", oracle " +
                                 fmt(oracle[i]) + " vs " + fmt(oracle[j]) + ")");
      }
    }
  }
}

std::size_t argmin(std::span<const double> v) {
  return static_cast<std::size_t>(std::min_element(v.begin(), v.end()) - v.begin());
}

Matrix random_spd(Eigen::Index n, double max_condition, Rng& rng) {
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  const Matrix a = Matrix::NullaryExpr(n, n, [&] { return unif(rng) - 0.5; });
  Eigen::HouseholderQR<Matrix> qr(a);
  const Matrix q = qr.householderQ();
  const double scale = std::exp(std::log(0.05) + unif(rng) * std::log(40.0));
  Vector eig(n);
  for (Eigen::Index i = 0; i < n; ++i) eig[i] = scale * std::exp(unif(rng) * std::log(max_condition));
  return symmetrize(q * eig.asDiagonal() * q.transpose());
}

}  // namespace

void QuadratureGrid::validate() const {
  const auto n = lower.size();
  if (n < 1 || n > 3) throw ValidationError("quadrature grids support 1 to 3 dimensions");
  if (upper.size() != n || counts.size() != static_cast<std::size_t>(n)) {
    throw DimensionError("quadrature grid bounds and counts disagree in dimension");
  }
  for (Eigen::Index d = 0; d < n; ++d) {
    if (!(lower[d] < upper[d])) throw ValidationError("quadrature grid needs lower < upper");
    if (counts[static_cast<std::size_t>(d)] < kMinPoints) {
      throw ValidationError("quadrature grid needs at least " + std::to_string(kMinPoints) + " points per dimension");
    }
  }
}

std::size_t QuadratureGrid::size() const {
  std::size_t total = 1;
  for (auto c : counts) total *= c;
  return total;
}

double QuadratureGrid::cell_volume() const {
  double v = 1.0;
  for (Eigen::Index d = 0; d < lower.size(); ++d) {
    v *= (upper[d] - lower[d]) / static_cast<double>(counts[static_cast<std::size_t>(d)]);
  }
  return v;
}

Vector QuadratureGrid::point(std::size_t flat_index) const {
  Vector x(lower.size());
  for (Eigen::Index d = 0; d < lower.size(); ++d) {
    const std::size_t c = counts[static_cast<std::size_t>(d)];
    const std::size_t k = flat_index % c;
    flat_index /= c;
    const double h = (upper[d] - lower[d]) / static_cast<double>(c);
    x[d] = lower[d] + (static_cast<double>(k) + 0.5) * h;
  }
  return x;
}

QuadratureGrid QuadratureGrid::around(const Gaussian& p, double n_sigma, std::size_t min_points,
                                      std::size_t max_points) {
  const Eigen::Index n = p.dim();
  const Matrix precision = p.covariance().inverse();
  QuadratureGrid g;
  g.lower.resize(n);
  g.upper.resize(n);
  for (Eigen::Index d = 0; d < n; ++d) {
    const double sd = std::sqrt(p.covariance()(d, d));
    const double cond_sd = 1.0 / std::sqrt(precision(d, d));
    g.lower[d] = p.mean()[d] - n_sigma * sd;
    g.upper[d] = p.mean()[d] + n_sigma * sd;
    const double wanted = std::ceil((g.upper[d] - g.lower[d]) / (cond_sd / 3.0));
    g.counts.push_back(std::clamp(static_cast<std::size_t>(wanted), std::max(min_points, kMinPoints), max_points));
  }
  return g;
}

double numeric_kl(const GoalSpec& p, const GoalSpec& q, const QuadratureGrid& grid) {
  grid.validate();
  if (std::holds_alternative<DiracDelta>(p) || std::holds_alternative<DiracDelta>(q)) {
    throw ValidationError("numeric_kl: a Dirac delta cannot be integrated on a grid");
  }
  if (dim(p) != grid.lower.size() || dim(q) != grid.lower.size()) {
    throw DimensionError("numeric_kl: distributions and grid differ in dimension");
  }
  const double dv = grid.cell_volume();
  CompensatedSum mass;
  CompensatedSum kl;
  bool infinite = false;
  const std::size_t total = grid.size();
  for (std::size_t i = 0; i < total; ++i) {
    const Vector x = grid.point(i);
    const double lp = log_density(p, x);
    if (lp == -kInf) continue;  // 0 log(0 / q) = 0
    const double px = std::exp(lp);
    mass.add(px * dv);
    const double lq = log_density(q, x);
    if (lq == -kInf) {
      if (px > 0.0) infinite = true;
      continue;
    }
    kl.add(px * (lp - lq) * dv);
  }
  if (mass.value() < 1.0 - kMassTolerance) {
    throw NumericalError("numeric_kl: grid holds only " + fmt(mass.value()) + " of p's mass");
  }
  return infinite ? kInf : kl.value();
}

CheckResult verify_goal_set_indicator(const UniformBox& goal, std::span<const Vector> points) {
  CheckResult out;
  double width_product = 1.0;
  for (Eigen::Index d = 0; d < goal.dim(); ++d) width_product *= goal.upper()[d] - goal.lower()[d];
  const double expected_inside = std::log(width_product);  // -log u
  double first_inside = std::numeric_limits<double>::quiet_NaN();
  for (std::size_t i = 0; i < points.size(); ++i) {
    const Vector& x = points[i];
    bool inside = true;
    for (Eigen::Index d = 0; d < x.size(); ++d) {
      if (x[d] < goal.lower()[d] || x[d] > goal.upper()[d]) inside = false;
    }
    const double cost = -log_density(GoalSpec(goal), x);
    const double expected = inside ? expected_inside : kInf;
    if (!near(cost, expected, 1e-12)) {
      out.violations.push_back("point " + std::to_string(i) + ": cost " + fmt(cost) + ", expected " + fmt(expected));
    }
    if (inside) {
      if (std::isnan(first_inside)) {
        first_inside = cost;
      } else if (cost != first_inside) {
        out.violations.push_back("point " + std::to_string(i) + ": interior cost " + fmt(cost) +
                                 " differs from other interior points (" + fmt(first_inside) + ")");
      }
    }
  }
  return out;
}

CheckResult verify_weighted_euclidean(const Vector& g, const Matrix& precision, std::span<const Vector> states) {
  CheckResult out;
  const std::size_t m = states.size();
  std::vector<double> quad(m);
  for (std::size_t i = 0; i < m; ++i) {
    const Vector d = states[i] - g;
    quad[i] = 0.5 * d.dot(precision * d);
  }

  Eigen::SelfAdjointEigenSolver<Matrix> es(precision);
  const bool definite = es.eigenvalues().minCoeff() > 0.0;
  if (definite) {
    const Gaussian goal(g, symmetrize(precision.ldlt().solve(Matrix::Identity(g.size(), g.size()))));
    const double at_goal = -goal.log_density(g);
    std::vector<double> nll(m);
    for (std::size_t i = 0; i < m; ++i) {
      nll[i] = -goal.log_density(states[i]) - at_goal;
      if (!near(nll[i], quad[i], 1e-9)) {
        out.violations.push_back("state " + std::to_string(i) + ": -log N difference " + fmt(nll[i]) +
                                 " vs weighted distance " + fmt(quad[i]));
      }
    }
    const std::size_t a = argmin(nll);
    const std::size_t b = argmin(quad);
    if (a != b && !near(quad[a], quad[b], 1e-9)) {
      out.violations.push_back("argmin differs: density form picks " + std::to_string(a) + ", weighted distance picks " +
                               std::to_string(b));
    }
    return out;
  }

  // Zero-precision dimensions: moving states along them must not change the ranking.
  std::vector<Vector> moved(states.begin(), states.end());
  for (Eigen::Index d = 0; d < g.size(); ++d) {
    if (precision(d, d) != 0.0) continue;
    for (std::size_t i = 0; i < m; ++i) moved[i][d] += 10.0 * static_cast<double>(i + 1);
  }
  std::vector<double> quad_moved(m);
  for (std::size_t i = 0; i < m; ++i) {
    const Vector d = moved[i] - g;
    quad_moved[i] = 0.5 * d.dot(precision * d);
  }
  compare_rankings(quad_moved, quad, 1e-12, "zero-precision dimension", out);
  return out;
}

CheckResult verify_max_prob(const Vector& g, std::span<const Gaussian> beliefs) {
  CheckResult out;
  const std::size_t m = beliefs.size();
  std::vector<double> system(m);
  std::vector<double> oracle(m);
  for (std::size_t i = 0; i < m; ++i) {
    system[i] = goal_cost(beliefs[i], DiracDelta(g), Projection::M, 1.0);
    oracle[i] = -LuDensity(beliefs[i].mean(), beliefs[i].covariance()).log_density(g);
  }
  compare_rankings(system, oracle, 1e-9, "max-probability ranking", out);
  return out;
}

CheckResult verify_chance_constrained(const UniformBox& goal, std::span<const Gaussian> beliefs) {
  CheckResult out;
  const Eigen::Index n = goal.dim();
  if (n > 3) throw ValidationError("verify_chance_constrained supports up to 3 dimensions");
  QuadratureGrid grid;
  grid.lower = goal.lower();
  grid.upper = goal.upper();
  const std::size_t per_dim = n == 1 ? 4097 : (n == 2 ? 257 : 49);
  grid.counts.assign(static_cast<std::size_t>(n), per_dim);
  const double dv = grid.cell_volume();

  const std::size_t m = beliefs.size();
  std::vector<double> system(m);
  std::vector<double> int_log(m);
  std::vector<double> int_p(m);
  std::vector<double> error_bound(m);
  for (std::size_t i = 0; i < m; ++i) {
    system[i] = goal_cost(beliefs[i], goal, Projection::M, 1.0);
    const LuDensity dens(beliefs[i].mean(), beliefs[i].covariance());
    CompensatedSum sl;
    CompensatedSum sp;
    for (std::size_t k = 0; k < grid.size(); ++k) {
      const double lp = dens.log_density(grid.point(k));
      sl.add(lp * dv);
      sp.add(std::exp(lp) * dv);
    }
    int_log[i] = sl.value();
    int_p[i] = sp.value();
    // Midpoint error for a quadratic integrand: sum_d h_d^2 / 24 * |d^2 f / dx_d^2| * volume.
    double bound = 0.0;
    for (Eigen::Index d = 0; d < n; ++d) {
      const double h = (grid.upper[d] - grid.lower[d]) / static_cast<double>(per_dim);
      bound += h * h / 24.0 * std::abs(dens.inverse(d, d)) * goal.volume();
    }
    error_bound[i] = bound;
  }

  const std::size_t chosen = argmin(system);
  const std::size_t best_log =
      static_cast<std::size_t>(std::max_element(int_log.begin(), int_log.end()) - int_log.begin());
  if (chosen != best_log) {
    const double gap = int_log[best_log] - int_log[chosen];
    const double slack = 2.0 * (error_bound[best_log] + error_bound[chosen]) + 1e-9;
    if (gap > slack) {
      out.violations.push_back("M-projection picks candidate " + std::to_string(chosen) +
                               " but the integral of log p is largest for candidate " + std::to_string(best_log) +
                               " (gap " + fmt(gap) + ")");
    } else {
      out.notes.push_back("near tie in the integral of log p between candidates " + std::to_string(chosen) + " and " +
                          std::to_string(best_log));
    }
  }
  const std::size_t best_p = static_cast<std::size_t>(std::max_element(int_p.begin(), int_p.end()) - int_p.begin());
  if (best_p != chosen && int_p[best_p] != int_p[chosen]) {
    out.notes.push_back("non-log form disagrees: the probability of reaching the box is largest for candidate " +
                        std::to_string(best_p) + ", the M-projection picks " + std::to_string(chosen));
  }
  return out;
}

std::vector<SuiteReport> run_reductions_suite(std::size_t instances, std::uint64_t seed, int threads) {
  const char* names[4] = {"goal_set_indicator", "weighted_euclidean", "max_probability", "chance_constrained_log"};
  std::vector<SuiteReport> reports(4);
  for (std::size_t r = 0; r < 4; ++r) {
    reports[r].reduction = names[r];
    reports[r].instances = instances;
  }
  std::vector<CheckResult> results(4 * instances);
  parallel_for(4 * instances, threads, [&](std::size_t job) {
    const std::size_t r = job / instances;
    const std::size_t k = job % instances;
    Rng rng = make_rng(seed, {stream::kQuadrature, r, k});
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    std::uniform_int_distribution<int> pick_dim(1, 3);
    const Eigen::Index n = pick_dim(rng);
    auto uvec = [&](double lo, double hi) {
      return Vector(Vector::NullaryExpr(n, [&] { return lo + (hi - lo) * unif(rng); }));
    };
    switch (r) {
      case 0: {
        const Vector lo = uvec(-3.0, 3.0);
        const UniformBox box(lo, lo + uvec(0.2, 3.0));
        std::vector<Vector> pts;
        for (int i = 0; i < 3; ++i) {
          pts.push_back(box.lower() + (box.upper() - box.lower()).cwiseProduct(uvec(0.0, 1.0)));
        }
        pts.push_back(box.upper());  // boundary belongs to the box
        Vector outside = box.center();
        outside[0] = box.upper()[0] + 0.1 + unif(rng);
        pts.push_back(outside);
        outside = box.center();
        outside[n - 1] = box.lower()[n - 1] - 0.1 - unif(rng);
        pts.push_back(outside);
        results[job] = verify_goal_set_indicator(box, pts);
        break;
      }
      case 1: {
        const Vector g = uvec(-2.0, 2.0);
        Matrix precision = random_spd(n, 1e3, rng);
        if (k % 10 == 9 && n > 1) {
          precision.row(n - 1).setZero();
          precision.col(n - 1).setZero();
        }
        std::vector<Vector> states;
        for (int i = 0; i < 5; ++i) states.push_back(g + uvec(-1.0, 1.0));
        results[job] = verify_weighted_euclidean(g, precision, states);
        break;
      }
      case 2: {
        const Vector g = uvec(-2.0, 2.0);
        std::vector<Gaussian> beliefs;
        for (int i = 0; i < 5; ++i) beliefs.emplace_back(g + uvec(-1.5, 1.5), random_spd(n, 1e3, rng));
        if (k % 10 == 9) beliefs.push_back(beliefs.front());
        results[job] = verify_max_prob(g, beliefs);
        break;
      }
      default: {
        const Vector lo = uvec(-2.0, 2.0);
        const UniformBox box(lo, lo + uvec(0.3, 2.0));
        std::vector<Gaussian> beliefs;
        for (int i = 0; i < 5; ++i) {
          beliefs.emplace_back(box.center() + uvec(-2.0, 2.0), random_spd(n, 1e2, rng));
        }
        results[job] = verify_chance_constrained(box, beliefs);
        break;
      }
    }
  });
  for (std::size_t job = 0; job < results.size(); ++job) {
    SuiteReport& rep = reports[job / instances];
    const std::string prefix = "instance " + std::to_string(job % instances) + ": ";
    for (auto& v : results[job].violations) rep.violations.push_back(prefix + v);
    for (auto& v : results[job].notes) rep.notes.push_back(prefix + v);
  }
  return reports;
}

}  // namespace distplan
