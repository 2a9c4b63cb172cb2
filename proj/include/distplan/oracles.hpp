#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "distplan/distributions.hpp"

namespace distplan {

/// Midpoint-rule grid over an axis-aligned box, up to 3 dimensions.
struct QuadratureGrid {
  Vector lower;
  Vector upper;
  std::vector<std::size_t> counts;

  static constexpr std::size_t kMinPoints = 17;

  void validate() const;
  std::size_t size() const;
  double cell_volume() const;
  Vector point(std::size_t flat_index) const;

  /// Box of +-n_sigma marginal standard deviations around p. The point count
  /// per dimension keeps the spacing at or below a third of p's narrowest
  /// conditional standard deviation, within [min_points, max_points].
  static QuadratureGrid around(const Gaussian& p, double n_sigma, std::size_t min_points, std::size_t max_points);
};

/// sum over cells of p log(p / q) dV, with 0 log(0/q) = 0 and p log(p/0) = +inf.
/// Throws if p puts more than 1e-8 of its mass outside the grid, or if either
/// argument is a Dirac.
double numeric_kl(const GoalSpec& p, const GoalSpec& q, const QuadratureGrid& grid);

struct CheckResult {
  std::vector<std::string> violations;
  std::vector<std::string> notes;  // ties and non-asserted observations
  bool ok() const { return violations.empty(); }
};

/// D(delta_x || U(box)) from the library equals log vol inside and +inf
/// outside, so every interior point has the same constant cost.
CheckResult verify_goal_set_indicator(const UniformBox& goal, std::span<const Vector> points);

/// -log N(x | g, L^-1) + log N(g | g, L^-1) == 1/2 (x-g)^T L (x-g) within 1e-9,
/// and both forms pick the same minimizer. A singular precision (zero
/// diagonal entries allowed) skips the density form and checks that the
/// ranking ignores the unweighted dimensions.
CheckResult verify_weighted_euclidean(const Vector& g, const Matrix& precision, std::span<const Vector> states);

/// Ranking by goal_cost(belief, Dirac(g), M) matches ranking by the density
/// at g computed independently with an LU factorization.
CheckResult verify_max_prob(const Vector& g, std::span<const Gaussian> beliefs);

/// The M-projection minimizer over candidates is the argmax of the integral
/// of log p over the box (quadrature). Agreement with the argmax of the
/// integral of p is only reported.
CheckResult verify_chance_constrained(const UniformBox& goal, std::span<const Gaussian> beliefs);

struct SuiteReport {
  std::string reduction;
  std::size_t instances = 0;
  std::vector<std::string> violations;
  std::vector<std::string> notes;
};

/// The four reductions on seeded random instances.
std::vector<SuiteReport> run_reductions_suite(std::size_t instances, std::uint64_t seed, int threads);

}  // namespace distplan
