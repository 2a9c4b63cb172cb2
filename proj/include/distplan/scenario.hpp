#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <string>
#include <variant>
#include <vector>

#include "json.hpp"

#include "distplan/arm.hpp"
#include "distplan/dubins.hpp"
#include "distplan/planner.hpp"

namespace distplan {

using EnvironmentConfig = std::variant<DubinsConfig, ArmConfig>;

/// Everything a plan or MPC run needs. Loaded from a strict JSON file:
/// unknown keys are rejected and every key left to its default is listed
/// in `defaulted` (dotted paths).
struct Scenario {
  std::string name;
  std::string description;
  std::uint64_t seed = 0;
  EnvironmentConfig environment;
  Gaussian start = Gaussian::isotropic(Vector::Zero(1), 1.0);
  Matrix observation_cov;  // defaults to the start covariance
  GoalSpec goal = DiracDelta(Vector::Zero(1));
  PlannerConfig planner;  // projection, lambda mode, UT and CEM settings live here
  std::vector<std::string> defaulted;

  std::shared_ptr<const Environment> make_environment() const;
  MpcProblem problem() const;
};

Scenario parse_scenario(const nlohmann::json& doc);
Scenario parse_scenario_text(const std::string& text, const std::string& source);
Scenario load_scenario(const std::filesystem::path& path);

/// Canonical tree with every field explicit.
nlohmann::json scenario_to_json(const Scenario& s);
void write_scenario(const Scenario& s, const std::filesystem::path& path);

/// Semantic equality: all fields except the defaulted list.
bool operator==(const Scenario& a, const Scenario& b);

/// FNV-1a over the canonical tree without name and description, as 16 hex digits.
std::string config_hash(const Scenario& s);

nlohmann::json goal_to_json(const GoalSpec& g);
GoalSpec goal_from_json(const nlohmann::json& j);

}  // namespace distplan
