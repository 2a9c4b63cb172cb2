#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>

#include "json.hpp"

#include "distplan/scenario.hpp"

namespace distplan {

inline constexpr const char* kVersion = "0.1.0";

struct RunOptions {
  std::optional<std::uint64_t> seed;  // overrides the scenario seed
  int threads = 1;
  bool record_time = false;  // fill the CSV ms column with wall time
};

/// Single planning call from the start belief. Writes scenario.json,
/// metadata.json, trajectory.csv (predicted beliefs), trace.jsonl,
/// paths.json and plot.svg into out_dir.
nlohmann::json cmd_plan(const Scenario& scenario, const std::filesystem::path& out_dir, const RunOptions& opts);

/// n_runs MPC executions with seeds seed + run_index, each in
/// out_dir/run_NNN, plus out_dir/summary.json. A failed run is recorded in
/// the summary and does not stop the others. Returns the summary.
nlohmann::json cmd_mpc(const Scenario& scenario, const std::filesystem::path& out_dir, std::size_t n_runs,
                       const RunOptions& opts);

/// Reduction suite report; "ok" is false when any violation was found.
nlohmann::json cmd_verify(const std::string& suite, std::size_t instances, std::uint64_t seed, int threads);

/// Renders a run directory (scenario.json, trajectory.csv, optional
/// paths.json) to an SVG file.
void cmd_plot(const std::filesystem::path& run_dir, const std::filesystem::path& out_svg);

/// Index of the GMM component nearest to x in Mahalanobis distance, with the distances.
std::pair<std::size_t, std::vector<double>> attribute_mode(const Gmm& goal, const Vector& x);

}  // namespace distplan
