#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "json.hpp"

#include "distplan/planner.hpp"

namespace distplan {

/// One CSV row: a belief, the action taken from it (empty on the last row),
/// its goal divergence, a cost and the wall time.
struct TrajectoryRow {
  std::size_t step = 0;
  Vector action;
  Vector mean;
  Matrix covariance;
  double divergence = 0.0;
  double cost = 0.0;
  double ms = 0.0;
};

std::string format_double(double v);  // "%.17g", round-trips exactly

/// Header: step,action_0..,mean_0..,cov_0_0..,divergence,cost,ms
std::string trajectory_header(Eigen::Index action_dim, Eigen::Index state_dim);
void write_trajectory_csv(const std::filesystem::path& path, const std::vector<TrajectoryRow>& rows,
                          Eigen::Index action_dim, Eigen::Index state_dim);
std::vector<TrajectoryRow> read_trajectory_csv(const std::filesystem::path& path, Eigen::Index action_dim,
                                               Eigen::Index state_dim);

/// The ms column is 0 unless record_time is set, so CSV bytes depend only on
/// the scenario and seed; wall time always goes to the JSON-lines log.
std::vector<TrajectoryRow> rows_from_log(const TrajectoryLog& log, bool record_time);

nlohmann::json trace_to_json(const CemIteration& it);
void write_run_log(const std::filesystem::path& path, const nlohmann::json& metadata, const TrajectoryLog& log);

using Polyline = std::vector<Vector>;
void write_paths(const std::filesystem::path& path, const std::vector<Polyline>& paths);
std::vector<Polyline> read_paths(const std::filesystem::path& path);

void write_json(const std::filesystem::path& path, const nlohmann::json& j);
nlohmann::json read_json(const std::filesystem::path& path);

}  // namespace distplan
