#include "distplan/artifacts.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>

#include "distplan/error.hpp"

namespace distplan {

namespace {

std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream ss(line);
  while (std::getline(ss, cur, sep)) out.push_back(cur);
  if (!line.empty() && line.back() == sep) out.emplace_back();
  return out;
}

double parse_double(const std::string& s, const std::string& where) {
  if (s.empty() || s == "nan") return std::numeric_limits<double>::quiet_NaN();
  if (s == "inf") return std::numeric_limits<double>::infinity();
  if (s == "-inf") return -std::numeric_limits<double>::infinity();
  try {
    std::size_t used = 0;
    const double v = std::stod(s, &used);
    if (used != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw ValidationError(where + ": not a number: \"" + s + "\"");
  }
}

nlohmann::json vec_json(const Vector& v) {
  nlohmann::json out = nlohmann::json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(v[i]);
  return out;
}

nlohmann::json finite_or_null(double v) { return std::isfinite(v) ? nlohmann::json(v) : nlohmann::json(nullptr); }

}  // namespace

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::string trajectory_header(Eigen::Index action_dim, Eigen::Index state_dim) {
  std::string h = "step";
  for (Eigen::Index i = 0; i < action_dim; ++i) h += ",action_" + std::to_string(i);
  for (Eigen::Index i = 0; i < state_dim; ++i) h += ",mean_" + std::to_string(i);
  for (Eigen::Index r = 0; r < state_dim; ++r) {
    for (Eigen::Index c = 0; c < state_dim; ++c) h += ",cov_" + std::to_string(r) + "_" + std::to_string(c);
  }
  return h + ",divergence,cost,ms";
}

void write_trajectory_csv(const std::filesystem::path& path, const std::vector<TrajectoryRow>& rows,
                          Eigen::Index action_dim, Eigen::Index state_dim) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path.string());
  out << trajectory_header(action_dim, state_dim) << "\n";
  for (const auto& r : rows) {
    out << r.step;
    for (Eigen::Index i = 0; i < action_dim; ++i) out << "," << (r.action.size() ? format_double(r.action[i]) : "");
    for (Eigen::Index i = 0; i < state_dim; ++i) out << "," << format_double(r.mean[i]);
    for (Eigen::Index a = 0; a < state_dim; ++a) {
      for (Eigen::Index b = 0; b < state_dim; ++b) out << "," << format_double(r.covariance(a, b));
    }
    out << "," << format_double(r.divergence) << "," << format_double(r.cost) << "," << format_double(r.ms) << "\n";
  }
}

std::vector<TrajectoryRow> read_trajectory_csv(const std::filesystem::path& path, Eigen::Index action_dim,
                                               Eigen::Index state_dim) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot open " + path.string());
  std::string line;
  if (!std::getline(in, line) || line != trajectory_header(action_dim, state_dim)) {
    throw ValidationError(path.string() + ": unexpected header");
  }
  const std::size_t width = static_cast<std::size_t>(1 + action_dim + state_dim + state_dim * state_dim + 3);
  std::vector<TrajectoryRow> rows;
  for (std::size_t ln = 2; std::getline(in, line); ++ln) {
    if (line.empty()) continue;
    const std::string where = path.string() + ":" + std::to_string(ln);
    const auto cells = split(line, ',');
    if (cells.size() != width) throw ValidationError(where + ": expected " + std::to_string(width) + " columns");
    TrajectoryRow r;
    std::size_t k = 0;
    r.step = static_cast<std::size_t>(parse_double(cells[k++], where));
    const bool has_action = action_dim > 0 && !cells[1].empty();
    if (has_action) r.action.resize(action_dim);
    for (Eigen::Index i = 0; i < action_dim; ++i, ++k) {
      if (has_action) r.action[i] = parse_double(cells[k], where);
    }
    r.mean.resize(state_dim);
    for (Eigen::Index i = 0; i < state_dim; ++i) r.mean[i] = parse_double(cells[k++], where);
    r.covariance.resize(state_dim, state_dim);
    for (Eigen::Index a = 0; a < state_dim; ++a) {
      for (Eigen::Index b = 0; b < state_dim; ++b) r.covariance(a, b) = parse_double(cells[k++], where);
    }
    r.divergence = parse_double(cells[k++], where);
    r.cost = parse_double(cells[k++], where);
    r.ms = parse_double(cells[k++], where);
    rows.push_back(std::move(r));
  }
  return rows;
}

std::vector<TrajectoryRow> rows_from_log(const TrajectoryLog& log, bool record_time) {
  std::vector<TrajectoryRow> rows;
  for (const auto& s : log.steps) {
    rows.push_back(TrajectoryRow{s.step, s.action, s.belief.mean(), s.belief.covariance(), s.divergence, s.cost,
                                 record_time ? s.wall_ms : 0.0});
  }
  return rows;
}

nlohmann::json trace_to_json(const CemIteration& it) {
  return nlohmann::json{{"iter", it.iter},
                        {"elite_mean_cost", finite_or_null(it.elite_mean_cost)},
                        {"elite_min_cost", finite_or_null(it.elite_min_cost)},
                        {"elite_threshold", finite_or_null(it.elite_threshold)},
                        {"kl_step", finite_or_null(it.kl_step)}};
}

void write_run_log(const std::filesystem::path& path, const nlohmann::json& metadata, const TrajectoryLog& log) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path.string());
  nlohmann::json head = metadata;
  head["record"] = "metadata";
  out << head.dump() << "\n";
  for (const auto& s : log.steps) {
    nlohmann::json trace = nlohmann::json::array();
    for (const auto& it : s.trace) trace.push_back(trace_to_json(it));
    out << nlohmann::json{{"record", "step"},
                          {"step", s.step},
                          {"action", vec_json(s.action)},
                          {"mean", vec_json(s.belief.mean())},
                          {"true_state", vec_json(s.true_state)},
                          {"divergence", finite_or_null(s.divergence)},
                          {"cost", finite_or_null(s.cost)},
                          {"wall_ms", s.wall_ms},
                          {"predicted_collisions", s.predicted_collisions},
                          {"path_collision", s.path_collision},
                          {"trace", trace}}
               .dump()
        << "\n";
  }
  out << nlohmann::json{{"record", "status"},
                        {"status", std::string(to_string(log.status))},
                        {"planning_calls", log.planning_calls},
                        {"error", log.error}}
             .dump()
      << "\n";
}

void write_paths(const std::filesystem::path& path, const std::vector<Polyline>& paths) {
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& p : paths) {
    nlohmann::json line = nlohmann::json::array();
    for (const auto& v : p) line.push_back(vec_json(v));
    arr.push_back(line);
  }
  write_json(path, nlohmann::json{{"paths", arr}});
}

std::vector<Polyline> read_paths(const std::filesystem::path& path) {
  const nlohmann::json j = read_json(path);
  std::vector<Polyline> out;
  try {
    for (const auto& line : j.at("paths")) {
      Polyline p;
      for (const auto& v : line) {
        Vector x(static_cast<Eigen::Index>(v.size()));
        for (std::size_t i = 0; i < v.size(); ++i) x[static_cast<Eigen::Index>(i)] = v[i].get<double>();
        p.push_back(x);
      }
      out.push_back(std::move(p));
    }
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(path.string() + ": malformed paths file: " + e.what());
  }
  return out;
}

void write_json(const std::filesystem::path& path, const nlohmann::json& j) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path.string());
  out << j.dump(2) << "\n";
}

nlohmann::json read_json(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot open " + path.string());
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(path.string() + ": " + e.what());
  }
}

}  // namespace distplan
