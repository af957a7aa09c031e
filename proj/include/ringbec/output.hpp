#pragma once

// Trajectory and report files. Every file is written to a temporary name
// next to the target and renamed into place.

#include <filesystem>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "ringbec/config.hpp"
#include "ringbec/integrator.hpp"

namespace ringbec {

/// t_over_omegaR, N_1..N_n, theta_1..theta_n, J_1..J_n, energy, winding.
std::vector<std::string> trajectory_columns(int n_wells);

/// Provenance written into every trajectory: version, config hash and the
/// canonical config, so the file alone can rebuild the run.
struct TrajectoryHeader {
  std::string version;
  std::string config_hash;
  nlohmann::json config;  // RunConfig::sections; null when unknown
};

TrajectoryHeader make_header(const RunConfig& config);

/// CSV: two comment lines ("# ringbec <version> config_hash=<hash>" and
/// "# config=<json>"), a header row, then one row per sample with %.17g
/// numbers; the winding column is empty where undefined.
std::string trajectory_csv(const Trajectory& trajectory, const TrajectoryHeader& header);

/// JSONL: a {"metadata": ...} line followed by one object per sample.
std::string trajectory_jsonl(const Trajectory& trajectory, const TrajectoryHeader& header);

void write_file_atomic(const std::filesystem::path& path, const std::string& content);

void write_trajectory(const Trajectory& trajectory, const std::filesystem::path& path,
                      OutputFormat format, const TrajectoryHeader& header);

void write_json(const nlohmann::json& value, const std::filesystem::path& path);

struct CsvTable {
  std::vector<std::string> comments;  // without the leading "# "
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;  // NaN for empty cells
};

CsvTable read_csv(const std::filesystem::path& path);
CsvTable parse_csv(const std::string& text);

/// Recovers the config embedded by trajectory_csv / trajectory_jsonl.
RunConfig config_from_trajectory_file(const std::filesystem::path& path);

}  // namespace ringbec
