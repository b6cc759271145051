#pragma once

#include <filesystem>
#include <istream>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include <json.hpp>

#include "levelrate/stability.hpp"
#include "levelrate/topology.hpp"
#include "levelrate/trajectory.hpp"

namespace levelrate::runner {

/// Shortest-safe decimal form: 17 significant digits, enough to round-trip
/// any double.
std::string format_double(double v);

/// Columns: t,loss,grad_norm,rate,lyapunov_rate.
void write_trajectory_csv(std::ostream& out, const Trajectory& traj);
/// Inverse of write_trajectory_csv. x snapshots are not stored in the CSV.
Trajectory read_trajectory_csv(std::istream& in);

nlohmann::json to_json(const StabilityReport& report, double tol);
nlohmann::json to_json(const ConnectivityReport& report);
nlohmann::json to_json(const EquiconnectednessReport& report);

/// Writes `content` to `path` through a temporary file and a rename, so the
/// file is either absent or complete.
void write_file_atomic(const std::filesystem::path& path, const std::string& content);
std::string read_file(const std::filesystem::path& path);

/// Version string baked in at build time (git describe when available).
std::string version_string();

/// UTC timestamp, ISO 8601 with seconds.
std::string utc_now();

struct RunManifest {
  std::string command;
  nlohmann::json config;
  std::string version;
  std::string started_at;
  std::string finished_at;
  std::string status;  // completed | diverged | error
  std::string message;
  int exit_code = 0;
  std::vector<std::string> artifacts;
};

inline constexpr const char* kManifestName = "manifest.json";

nlohmann::json to_json(const RunManifest& m);
RunManifest manifest_from_json(const nlohmann::json& j);
void write_manifest(const std::filesystem::path& dir, const RunManifest& m);
RunManifest read_manifest(const std::filesystem::path& dir);

}  // namespace levelrate::runner
