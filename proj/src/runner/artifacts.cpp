#include "levelrate/runner/artifacts.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <ctime>
#include <fstream>
#include <sstream>

#include "levelrate/dataset.hpp"
#include "levelrate/errors.hpp"

#ifndef LEVELRATE_VERSION
#define LEVELRATE_VERSION "0.1.0"
#endif

namespace levelrate::runner {

using nlohmann::json;

std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void write_trajectory_csv(std::ostream& out, const Trajectory& traj) {
  out << "t,loss,grad_norm,rate,lyapunov_rate\n";
  for (const auto& s : traj.steps) {
    out << s.t << ',' << format_double(s.loss) << ',' << format_double(s.grad_norm) << ',' << format_double(s.rate)
        << ',' << format_double(s.lyapunov_rate) << '\n';
  }
}

namespace {

double parse_csv_double(std::string_view s, std::size_t line) {
  // from_chars does not accept "inf"/"nan" spellings from printf on every
  // libstdc++; strtod does.
  const std::string tmp(s);
  char* end = nullptr;
  const double v = std::strtod(tmp.c_str(), &end);
  if (tmp.empty() || end != tmp.c_str() + tmp.size()) {
    throw DataError("trajectory.csv:" + std::to_string(line) + ": bad number '" + tmp + "'");
  }
  return v;
}

}  // namespace

Trajectory read_trajectory_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || detail::trim(line) != "t,loss,grad_norm,rate,lyapunov_rate") {
    throw DataError("trajectory.csv: missing or unexpected header");
  }
  Trajectory traj;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (detail::trim(line).empty()) continue;
    const auto cells = detail::split_commas(line);
    if (cells.size() != 5) throw DataError("trajectory.csv:" + std::to_string(lineno) + ": expected 5 fields");
    StepRecord r;
    if (!detail::parse_number(cells[0], r.t)) {
      throw DataError("trajectory.csv:" + std::to_string(lineno) + ": bad step index");
    }
    r.loss = parse_csv_double(cells[1], lineno);
    r.grad_norm = parse_csv_double(cells[2], lineno);
    r.rate = parse_csv_double(cells[3], lineno);
    r.lyapunov_rate = parse_csv_double(cells[4], lineno);
    traj.steps.push_back(std::move(r));
  }
  return traj;
}

json to_json(const StabilityReport& report, double tol) {
  json violations = json::array();
  for (const auto& v : report.violations) {
    violations.push_back({{"t", v.t}, {"observed_change", v.observed_change}, {"allowed_change", v.allowed_change}});
  }
  json j = {{"steps_checked", report.steps_checked},
            {"tol", tol},
            {"monotone", report.monotone},
            {"max_violation", report.max_violation},
            {"violations", violations}};
  if (report.bounded_checked) {
    j["boundedness"] = {{"delta", report.bound_delta}, {"epsilon", report.bound_epsilon}, {"bounded", report.bounded}};
  } else {
    j["boundedness"] = nullptr;
  }
  return j;
}

json to_json(const ConnectivityReport& report) {
  json entries = json::array();
  for (const auto& e : report.entries) {
    entries.push_back({{"lambda", e.lambda},
                       {"direction", to_string(e.direction)},
                       {"component_count", e.component_count},
                       {"connected", e.connected},
                       {"occupied_fraction", e.occupied_fraction}});
  }
  return {{"adjacency", static_cast<int>(report.adjacency)}, {"all_connected", report.all_connected()},
          {"entries", entries}};
}

json to_json(const EquiconnectednessReport& report) {
  auto entry = [](const EquiconnectednessEntry& e) {
    return json{{"t", e.t},
                {"gamma", e.gamma},
                {"lambda", e.lambda},
                {"direction", to_string(e.direction)},
                {"dynamic_count", e.dynamic_count},
                {"scaled_count", e.scaled_count}};
  };
  json entries = json::array();
  for (const auto& e : report.entries) entries.push_back(entry(e));
  json mismatches = json::array();
  for (const auto& e : report.mismatches) mismatches.push_back(entry(e));
  return {{"checked", report.entries.size()}, {"mismatches", mismatches}, {"entries", entries}};
}

void write_file_atomic(const std::filesystem::path& path, const std::string& content) {
  const std::filesystem::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot write '" + tmp.string() + "'");
    out << content;
    out.flush();
    if (!out) throw Error("write to '" + tmp.string() + "' failed");
  }
  std::filesystem::rename(tmp, path);
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot read '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string version_string() { return LEVELRATE_VERSION; }

std::string utc_now() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

json to_json(const RunManifest& m) {
  return {{"command", m.command},       {"config", m.config},   {"version", m.version},
          {"started_at", m.started_at}, {"finished_at", m.finished_at}, {"status", m.status},
          {"message", m.message},       {"exit_code", m.exit_code},     {"artifacts", m.artifacts}};
}

RunManifest manifest_from_json(const json& j) {
  RunManifest m;
  try {
    m.command = j.at("command").get<std::string>();
    m.config = j.at("config");
    m.version = j.at("version").get<std::string>();
    m.started_at = j.at("started_at").get<std::string>();
    m.finished_at = j.at("finished_at").get<std::string>();
    m.status = j.at("status").get<std::string>();
    m.message = j.at("message").get<std::string>();
    m.exit_code = j.at("exit_code").get<int>();
    m.artifacts = j.at("artifacts").get<std::vector<std::string>>();
  } catch (const json::exception& e) {
    throw DataError(std::string("malformed manifest: ") + e.what());
  }
  if (m.status != "completed" && m.status != "diverged" && m.status != "error") {
    throw DataError("malformed manifest: unknown status '" + m.status + "'");
  }
  return m;
}

void write_manifest(const std::filesystem::path& dir, const RunManifest& m) {
  write_file_atomic(dir / kManifestName, to_json(m).dump(2) + "\n");
}

RunManifest read_manifest(const std::filesystem::path& dir) {
  json j;
  try {
    j = json::parse(read_file(dir / kManifestName));
  } catch (const json::parse_error& e) {
    throw DataError("manifest in '" + dir.string() + "' is not valid JSON: " + e.what());
  }
  return manifest_from_json(j);
}

}  // namespace levelrate::runner
