#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "levelrate/dataset.hpp"
#include "levelrate/landscape.hpp"
#include "levelrate/mlp.hpp"
#include "levelrate/param_vector.hpp"
#include "levelrate/risk.hpp"
#include "levelrate/runner/config.hpp"

namespace levelrate::runner {

enum ExitCode : int { kExitOk = 0, kExitCheckFailed = 1, kExitConfig = 2, kExitRuntime = 3 };

/// A config resolved into something the optimizer can run.
struct Problem {
  Objective objective;  // J_reg for mlp, the named fixture otherwise
  ParamVector x0;
  std::optional<MlpShape> shape;
  std::optional<Dataset> data;
  RiskConfig risk;  // class weights filled in for mlp
};

/// Loads data, fills default class weights (inverse frequency) and picks x0
/// (config value, else seeded). Logs dataset row count and histogram.
Problem build_problem(const ExperimentConfig& cfg, std::ostream& log);

/// optimize: trajectory.csv, stability.json, manifest.json.
int run_optimize(const ExperimentConfig& cfg, std::ostream& log);

/// topology: grid.csv, connectivity.json, manifest.json.
int run_topology(const ExperimentConfig& cfg, std::ostream& log);

struct GradTarget {
  std::string name;
  Objective objective;
  std::vector<ParamVector> points;
  double h = 1e-6;
  double tolerance = 1e-4;
};

/// Quadratic, Rosenbrock, Himmelblau, the MLP cross-entropy, the dynamic cost
/// and the Gaussian negative log-posterior, each at `points` seeded points.
std::vector<GradTarget> builtin_grad_targets(const ExperimentConfig& cfg);

/// gradcheck: gradcheck.json, manifest.json. Exit 1 when any target exceeds
/// its tolerance. `extra` targets are checked after the built-ins.
int run_gradcheck(const ExperimentConfig& cfg, std::ostream& log, const std::vector<GradTarget>& extra = {});

/// report: aggregates manifests found in `dirs` (or their immediate
/// subdirectories) into one summary JSON at `out_path`.
int run_report(const std::vector<std::string>& dirs, const std::string& out_path, std::ostream& log);

/// Runs `fn` over every config with up to `jobs` worker threads. Returns the
/// largest exit code.
int run_sweep(const std::vector<ExperimentConfig>& configs, unsigned jobs,
              const std::function<int(const ExperimentConfig&, std::ostream&)>& fn, std::ostream& log);

}  // namespace levelrate::runner
