#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "levelrate/dataset.hpp"
#include "levelrate/optimizer.hpp"
#include "levelrate/risk.hpp"
#include "levelrate/topology.hpp"

namespace levelrate::runner {

struct ObjectiveSpec {
  std::string name = "quadratic";  // quadratic | rosenbrock | himmelblau | mlp
  std::size_t dim = 2;             // quadratic only
  // mlp only: either a CSV path or the built-in imbalanced blobs.
  std::string dataset_path;
  SyntheticSpec synthetic{};
  std::size_t hidden = 8;
  std::size_t slice_i = 0;  // coordinates varied by topology on mlp
  std::size_t slice_j = 1;
};

struct BoundednessSpec {
  std::vector<double> x_star;
  double delta = 1.0;
  double epsilon = 1.0;
};

struct TopologySpec {
  Box2 box{};
  std::size_t nx = 201;
  std::size_t ny = 201;
  Adjacency adjacency = Adjacency::Eight;
  std::vector<Direction> directions{Direction::Super, Direction::Sub};
  std::vector<double> lambdas;  // empty: lambda_count interior levels of the grid range
  std::size_t lambda_count = 50;
  std::vector<double> t_list{0.0, 1.0, 5.0};
  std::size_t equi_lambda_count = 20;
};

struct GradcheckSpec {
  std::size_t points = 10;
  double h = 1e-6;
  double tolerance = 1e-4;
  double quadratic_tolerance = 1e-8;
};

struct ExperimentConfig {
  ObjectiveSpec objective{};
  Method method{};
  RiskConfig risk{};
  std::size_t steps = 200;
  std::uint64_t seed = 0;
  std::optional<std::vector<double>> x0;
  std::string output_dir = "runs/default";
  double monotone_tol = 1e-12;
  std::optional<BoundednessSpec> boundedness;
  TopologySpec topology{};
  GradcheckSpec gradcheck{};
};

/// Parses and validates a JSON config. Unknown keys, wrong types and
/// out-of-range values raise ConfigError naming the offending key.
ExperimentConfig parse_config(const nlohmann::json& j);
ExperimentConfig load_config(const std::string& path);

/// Canonical JSON echo of a config (every field, defaults filled in).
nlohmann::json to_json(const ExperimentConfig& cfg);

struct Overrides {
  std::optional<std::string> output_dir;
  std::optional<std::size_t> steps;
  std::optional<std::uint64_t> seed;
};

/// Applies precedence flags > environment (LEVELRATE_OUT) > file.
void apply_overrides(ExperimentConfig& cfg, const Overrides& flags);

}  // namespace levelrate::runner
