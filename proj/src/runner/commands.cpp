#include "levelrate/runner/commands.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <mutex>
#include <random>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "levelrate/errors.hpp"
#include "levelrate/optimizer.hpp"
#include "levelrate/runner/artifacts.hpp"
#include "levelrate/stability.hpp"
#include "levelrate/topology.hpp"

namespace levelrate::runner {
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct Outcome {
  std::string status = "completed";
  std::string message;
  int exit_code = kExitOk;
  std::vector<std::string> artifacts;
};

/// Creates the run directory, runs `body`, maps exceptions to exit codes and
/// always leaves a manifest behind.
int execute(const ExperimentConfig& cfg, const char* command, std::ostream& log,
            const std::function<Outcome(const fs::path&)>& body) {
  const fs::path dir(cfg.output_dir);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) {
    log << command << ": cannot create output directory '" << dir.string() << "': " << ec.message() << "\n";
    return kExitRuntime;
  }
  RunManifest manifest;
  manifest.command = command;
  manifest.config = to_json(cfg);
  manifest.version = version_string();
  manifest.started_at = utc_now();

  Outcome outcome;
  try {
    outcome = body(dir);
  } catch (const ConfigError& e) {
    outcome = {"error", e.what(), kExitConfig, {}};
  } catch (const DataError& e) {
    outcome = {"error", e.what(), kExitConfig, {}};
  } catch (const std::exception& e) {
    outcome = {"error", e.what(), kExitRuntime, {}};
  }
  if (outcome.status == "error") log << command << ": error: " << outcome.message << "\n";

  manifest.finished_at = utc_now();
  manifest.status = outcome.status;
  manifest.message = outcome.message;
  manifest.exit_code = outcome.exit_code;
  manifest.artifacts = outcome.artifacts;
  try {
    write_manifest(dir, manifest);
  } catch (const std::exception& e) {
    log << command << ": cannot write manifest: " << e.what() << "\n";
    return kExitRuntime;
  }
  return outcome.exit_code;
}

Objective named_objective(const ObjectiveSpec& o) {
  if (o.name == "quadratic") return quadratic(o.dim);
  if (o.name == "rosenbrock") return rosenbrock();
  if (o.name == "himmelblau") return himmelblau();
  throw ConfigError("objective '" + o.name + "' is not a closed-form fixture");
}

ParamVector uniform_point(const Box& box, std::mt19937_64& rng) {
  std::vector<double> x(box.dim());
  for (std::size_t i = 0; i < x.size(); ++i) {
    std::uniform_real_distribution<double> u(box.lo[i], box.hi[i]);
    x[i] = u(rng);
  }
  return ParamVector(std::move(x));
}

Dataset mlp_dataset(const ExperimentConfig& cfg) {
  if (!cfg.objective.dataset_path.empty()) return load_dataset(cfg.objective.dataset_path);
  SyntheticSpec spec = cfg.objective.synthetic;
  spec.seed = cfg.seed;
  return make_imbalanced_blobs(spec);
}

std::string histogram_text(const Dataset& ds) {
  std::string s = "{";
  bool first = true;
  for (const auto& [label, count] : class_histogram(ds)) {
    if (!first) s += ", ";
    first = false;
    s += std::to_string(label) + ":" + std::to_string(count);
  }
  return s + "}";
}

/// The cost the optimizer sees at epoch t for the 2-D topology slice.
Objective topology_objective(const ExperimentConfig& cfg, const Problem& p) {
  if (p.objective.dim == 2) return p.objective;
  return slice_2d(p.objective, p.x0, cfg.objective.slice_i, cfg.objective.slice_j);
}

}  // namespace

Problem build_problem(const ExperimentConfig& cfg, std::ostream& log) {
  Problem p{};
  p.risk = cfg.risk;
  if (cfg.objective.name != "mlp") {
    p.objective = named_objective(cfg.objective);
    if (cfg.x0) {
      p.x0 = ParamVector(*cfg.x0);
    } else {
      std::mt19937_64 rng(cfg.seed);
      p.x0 = uniform_point(p.objective.domain, rng);
    }
    return p;
  }

  Dataset data = mlp_dataset(cfg);
  log << "dataset: " << data.size() << " rows, " << data.num_features << " features, classes "
      << histogram_text(data) << "\n";
  const MlpShape shape{data.num_features, cfg.objective.hidden, std::max<std::size_t>(data.num_classes, 2)};
  data.num_classes = shape.classes;
  if (p.risk.class_weights.empty()) p.risk.class_weights = inverse_frequency_weights(data);
  if (p.risk.class_weights.size() < shape.classes) {
    throw ConfigError("risk.class_weights has " + std::to_string(p.risk.class_weights.size()) +
                      " entries, dataset has " + std::to_string(shape.classes) + " classes");
  }
  if (!p.risk.robustness.empty() && p.risk.robustness.size() != data.size()) {
    throw ConfigError("risk.robustness has " + std::to_string(p.risk.robustness.size()) + " entries, dataset has " +
                      std::to_string(data.size()) + " rows");
  }
  p.risk.validate();
  if (cfg.x0) {
    if (cfg.x0->size() != shape.num_params()) {
      throw ConfigError("x0 has length " + std::to_string(cfg.x0->size()) + ", mlp has " +
                        std::to_string(shape.num_params()) + " parameters");
    }
    p.x0 = ParamVector(*cfg.x0);
  } else {
    p.x0 = mlp_init(shape, cfg.seed);
  }
  if (cfg.objective.slice_i >= shape.num_params() || cfg.objective.slice_j >= shape.num_params()) {
    throw ConfigError("objective.slice index out of range for " + std::to_string(shape.num_params()) + " parameters");
  }
  p.objective = regularized_risk_objective(shape, data, p.risk);
  p.shape = shape;
  p.data = std::move(data);
  return p;
}

int run_optimize(const ExperimentConfig& cfg, std::ostream& log) {
  return execute(cfg, "optimize", log, [&](const fs::path& dir) {
    const Problem p = build_problem(cfg, log);
    TrainingOptions opts;
    if (p.risk.kappa > 0.0) {
      const double kappa = p.risk.kappa, delta = p.risk.delta;
      opts.modulation = [kappa, delta](double t) { return temporal_modulation(t, kappa, delta); };
    }
    const TrainingResult result = run_training(p.objective, cfg.method, cfg.steps, p.x0, opts);
    Outcome out;

    std::ostringstream csv;
    write_trajectory_csv(csv, result.trajectory);
    write_file_atomic(dir / "trajectory.csv", csv.str());
    out.artifacts.push_back("trajectory.csv");

    json stability;
    if (result.trajectory.size() >= 2) {
      StabilityReport report = check_monotone(result.trajectory, cfg.monotone_tol);
      if (cfg.boundedness) {
        require_same_size(cfg.boundedness->x_star.size(), p.objective.dim, "boundedness.x_star");
        report.bounded_checked = true;
        report.bound_delta = cfg.boundedness->delta;
        report.bound_epsilon = cfg.boundedness->epsilon;
        report.bounded = boundedness_check(result.trajectory, ParamVector(cfg.boundedness->x_star),
                                           cfg.boundedness->delta, cfg.boundedness->epsilon);
      }
      stability = to_json(report, cfg.monotone_tol);
    } else {
      stability = {{"steps_checked", 0}, {"monotone", nullptr}, {"boundedness", nullptr}};
    }
    double max_lyap = -HUGE_VAL;
    for (const auto& s : result.trajectory.steps) max_lyap = std::max(max_lyap, s.lyapunov_rate);
    stability["max_lyapunov_rate"] = max_lyap;
    write_file_atomic(dir / "stability.json", stability.dump(2) + "\n");
    out.artifacts.push_back("stability.json");

    if (result.status == RunStatus::Diverged) {
      out.status = "diverged";
      out.message = result.message;
      out.exit_code = kExitCheckFailed;
      log << "optimize: " << result.message << "\n";
    } else {
      log << "optimize: " << result.trajectory.size() << " records, final loss "
          << format_double(result.trajectory.back().loss) << "\n";
    }
    return out;
  });
}

int run_topology(const ExperimentConfig& cfg, std::ostream& log) {
  return execute(cfg, "topology", log, [&](const fs::path& dir) {
    const Problem p = build_problem(cfg, log);
    const TopologySpec& ts = cfg.topology;
    const Objective reg2d = topology_objective(cfg, p);
    const GridField field = sample_grid(reg2d, ts.box, ts.nx, ts.ny);

    Outcome out;
    std::ostringstream grid_csv;
    write_grid_csv(grid_csv, field);
    write_file_atomic(dir / "grid.csv", grid_csv.str());
    out.artifacts.push_back("grid.csv");

    const double lo = field.min(), hi = field.max();
    const std::vector<double> lambdas = ts.lambdas.empty() ? interior_levels(lo, hi, ts.lambda_count) : ts.lambdas;
    json sweeps = json::array();
    for (Direction d : ts.directions) {
      json s = to_json(lambda_sweep(field, lambdas, d, ts.adjacency));
      s["direction"] = to_string(d);
      sweeps.push_back(std::move(s));
    }

    std::function<Objective(double)> dynamic_at;
    if (p.shape) {
      dynamic_at = [&](double t) {
        const Objective full = dynamic_cost_objective(*p.shape, *p.data, p.risk, t);
        return slice_2d(full, p.x0, cfg.objective.slice_i, cfg.objective.slice_j);
      };
    }
    const double gamma_max = 1.0 + p.risk.kappa;
    const std::vector<double> equi_lambdas = interior_levels(lo, hi * gamma_max, ts.equi_lambda_count);
    const GridSpec grid{ts.box, ts.nx, ts.ny, ts.adjacency};
    const EquiconnectednessReport equi = equiconnectedness_check(reg2d, p.risk.kappa, p.risk.delta, ts.t_list,
                                                                 equi_lambdas, grid, ts.directions, dynamic_at);
    json equi_json = to_json(equi);
    equi_json["kappa"] = p.risk.kappa;
    equi_json["delta"] = p.risk.delta;
    equi_json["t_list"] = ts.t_list;

    json report = {{"objective", reg2d.name},
                   {"grid",
                    {{"box", {ts.box.x_lo, ts.box.x_hi, ts.box.y_lo, ts.box.y_hi}}, {"nx", ts.nx}, {"ny", ts.ny}}},
                   {"field_min", lo},
                   {"field_max", hi},
                   {"sweeps", sweeps},
                   {"equiconnectedness", equi_json}};
    write_file_atomic(dir / "connectivity.json", report.dump(2) + "\n");
    out.artifacts.push_back("connectivity.json");

    if (!equi.mismatches.empty()) {
      out.exit_code = kExitCheckFailed;
      out.message = std::to_string(equi.mismatches.size()) + " equiconnectedness mismatch(es)";
      log << "topology: " << out.message << "\n";
    }
    return out;
  });
}

std::vector<GradTarget> builtin_grad_targets(const ExperimentConfig& cfg) {
  const GradcheckSpec& gs = cfg.gradcheck;
  std::mt19937_64 rng(cfg.seed);
  std::vector<GradTarget> targets;

  auto fixture = [&](Objective obj, double h, double tol) {
    GradTarget t{obj.name, obj, {}, h, tol};
    for (std::size_t k = 0; k < gs.points; ++k) t.points.push_back(uniform_point(obj.domain, rng));
    targets.push_back(std::move(t));
  };
  const std::size_t qdim = cfg.objective.name == "quadratic" ? cfg.objective.dim : 2;
  fixture(quadratic(qdim), 1e-5, gs.quadratic_tolerance);
  fixture(rosenbrock(), gs.h, gs.tolerance);
  fixture(himmelblau(), gs.h, gs.tolerance);

  Dataset data;
  if (cfg.objective.name == "mlp") {
    data = mlp_dataset(cfg);
  } else {
    data = make_imbalanced_blobs(SyntheticSpec{64, 0.25, 2.0, 1.0, cfg.seed});
  }
  const MlpShape shape{data.num_features, cfg.objective.hidden, std::max<std::size_t>(data.num_classes, 2)};
  data.num_classes = shape.classes;

  // Central differences on the MLP use h = 1e-5; smaller steps lose digits
  // to cancellation in the summed cross-entropy.
  constexpr double kMlpStep = 1e-5;
  // A difference stencil that straddles a ReLU kink measures neither
  // one-sided slope, so points with some |z1| this small are redrawn.
  constexpr double kKinkMargin = 1e-3;
  constexpr int kMaxDraws = 10000;

  std::vector<ParamVector> mlp_points;
  int draws = 0;
  while (mlp_points.size() < gs.points) {
    if (++draws > kMaxDraws) throw NumericalError("gradcheck: no MLP point found away from ReLU kinks");
    ParamVector theta = mlp_init(shape, rng(), 1.0);
    if (mlp_relu_margin(shape, theta, data) >= kKinkMargin) mlp_points.push_back(std::move(theta));
  }
  targets.push_back({"mlp_cross_entropy", mlp_objective(shape, data), mlp_points, kMlpStep, gs.tolerance});

  RiskConfig risk;
  risk.class_weights = inverse_frequency_weights(data);
  std::uniform_real_distribution<double> conf(0.5, 1.0);
  for (std::size_t i = 0; i < data.size(); ++i) risk.robustness.push_back(conf(rng));
  risk.reg_kind = RegKind::L2;
  risk.reg_strength = 0.01;
  risk.kappa = 1.0;
  risk.delta = 0.5;
  targets.push_back({"mlp_dynamic_cost", dynamic_cost_objective(shape, data, risk, 1.0), mlp_points, kMlpStep,
                     gs.tolerance});

  const PriorSpec prior{PriorSpec::Kind::Gaussian, 0.1};
  auto shared = std::make_shared<const Dataset>(data);
  Objective nlp{"neg_log_posterior", shape.num_params(), Box::cube(shape.num_params(), -6.0, 6.0),
                [shape, shared, prior](const ParamVector& th) { return neg_log_posterior(shape, th, *shared, prior).value; },
                [shape, shared, prior](const ParamVector& th) { return neg_log_posterior(shape, th, *shared, prior).grad; }};
  targets.push_back({"neg_log_posterior", nlp, mlp_points, kMlpStep, gs.tolerance});
  return targets;
}

int run_gradcheck(const ExperimentConfig& cfg, std::ostream& log, const std::vector<GradTarget>& extra) {
  return execute(cfg, "gradcheck", log, [&](const fs::path& dir) {
    std::vector<GradTarget> targets = builtin_grad_targets(cfg);
    targets.insert(targets.end(), extra.begin(), extra.end());
    json entries = json::array();
    std::vector<std::string> offenders;
    for (const auto& t : targets) {
      double worst = 0.0;
      std::size_t worst_k = 0;
      for (std::size_t k = 0; k < t.points.size(); ++k) {
        const ParamVector analytic = t.objective.gradient(t.points[k]);
        const ParamVector numeric = finite_diff_grad(t.objective, t.points[k], t.h);
        const double err = gradient_rel_error(analytic, numeric);
        if (!(err <= worst)) {
          worst = err;
          worst_k = k;
        }
      }
      const bool passed = worst <= t.tolerance;
      if (!passed) offenders.push_back(t.name);
      entries.push_back({{"name", t.name},
                         {"points", t.points.size()},
                         {"h", t.h},
                         {"tolerance", t.tolerance},
                         {"max_rel_error", worst},
                         {"worst_point", worst_k},
                         {"passed", passed}});
      log << "gradcheck: " << t.name << " max rel. error " << format_double(worst) << (passed ? "" : "  FAILED")
          << "\n";
    }
    Outcome out;
    const json report = {{"targets", entries}, {"all_passed", offenders.empty()}};
    write_file_atomic(dir / "gradcheck.json", report.dump(2) + "\n");
    out.artifacts.push_back("gradcheck.json");
    if (!offenders.empty()) {
      out.exit_code = kExitCheckFailed;
      out.message = "gradient check failed for:";
      for (const auto& name : offenders) out.message += " " + name;
      log << "gradcheck: " << out.message << "\n";
    }
    return out;
  });
}

int run_report(const std::vector<std::string>& dirs, const std::string& out_path, std::ostream& log) {
  std::vector<fs::path> run_dirs;
  for (const auto& d : dirs) {
    const fs::path p(d);
    if (fs::exists(p / kManifestName)) {
      run_dirs.push_back(p);
      continue;
    }
    if (!fs::is_directory(p)) {
      log << "report: '" << d << "' is not a directory\n";
      return kExitConfig;
    }
    std::vector<fs::path> children;
    for (const auto& entry : fs::directory_iterator(p)) {
      if (entry.is_directory() && fs::exists(entry.path() / kManifestName)) children.push_back(entry.path());
    }
    std::sort(children.begin(), children.end());
    run_dirs.insert(run_dirs.end(), children.begin(), children.end());
  }

  json runs = json::array();
  std::map<std::string, std::size_t> totals{{"completed", 0}, {"diverged", 0}, {"error", 0}};
  int rc = run_dirs.empty() ? kExitCheckFailed : kExitOk;
  for (const auto& dir : run_dirs) {
    try {
      const RunManifest m = read_manifest(dir);
      json entry = {{"dir", dir.string()},     {"command", m.command},   {"status", m.status},
                    {"exit_code", m.exit_code}, {"version", m.version},   {"started_at", m.started_at},
                    {"finished_at", m.finished_at}, {"message", m.message}};
      if (m.command == "optimize" && fs::exists(dir / "trajectory.csv")) {
        std::ifstream in(dir / "trajectory.csv");
        const Trajectory traj = read_trajectory_csv(in);
        if (!traj.empty()) {
          entry["records"] = traj.size();
          entry["initial_loss"] = traj.front().loss;
          entry["final_loss"] = traj.back().loss;
        }
      }
      ++totals[m.status];
      runs.push_back(std::move(entry));
    } catch (const std::exception& e) {
      log << "report: skipping '" << dir.string() << "': " << e.what() << "\n";
      rc = kExitCheckFailed;
    }
  }
  const json summary = {{"runs", runs}, {"totals", totals}, {"version", version_string()}};
  try {
    const fs::path out(out_path);
    if (out.has_parent_path()) fs::create_directories(out.parent_path());
    write_file_atomic(out, summary.dump(2) + "\n");
  } catch (const std::exception& e) {
    log << "report: " << e.what() << "\n";
    return kExitRuntime;
  }
  if (run_dirs.empty()) log << "report: no manifests found\n";
  return rc;
}

int run_sweep(const std::vector<ExperimentConfig>& configs, unsigned jobs,
              const std::function<int(const ExperimentConfig&, std::ostream&)>& fn, std::ostream& log) {
  std::atomic<std::size_t> next{0};
  std::atomic<int> worst{kExitOk};
  std::mutex log_mutex;
  auto worker = [&] {
    for (std::size_t k = next++; k < configs.size(); k = next++) {
      std::ostringstream local;
      const int rc = fn(configs[k], local);
      int prev = worst.load();
      while (rc > prev && !worst.compare_exchange_weak(prev, rc)) {
      }
      const std::lock_guard lock(log_mutex);
      log << "[" << configs[k].output_dir << "]\n" << local.str();
    }
  };
  jobs = std::max(1u, std::min<unsigned>(jobs, static_cast<unsigned>(configs.size())));
  {
    std::vector<std::jthread> pool;
    for (unsigned w = 1; w < jobs; ++w) pool.emplace_back(worker);
    worker();
  }
  return worst.load();
}

}  // namespace levelrate::runner
