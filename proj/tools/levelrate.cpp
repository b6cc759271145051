// levelrate: command-line driver for optimization runs, level-set topology
// sweeps and gradient checks.

#include <filesystem>
#include <iostream>
#include <optional>
#include <set>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>

#include "levelrate/errors.hpp"
#include "levelrate/runner/artifacts.hpp"
#include "levelrate/runner/commands.hpp"
#include "levelrate/runner/config.hpp"

namespace {

namespace lr = levelrate::runner;

struct CommonFlags {
  std::vector<std::string> configs;
  std::optional<std::string> out;
  std::optional<std::size_t> steps;
  std::optional<std::uint64_t> seed;
  unsigned jobs = 1;
};

void add_common(CLI::App* cmd, CommonFlags& f, bool with_steps) {
  cmd->add_option("-c,--config", f.configs, "JSON config file (repeat for a sweep)");
  cmd->add_option("-o,--out", f.out, "Output directory (overrides LEVELRATE_OUT and the config)");
  if (with_steps) cmd->add_option("--steps", f.steps, "Number of optimization steps");
  cmd->add_option("--seed", f.seed, "Random seed");
  cmd->add_option("-j,--jobs", f.jobs, "Parallel runs when several configs are given")->check(CLI::PositiveNumber);
}

/// Loads every config and applies overrides. When several configs would
/// share an output directory, each run gets a subdirectory named after its
/// config file.
std::optional<std::vector<lr::ExperimentConfig>> resolve(const CommonFlags& f) {
  std::vector<lr::ExperimentConfig> out;
  try {
    if (f.configs.empty()) {
      lr::ExperimentConfig cfg;
      lr::apply_overrides(cfg, {f.out, f.steps, f.seed});
      out.push_back(cfg);
      return out;
    }
    for (const auto& path : f.configs) {
      lr::ExperimentConfig cfg = lr::load_config(path);
      lr::apply_overrides(cfg, {f.out, f.steps, f.seed});
      out.push_back(std::move(cfg));
    }
    std::set<std::string> dirs;
    for (const auto& cfg : out) dirs.insert(cfg.output_dir);
    if (dirs.size() < out.size()) {
      for (std::size_t k = 0; k < out.size(); ++k) {
        out[k].output_dir =
            (std::filesystem::path(out[k].output_dir) / std::filesystem::path(f.configs[k]).stem()).string();
      }
    }
  } catch (const levelrate::Error& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return std::nullopt;
  }
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"levelrate: dynamic learning rates, Lyapunov monitoring and level-set connectivity"};
  app.require_subcommand(1);
  app.set_version_flag("--version", lr::version_string());

  CommonFlags opt_flags, topo_flags, grad_flags;
  auto* optimize = app.add_subcommand("optimize", "Run an optimizer and write trajectory.csv, stability.json");
  add_common(optimize, opt_flags, true);
  auto* topology = app.add_subcommand("topology", "Sample a 2-D landscape and sweep level-set connectivity");
  add_common(topology, topo_flags, false);
  auto* gradcheck = app.add_subcommand("gradcheck", "Check analytic gradients against finite differences");
  add_common(gradcheck, grad_flags, false);

  std::vector<std::string> report_dirs;
  std::string report_out = "summary.json";
  auto* report = app.add_subcommand("report", "Aggregate run manifests into one summary JSON");
  report->add_option("dirs", report_dirs, "Run directories, or parents of run directories")->required();
  report->add_option("-o,--out", report_out, "Summary file");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : lr::kExitConfig;
  }

  auto dispatch = [](const CommonFlags& f, const std::function<int(const lr::ExperimentConfig&, std::ostream&)>& fn) {
    const auto configs = resolve(f);
    if (!configs) return static_cast<int>(lr::kExitConfig);
    if (configs->size() == 1) return fn(configs->front(), std::cerr);
    return lr::run_sweep(*configs, f.jobs, fn, std::cerr);
  };

  if (optimize->parsed()) {
    return dispatch(opt_flags, [](const auto& c, std::ostream& log) { return lr::run_optimize(c, log); });
  }
  if (topology->parsed()) {
    return dispatch(topo_flags, [](const auto& c, std::ostream& log) { return lr::run_topology(c, log); });
  }
  if (gradcheck->parsed()) {
    return dispatch(grad_flags, [](const auto& c, std::ostream& log) { return lr::run_gradcheck(c, log); });
  }
  return lr::run_report(report_dirs, report_out, std::cerr);
}
