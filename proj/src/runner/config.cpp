#include "levelrate/runner/config.hpp"

#include <cstdlib>
#include <fstream>
#include <initializer_list>
#include <set>
#include <string>

#include "levelrate/errors.hpp"

namespace levelrate::runner {
namespace {

using nlohmann::json;

void require_object(const json& j, const std::string& where, std::initializer_list<const char*> allowed) {
  if (!j.is_object()) throw ConfigError(where + ": expected a JSON object");
  const std::set<std::string> keys(allowed.begin(), allowed.end());
  for (const auto& [key, value] : j.items()) {
    if (!keys.contains(key)) throw ConfigError(where + ": unknown key '" + key + "'");
  }
}

std::string path_of(const std::string& where, const char* key) {
  return where.empty() ? std::string(key) : where + "." + key;
}

double get_number(const json& j, const char* key, double fallback, const std::string& where) {
  if (!j.contains(key)) return fallback;
  const json& v = j.at(key);
  if (!v.is_number()) throw ConfigError(path_of(where, key) + ": expected a number");
  return v.get<double>();
}

std::size_t get_count(const json& j, const char* key, std::size_t fallback, const std::string& where) {
  if (!j.contains(key)) return fallback;
  const json& v = j.at(key);
  if (!v.is_number_integer() || v.get<long long>() < 0) {
    throw ConfigError(path_of(where, key) + ": expected a non-negative integer");
  }
  return v.get<std::size_t>();
}

std::string get_string(const json& j, const char* key, const std::string& fallback, const std::string& where) {
  if (!j.contains(key)) return fallback;
  const json& v = j.at(key);
  if (!v.is_string()) throw ConfigError(path_of(where, key) + ": expected a string");
  return v.get<std::string>();
}

std::vector<double> get_numbers(const json& j, const char* key, const std::string& where) {
  const json& v = j.at(key);
  if (!v.is_array()) throw ConfigError(path_of(where, key) + ": expected an array of numbers");
  std::vector<double> out;
  for (const auto& e : v) {
    if (!e.is_number()) throw ConfigError(path_of(where, key) + ": expected an array of numbers");
    out.push_back(e.get<double>());
  }
  return out;
}

Direction parse_direction(const std::string& s) {
  if (s == "super") return Direction::Super;
  if (s == "sub") return Direction::Sub;
  throw ConfigError("topology.directions: expected 'super' or 'sub', got '" + s + "'");
}

MethodKind parse_method_kind(const std::string& s) {
  if (s == "fixed") return MethodKind::Fixed;
  if (s == "exp_decay") return MethodKind::ExpDecay;
  if (s == "adaptive") return MethodKind::Adaptive;
  if (s == "tuner") return MethodKind::Tuner;
  throw ConfigError("method.kind: expected fixed, exp_decay, adaptive or tuner, got '" + s + "'");
}

void parse_objective(const json& j, ObjectiveSpec& o) {
  require_object(j, "objective", {"name", "dim", "dataset", "synthetic", "hidden", "slice"});
  o.name = get_string(j, "name", o.name, "objective");
  if (o.name != "quadratic" && o.name != "rosenbrock" && o.name != "himmelblau" && o.name != "mlp") {
    throw ConfigError("objective.name: unknown objective '" + o.name + "'");
  }
  o.dim = get_count(j, "dim", o.dim, "objective");
  if (o.dim == 0) throw ConfigError("objective.dim must be >= 1");
  if (j.contains("dim") && o.name != "quadratic") throw ConfigError("objective.dim applies to quadratic only");
  o.dataset_path = get_string(j, "dataset", o.dataset_path, "objective");
  if (j.contains("synthetic")) {
    const json& s = j.at("synthetic");
    require_object(s, "objective.synthetic", {"n", "minority_fraction", "separation", "stddev"});
    o.synthetic.n = get_count(s, "n", o.synthetic.n, "objective.synthetic");
    o.synthetic.minority_fraction =
        get_number(s, "minority_fraction", o.synthetic.minority_fraction, "objective.synthetic");
    o.synthetic.separation = get_number(s, "separation", o.synthetic.separation, "objective.synthetic");
    o.synthetic.stddev = get_number(s, "stddev", o.synthetic.stddev, "objective.synthetic");
  }
  o.hidden = get_count(j, "hidden", o.hidden, "objective");
  if (o.hidden == 0) throw ConfigError("objective.hidden must be >= 1");
  if (j.contains("slice")) {
    const auto s = get_numbers(j, "slice", "objective");
    if (s.size() != 2 || s[0] < 0 || s[1] < 0 || s[0] == s[1]) {
      throw ConfigError("objective.slice: expected two distinct non-negative indices");
    }
    o.slice_i = static_cast<std::size_t>(s[0]);
    o.slice_j = static_cast<std::size_t>(s[1]);
  }
  if (o.name != "mlp" && (j.contains("dataset") || j.contains("synthetic") || j.contains("hidden"))) {
    throw ConfigError("objective: dataset/synthetic/hidden apply to mlp only");
  }
}

void parse_method(const json& j, Method& m) {
  require_object(j, "method", {"kind", "rate", "alpha0", "beta", "tuner"});
  m.kind = parse_method_kind(get_string(j, "kind", to_string(m.kind), "method"));
  m.fixed_rate = get_number(j, "rate", m.fixed_rate, "method");
  m.schedule.initial_rate = get_number(j, "alpha0", m.schedule.initial_rate, "method");
  m.schedule.decay = get_number(j, "beta", m.schedule.decay, "method");
  if (j.contains("tuner")) {
    const json& t = j.at("tuner");
    require_object(t, "method.tuner", {"betas", "lambda", "s_init", "eps"});
    if (t.contains("betas")) m.tuner.betas = get_numbers(t, "betas", "method.tuner");
    m.tuner.lambda = get_number(t, "lambda", m.tuner.lambda, "method.tuner");
    m.tuner.s_init = get_number(t, "s_init", m.tuner.s_init, "method.tuner");
    m.tuner.eps = get_number(t, "eps", m.tuner.eps, "method.tuner");
  }
  if (!(m.fixed_rate > 0.0)) throw ConfigError("method.rate must be > 0");
  try {
    m.schedule.validate();
  } catch (const ParameterError& e) {
    throw ConfigError(std::string("method: ") + e.what());
  }
  m.tuner.validate();
}

void parse_risk(const json& j, RiskConfig& r) {
  require_object(j, "risk", {"class_weights", "robustness", "reg_kind", "reg_strength", "kappa", "delta"});
  if (j.contains("class_weights")) r.class_weights = get_numbers(j, "class_weights", "risk");
  if (j.contains("robustness")) r.robustness = get_numbers(j, "robustness", "risk");
  const std::string kind = get_string(j, "reg_kind", r.reg_kind == RegKind::L1 ? "L1" : "L2", "risk");
  if (kind == "L1") {
    r.reg_kind = RegKind::L1;
  } else if (kind == "L2") {
    r.reg_kind = RegKind::L2;
  } else {
    throw ConfigError("risk.reg_kind: expected L1 or L2");
  }
  r.reg_strength = get_number(j, "reg_strength", r.reg_strength, "risk");
  r.kappa = get_number(j, "kappa", r.kappa, "risk");
  r.delta = get_number(j, "delta", r.delta, "risk");
  r.validate();
}

void parse_topology(const json& j, TopologySpec& t) {
  require_object(j, "topology",
                 {"box", "nx", "ny", "adjacency", "directions", "lambdas", "lambda_count", "t_list", "equi_lambda_count"});
  if (j.contains("box")) {
    const auto b = get_numbers(j, "box", "topology");
    if (b.size() != 4) throw ConfigError("topology.box: expected [x_lo, x_hi, y_lo, y_hi]");
    t.box = Box2{b[0], b[1], b[2], b[3]};
    try {
      t.box.validate();
    } catch (const ParameterError& e) {
      throw ConfigError(std::string("topology.box: ") + e.what());
    }
  }
  t.nx = get_count(j, "nx", t.nx, "topology");
  t.ny = get_count(j, "ny", t.ny, "topology");
  if (t.nx < 2 || t.ny < 2) throw ConfigError("topology.nx and topology.ny must be >= 2");
  const std::size_t adj = get_count(j, "adjacency", static_cast<std::size_t>(t.adjacency), "topology");
  if (adj != 4 && adj != 8) throw ConfigError("topology.adjacency must be 4 or 8");
  t.adjacency = adj == 4 ? Adjacency::Four : Adjacency::Eight;
  if (j.contains("directions")) {
    const json& d = j.at("directions");
    if (!d.is_array() || d.empty()) throw ConfigError("topology.directions: expected a non-empty array");
    t.directions.clear();
    for (const auto& e : d) {
      if (!e.is_string()) throw ConfigError("topology.directions: expected strings");
      t.directions.push_back(parse_direction(e.get<std::string>()));
    }
  }
  if (j.contains("lambdas")) {
    t.lambdas = get_numbers(j, "lambdas", "topology");
    if (t.lambdas.empty()) throw ConfigError("topology.lambdas must not be empty");
  }
  t.lambda_count = get_count(j, "lambda_count", t.lambda_count, "topology");
  if (t.lambda_count == 0) throw ConfigError("topology.lambda_count must be >= 1");
  if (j.contains("t_list")) {
    t.t_list = get_numbers(j, "t_list", "topology");
    for (double v : t.t_list) {
      if (!(v >= 0.0)) throw ConfigError("topology.t_list entries must be >= 0");
    }
    if (t.t_list.empty()) throw ConfigError("topology.t_list must not be empty");
  }
  t.equi_lambda_count = get_count(j, "equi_lambda_count", t.equi_lambda_count, "topology");
  if (t.equi_lambda_count == 0) throw ConfigError("topology.equi_lambda_count must be >= 1");
}

void parse_gradcheck(const json& j, GradcheckSpec& g) {
  require_object(j, "gradcheck", {"points", "h", "tolerance", "quadratic_tolerance"});
  g.points = get_count(j, "points", g.points, "gradcheck");
  g.h = get_number(j, "h", g.h, "gradcheck");
  g.tolerance = get_number(j, "tolerance", g.tolerance, "gradcheck");
  g.quadratic_tolerance = get_number(j, "quadratic_tolerance", g.quadratic_tolerance, "gradcheck");
  if (g.points == 0 || !(g.h > 0.0) || !(g.tolerance > 0.0) || !(g.quadratic_tolerance > 0.0)) {
    throw ConfigError("gradcheck: points, h and tolerances must be positive");
  }
}

}  // namespace

ExperimentConfig parse_config(const json& j) {
  require_object(j, "config",
                 {"objective", "method", "risk", "steps", "seed", "x0", "output_dir", "monotone_tol", "boundedness",
                  "topology", "gradcheck"});
  ExperimentConfig cfg;
  if (j.contains("objective")) parse_objective(j.at("objective"), cfg.objective);
  if (j.contains("method")) parse_method(j.at("method"), cfg.method);
  if (j.contains("risk")) parse_risk(j.at("risk"), cfg.risk);
  cfg.steps = get_count(j, "steps", cfg.steps, "");
  if (cfg.steps < 1) throw ConfigError("steps must be >= 1");
  if (j.contains("seed")) {
    const json& s = j.at("seed");
    if (!s.is_number_unsigned() && !(s.is_number_integer() && s.get<long long>() >= 0)) {
      throw ConfigError("seed: expected a non-negative integer");
    }
    cfg.seed = s.get<std::uint64_t>();
  }
  if (j.contains("x0")) {
    cfg.x0 = get_numbers(j, "x0", "");
    if (cfg.x0->empty()) throw ConfigError("x0 must not be empty");
  }
  cfg.output_dir = get_string(j, "output_dir", cfg.output_dir, "");
  cfg.monotone_tol = get_number(j, "monotone_tol", cfg.monotone_tol, "");
  if (!(cfg.monotone_tol >= 0.0)) throw ConfigError("monotone_tol must be >= 0");
  if (j.contains("boundedness")) {
    const json& b = j.at("boundedness");
    require_object(b, "boundedness", {"x_star", "delta", "epsilon"});
    BoundednessSpec spec;
    if (!b.contains("x_star")) throw ConfigError("boundedness.x_star is required");
    spec.x_star = get_numbers(b, "x_star", "boundedness");
    spec.delta = get_number(b, "delta", spec.delta, "boundedness");
    spec.epsilon = get_number(b, "epsilon", spec.epsilon, "boundedness");
    if (!(spec.delta > 0.0) || !(spec.epsilon > 0.0)) {
      throw ConfigError("boundedness.delta and boundedness.epsilon must be > 0");
    }
    cfg.boundedness = spec;
  }
  if (j.contains("topology")) parse_topology(j.at("topology"), cfg.topology);
  if (j.contains("gradcheck")) parse_gradcheck(j.at("gradcheck"), cfg.gradcheck);

  if (cfg.objective.name == "rosenbrock" || cfg.objective.name == "himmelblau") cfg.objective.dim = 2;
  if (cfg.x0 && cfg.objective.name != "mlp" && cfg.x0->size() != cfg.objective.dim) {
    throw ConfigError("x0 has length " + std::to_string(cfg.x0->size()) + ", objective needs " +
                      std::to_string(cfg.objective.dim));
  }
  if (cfg.objective.name != "mlp" && (!cfg.risk.robustness.empty() || !cfg.risk.class_weights.empty())) {
    throw ConfigError("risk.class_weights and risk.robustness apply to mlp only");
  }
  return cfg;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config '" + path + "'");
  json j;
  try {
    in >> j;
  } catch (const json::parse_error& e) {
    throw ConfigError("config '" + path + "' is not valid JSON: " + e.what());
  }
  return parse_config(j);
}

json to_json(const ExperimentConfig& cfg) {
  json j;
  json obj = {{"name", cfg.objective.name}};
  if (cfg.objective.name == "quadratic") obj["dim"] = cfg.objective.dim;
  if (cfg.objective.name == "mlp") {
    if (!cfg.objective.dataset_path.empty()) obj["dataset"] = cfg.objective.dataset_path;
    obj["synthetic"] = {{"n", cfg.objective.synthetic.n},
                        {"minority_fraction", cfg.objective.synthetic.minority_fraction},
                        {"separation", cfg.objective.synthetic.separation},
                        {"stddev", cfg.objective.synthetic.stddev}};
    obj["hidden"] = cfg.objective.hidden;
    obj["slice"] = {cfg.objective.slice_i, cfg.objective.slice_j};
  }
  j["objective"] = obj;
  j["method"] = {{"kind", to_string(cfg.method.kind)},
                 {"rate", cfg.method.fixed_rate},
                 {"alpha0", cfg.method.schedule.initial_rate},
                 {"beta", cfg.method.schedule.decay},
                 {"tuner",
                  {{"betas", cfg.method.tuner.betas},
                   {"lambda", cfg.method.tuner.lambda},
                   {"s_init", cfg.method.tuner.s_init},
                   {"eps", cfg.method.tuner.eps}}}};
  j["risk"] = {{"class_weights", cfg.risk.class_weights},
               {"robustness", cfg.risk.robustness},
               {"reg_kind", cfg.risk.reg_kind == RegKind::L1 ? "L1" : "L2"},
               {"reg_strength", cfg.risk.reg_strength},
               {"kappa", cfg.risk.kappa},
               {"delta", cfg.risk.delta}};
  j["steps"] = cfg.steps;
  j["seed"] = cfg.seed;
  if (cfg.x0) j["x0"] = *cfg.x0;
  j["output_dir"] = cfg.output_dir;
  j["monotone_tol"] = cfg.monotone_tol;
  if (cfg.boundedness) {
    j["boundedness"] = {{"x_star", cfg.boundedness->x_star},
                        {"delta", cfg.boundedness->delta},
                        {"epsilon", cfg.boundedness->epsilon}};
  }
  json dirs = json::array();
  for (Direction d : cfg.topology.directions) dirs.push_back(to_string(d));
  j["topology"] = {{"box", {cfg.topology.box.x_lo, cfg.topology.box.x_hi, cfg.topology.box.y_lo, cfg.topology.box.y_hi}},
                   {"nx", cfg.topology.nx},
                   {"ny", cfg.topology.ny},
                   {"adjacency", static_cast<int>(cfg.topology.adjacency)},
                   {"directions", dirs},
                   {"lambda_count", cfg.topology.lambda_count},
                   {"t_list", cfg.topology.t_list},
                   {"equi_lambda_count", cfg.topology.equi_lambda_count}};
  if (!cfg.topology.lambdas.empty()) j["topology"]["lambdas"] = cfg.topology.lambdas;
  j["gradcheck"] = {{"points", cfg.gradcheck.points},
                    {"h", cfg.gradcheck.h},
                    {"tolerance", cfg.gradcheck.tolerance},
                    {"quadratic_tolerance", cfg.gradcheck.quadratic_tolerance}};
  return j;
}

void apply_overrides(ExperimentConfig& cfg, const Overrides& flags) {
  if (const char* env = std::getenv("LEVELRATE_OUT"); env != nullptr && *env != '\0') cfg.output_dir = env;
  if (flags.output_dir) cfg.output_dir = *flags.output_dir;
  if (flags.steps) {
    if (*flags.steps < 1) throw ConfigError("--steps must be >= 1");
    cfg.steps = *flags.steps;
  }
  if (flags.seed) cfg.seed = *flags.seed;
}

}  // namespace levelrate::runner
