#pragma once

#include <cmath>
#include <cstddef>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "levelrate/errors.hpp"
#include "levelrate/landscape.hpp"
#include "levelrate/param_vector.hpp"
#include "levelrate/schedule.hpp"
#include "levelrate/stability.hpp"
#include "levelrate/trajectory.hpp"

namespace levelrate {

// ---------------------------------------------------------------------------
// Plain and adaptive gradient descent.

/// x - alpha * g
inline ParamVector gd_step(const ParamVector& x, const ParamVector& g, double alpha) {
  require_same_size(x.size(), g.size(), "gd_step");
  if (!(alpha > 0.0) || !std::isfinite(alpha)) throw ParameterError("gd_step: alpha must be > 0");
  std::vector<double> out(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) out[i] = x[i] - alpha * g[i];
  return ParamVector::unchecked(std::move(out));
}

/// One step with eta = 1 / (1 + |grad L(x)|).
inline ParamVector adaptive_gd_step(const ParamVector& x, const Objective& obj) {
  const ParamVector g = obj.gradient(x);
  return gd_step(x, g, grad_adaptive_rate(g));
}

// ---------------------------------------------------------------------------
// BASE algorithms: gradient in, update out.

class BaseAlgorithm {
 public:
  virtual ~BaseAlgorithm() = default;
  /// Update u_t to add to the iterate, given gradient g_t at step t.
  virtual ParamVector update(const ParamVector& g, std::size_t t) = 0;
  /// Step size the algorithm uses at step t; reported in trajectories.
  virtual double nominal_rate(std::size_t t) const = 0;
};

/// SGD with an exponentially decaying rate: u_t = -alpha(t) g_t.
class SgdExpDecay final : public BaseAlgorithm {
 public:
  explicit SgdExpDecay(ExpDecaySchedule schedule) : schedule_(schedule) { schedule_.validate(); }

  ParamVector update(const ParamVector& g, std::size_t t) override {
    const double a = nominal_rate(t);
    std::vector<double> u(g.size());
    for (std::size_t i = 0; i < g.size(); ++i) u[i] = -a * g[i];
    return ParamVector::unchecked(std::move(u));
  }

  double nominal_rate(std::size_t t) const override { return exp_decay(schedule_, static_cast<double>(t)); }

 private:
  ExpDecaySchedule schedule_;
};

/// SGD with a constant rate.
class SgdFixed final : public BaseAlgorithm {
 public:
  explicit SgdFixed(double rate) : rate_(rate) {
    if (!(rate > 0.0) || !std::isfinite(rate)) throw ParameterError("SgdFixed: rate must be > 0");
  }

  ParamVector update(const ParamVector& g, std::size_t) override {
    std::vector<double> u(g.size());
    for (std::size_t i = 0; i < g.size(); ++i) u[i] = -rate_ * g[i];
    return ParamVector::unchecked(std::move(u));
  }

  double nominal_rate(std::size_t) const override { return rate_; }

 private:
  double rate_;
};

// ---------------------------------------------------------------------------
// Superlevel-set learning-rate tuner.
//
// Wraps a BASE algorithm. BASE updates accumulate into a displacement Delta;
// the emitted iterate is x_ref + (sum_i s_i) Delta, where the per-decay-factor
// scales s_i are driven by the scalar signal
//   h_t = <Delta_t, g_t> + lambda |g_t| / max(|x_t|, eps).

struct TunerConfig {
  std::vector<double> betas{0.9, 0.99, 0.999, 0.9999, 0.99999, 0.999999};
  double lambda = 0.01;
  double s_init = 1e-8;
  double eps = 1e-8;

  void validate() const {
    if (betas.empty()) throw ConfigError("tuner: betas must be non-empty");
    for (double b : betas) {
      if (!(b >= 0.0 && b <= 1.0)) throw ConfigError("tuner: every beta must lie in [0, 1]");
    }
    if (!std::isfinite(lambda)) throw ConfigError("tuner: lambda must be finite");
    if (!(s_init > 0.0) || !std::isfinite(s_init)) throw ConfigError("tuner: s_init must be > 0");
    if (!(eps > 0.0) || !std::isfinite(eps)) throw ConfigError("tuner: eps must be > 0");
  }
};

struct TunerState {
  ParamVector delta;  // accumulated BASE displacement
  ParamVector x_ref;  // frozen reference point
  std::vector<double> m, v, r, s;
  std::size_t t = 0;

  double scale() const noexcept {
    double sum = 0.0;
    for (double si : s) sum += si;
    return sum;
  }

  /// Current iterate x_t = x_ref + (sum s) Delta.
  ParamVector iterate() const {
    const double k = scale();
    std::vector<double> x(x_ref.size());
    for (std::size_t i = 0; i < x.size(); ++i) x[i] = x_ref[i] + k * delta[i];
    return ParamVector::unchecked(std::move(x));
  }
};

inline TunerState tuner_init(const ParamVector& x0, const TunerConfig& cfg) {
  cfg.validate();
  require_finite(x0, "tuner_init");
  const std::size_t n = cfg.betas.size();
  TunerState st;
  st.delta = ParamVector(x0.size(), 0.0);
  st.x_ref = x0;
  st.m.assign(n, 0.0);
  st.v.assign(n, 0.0);
  st.r.assign(n, 0.0);
  st.s.assign(n, 0.0);
  return st;
}

struct TunerStepResult {
  TunerState state;
  ParamVector x_next;
  double h = 0.0;
};

/// Advances the tuner by one step given the gradient at the current iterate
/// and the BASE update u_t.
inline TunerStepResult tuner_step(const TunerState& state, const ParamVector& g, const ParamVector& u,
                                  const TunerConfig& cfg) {
  const std::size_t dim = state.x_ref.size();
  require_same_size(g.size(), dim, "tuner_step gradient");
  require_same_size(u.size(), dim, "tuner_step update");
  const std::size_t n = cfg.betas.size();
  require_same_size(state.m.size(), n, "tuner_step state");

  const ParamVector x_t = state.iterate();
  const double h = dot(state.delta, g) + cfg.lambda * (norm(g) / std::fmax(norm(x_t), cfg.eps));
  if (!std::isfinite(h)) {
    throw NumericalError("tuner_step: non-finite h at step " + std::to_string(state.t + 1) +
                         " (|g| = " + std::to_string(norm(g)) + ", |delta| = " + std::to_string(norm(state.delta)) +
                         ")");
  }

  TunerStepResult out{state, ParamVector{}, h};
  TunerState& st = out.state;
  for (std::size_t i = 0; i < dim; ++i) st.delta[i] = state.delta[i] + u[i];

  const double n_real = static_cast<double>(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double b = cfg.betas[i];
    st.m[i] = std::fmax(b * state.m[i], h);
    st.v[i] = b * b * state.v[i] + h * h;
    st.r[i] = std::fmax(0.0, b * state.r[i] - state.s[i] * h);
    const double w = cfg.s_init * st.m[i] / n_real + st.r[i];
    st.s[i] = w / (std::sqrt(st.v[i]) + cfg.eps);
  }
  st.t = state.t + 1;
  out.x_next = st.iterate();
  return out;
}

// ---------------------------------------------------------------------------
// Training loop.

enum class MethodKind { Fixed, ExpDecay, Adaptive, Tuner };

struct Method {
  MethodKind kind = MethodKind::ExpDecay;
  double fixed_rate = 0.1;
  ExpDecaySchedule schedule{};  // ExpDecay, and the SGD BASE wrapped by Tuner
  TunerConfig tuner{};
};

enum class RunStatus { Completed, Diverged };

inline constexpr double kDivergenceThreshold = 1e12;

struct TrainingOptions {
  bool record_x = true;
  /// Positive time factor multiplying loss and gradient at step t, used for
  /// the temporally modulated cost. Empty means 1.
  std::function<double(double)> modulation;
};

struct TrainingResult {
  Trajectory trajectory;
  RunStatus status = RunStatus::Completed;
  std::string message;
};

/// Runs T steps from x0 and records T + 1 rows (including x0). Stops early
/// with status Diverged once the loss is non-finite or exceeds 1e12; the
/// rows up to and including the offending one are kept.
inline TrainingResult run_training(const Objective& obj, const Method& method, std::size_t steps,
                                   const ParamVector& x0, const TrainingOptions& opts = {}) {
  if (steps < 1) throw ParameterError("run_training: steps must be >= 1");
  require_same_size(x0.size(), obj.dim, "run_training x0");
  require_finite(x0, "run_training x0");

  std::unique_ptr<BaseAlgorithm> base;
  std::optional<TunerState> tuner;
  switch (method.kind) {
    case MethodKind::Fixed:
      base = std::make_unique<SgdFixed>(method.fixed_rate);
      break;
    case MethodKind::ExpDecay:
      base = std::make_unique<SgdExpDecay>(method.schedule);
      break;
    case MethodKind::Adaptive:
      break;
    case MethodKind::Tuner:
      base = std::make_unique<SgdExpDecay>(method.schedule);
      tuner = tuner_init(x0, method.tuner);
      break;
  }

  TrainingResult result;
  result.trajectory.steps.reserve(steps + 1);
  ParamVector x = x0;
  for (std::size_t t = 0; t <= steps; ++t) {
    const double factor = opts.modulation ? opts.modulation(static_cast<double>(t)) : 1.0;
    StepRecord rec;
    rec.t = t;
    rec.loss = factor * obj.eval(x);
    ParamVector g = obj.gradient(x);
    if (factor != 1.0) {
      for (double& gi : g) gi *= factor;
    }
    rec.grad_norm = norm(g);
    if (opts.record_x) rec.x = x.vec();

    const bool bad = !std::isfinite(rec.loss) || rec.loss > kDivergenceThreshold || !std::isfinite(rec.grad_norm);
    double rate = 0.0;
    if (!bad) {
      switch (method.kind) {
        case MethodKind::Fixed:
        case MethodKind::ExpDecay:
          rate = base->nominal_rate(t);
          break;
        case MethodKind::Adaptive:
          rate = grad_adaptive_rate(g);
          break;
        case MethodKind::Tuner:
          rate = tuner->scale() * base->nominal_rate(t);
          break;
      }
      rec.rate = rate;
      rec.lyapunov_rate = rate > 0.0 ? lyapunov_rate(rate, g) : 0.0;
    }
    result.trajectory.steps.push_back(std::move(rec));
    if (bad) {
      result.status = RunStatus::Diverged;
      result.message = "loss diverged at step " + std::to_string(t);
      return result;
    }
    if (t == steps) break;

    if (method.kind == MethodKind::Tuner) {
      const ParamVector u = base->update(g, t);
      try {
        TunerStepResult next = tuner_step(*tuner, g, u, method.tuner);
        tuner = std::move(next.state);
        x = std::move(next.x_next);
      } catch (const NumericalError& e) {
        result.status = RunStatus::Diverged;
        result.message = e.what();
        return result;
      }
    } else {
      x = gd_step(x, g, rate);
    }
    if (!x.all_finite()) {
      // Keep a row for the non-finite iterate so the blow-up is visible.
      result.trajectory.steps.push_back(StepRecord{t + 1, HUGE_VAL, HUGE_VAL, 0.0, 0.0, opts.record_x ? x.vec() : std::vector<double>{}});
      result.status = RunStatus::Diverged;
      result.message = "iterate became non-finite at step " + std::to_string(t + 1);
      return result;
    }
  }
  return result;
}

inline const char* to_string(RunStatus s) noexcept {
  return s == RunStatus::Completed ? "completed" : "diverged";
}

inline const char* to_string(MethodKind k) noexcept {
  switch (k) {
    case MethodKind::Fixed:
      return "fixed";
    case MethodKind::ExpDecay:
      return "exp_decay";
    case MethodKind::Adaptive:
      return "adaptive";
    case MethodKind::Tuner:
      return "tuner";
  }
  return "?";
}

}  // namespace levelrate
