#pragma once

#include <cmath>
#include <cstddef>
#include <vector>

#include "levelrate/errors.hpp"
#include "levelrate/param_vector.hpp"
#include "levelrate/trajectory.hpp"

namespace levelrate {

/// Lyapunov monitor output for a trajectory, taking the loss itself as V.
struct StabilityReport {
  struct Violation {
    std::size_t t = 0;
    double observed_change = 0.0;  // loss(t + 1) - loss(t)
    double allowed_change = 0.0;   // tol
  };

  std::size_t steps_checked = 0;
  std::vector<Violation> violations;
  double max_violation = 0.0;  // largest observed_change - allowed_change, 0 if none
  bool monotone = true;

  // Boundedness diagnostic, filled by the caller when a reference point is known.
  bool bounded_checked = false;
  bool bounded = true;
  double bound_delta = 0.0;
  double bound_epsilon = 0.0;
};

/// dV/dt along the gradient flow with V = L and rate alpha: -alpha |g|^2.
inline double lyapunov_rate(double alpha, const ParamVector& g) {
  if (!(alpha > 0.0) || !std::isfinite(alpha)) throw ParameterError("lyapunov_rate: alpha must be > 0");
  return -alpha * squared_norm(g);
}

/// First-order prediction of the loss after one adaptive-rate step:
/// L - |g|^2 / (1 + |g|).
inline double predicted_descent(double loss, const ParamVector& g) {
  const double gn = norm(g);
  return loss - gn * gn / (1.0 + gn);
}

/// Flags every step whose loss rises by more than `tol`.
inline StabilityReport check_monotone(const Trajectory& traj, double tol = 1e-12) {
  if (traj.size() < 2) throw InputError("check_monotone: trajectory needs at least 2 records");
  if (!(tol >= 0.0)) throw ParameterError("check_monotone: tol must be >= 0");
  StabilityReport report;
  report.steps_checked = traj.size() - 1;
  for (std::size_t k = 0; k + 1 < traj.size(); ++k) {
    const double change = traj.steps[k + 1].loss - traj.steps[k].loss;
    // The negated form also flags NaN losses.
    if (!(change <= tol)) {
      report.violations.push_back({traj.steps[k].t, change, tol});
      const double excess = change - tol;
      if (std::isfinite(excess)) {
        report.max_violation = std::fmax(report.max_violation, excess);
      } else {
        report.max_violation = HUGE_VAL;
      }
    }
  }
  report.monotone = report.violations.empty();
  return report;
}

/// |x_0 - x*| < delta implies |x_t - x*| < epsilon for every recorded t.
/// Vacuously true when x_0 starts outside the delta ball.
inline bool boundedness_check(const Trajectory& traj, const ParamVector& x_star, double delta, double epsilon) {
  if (!(delta > 0.0) || !(epsilon > 0.0)) throw ParameterError("boundedness_check: delta and epsilon must be > 0");
  if (!traj.has_snapshots()) throw InputError("boundedness_check: trajectory has no x snapshots");
  auto dist = [&](const std::vector<double>& x) {
    require_same_size(x.size(), x_star.size(), "boundedness_check");
    double s = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) s += (x[i] - x_star[i]) * (x[i] - x_star[i]);
    return std::sqrt(s);
  };
  if (!(dist(traj.front().x) < delta)) return true;
  for (const auto& step : traj.steps) {
    if (!(dist(step.x) < epsilon)) return false;
  }
  return true;
}

}  // namespace levelrate
