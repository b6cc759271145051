#pragma once

#include <cmath>

#include "levelrate/errors.hpp"
#include "levelrate/param_vector.hpp"

namespace levelrate {

/// alpha(t) = initial_rate * exp(-decay * t), with t a real-valued step
/// count. The iteration index maps to t one-to-one.
struct ExpDecaySchedule {
  double initial_rate = 0.1;
  double decay = 0.01;

  void validate() const {
    if (!(initial_rate > 0.0) || !std::isfinite(initial_rate)) {
      throw ParameterError("exp_decay: initial rate must be > 0");
    }
    if (!(decay > 0.0) || !std::isfinite(decay)) throw ParameterError("exp_decay: decay must be > 0");
  }
};

struct RateSample {
  double t = 0.0;
  double rate = 0.0;
};

inline double exp_decay(const ExpDecaySchedule& s, double t) {
  s.validate();
  if (!(t >= 0.0)) throw ParameterError("exp_decay: t must be >= 0");
  return s.initial_rate * std::exp(-s.decay * t);
}

/// d alpha / dt = -decay * alpha(t).
inline double exp_decay_derivative(const ExpDecaySchedule& s, double t) {
  return -s.decay * exp_decay(s, t);
}

/// Time for the rate to halve: ln 2 / decay.
inline double exp_decay_half_life(const ExpDecaySchedule& s) {
  s.validate();
  return std::log(2.0) / s.decay;
}

/// eta = 1 / (1 + |g|), Euclidean norm. Lies in (0, 1].
inline double grad_adaptive_rate(const ParamVector& g) {
  require_finite(g, "grad_adaptive_rate");
  return 1.0 / (1.0 + norm(g));
}

}  // namespace levelrate
