#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "levelrate/errors.hpp"
#include "levelrate/param_vector.hpp"

namespace levelrate {

// ---------------------------------------------------------------------------
// Softmax likelihood and cross-entropy.

/// Max-shifted softmax. Entries lie in (0, 1] and sum to 1.
inline std::vector<double> softmax(std::span<const double> logits) {
  if (logits.empty()) throw DimensionError("softmax: empty logits");
  double zmax = logits[0];
  for (double z : logits) {
    if (!std::isfinite(z)) throw InputError("softmax: non-finite logit");
    zmax = std::max(zmax, z);
  }
  std::vector<double> p(logits.size());
  double sum = 0.0;
  for (std::size_t i = 0; i < logits.size(); ++i) {
    p[i] = std::exp(logits[i] - zmax);
    sum += p[i];
  }
  for (double& v : p) v /= sum;
  return p;
}

/// log(sum(exp(z))), shifted by the max.
inline double log_sum_exp(std::span<const double> z) {
  double zmax = z[0];
  for (double v : z) zmax = std::max(zmax, v);
  double sum = 0.0;
  for (double v : z) sum += std::exp(v - zmax);
  return zmax + std::log(sum);
}

inline void require_label(int label, std::size_t classes) {
  if (label < 0 || static_cast<std::size_t>(label) >= classes) {
    throw DataError("label " + std::to_string(label) + " outside [0, " + std::to_string(classes) + ")");
  }
}

/// -log softmax(z)[label] for a single sample.
inline double sample_cross_entropy(std::span<const double> logits, int label) {
  if (logits.empty()) throw DimensionError("cross_entropy: empty logits");
  require_label(label, logits.size());
  return log_sum_exp(logits) - logits[static_cast<std::size_t>(label)];
}

/// Mean cross-entropy over a batch. `logits` is row-major, one row of
/// `classes` entries per label. Uses the 1/m mean so the value does not grow
/// with batch size.
inline double cross_entropy(std::span<const double> logits, std::span<const int> labels, std::size_t classes) {
  if (classes == 0 || labels.empty()) throw DimensionError("cross_entropy: empty batch");
  require_same_size(logits.size(), labels.size() * classes, "cross_entropy logits");
  double total = 0.0;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    total += sample_cross_entropy(logits.subspan(i * classes, classes), labels[i]);
  }
  return total / static_cast<double>(labels.size());
}

/// Gradient of -log p[label] with respect to the logits: p - onehot(label).
inline std::vector<double> ce_grad_logits(std::span<const double> probs, int label) {
  if (probs.empty()) throw DimensionError("ce_grad_logits: empty probabilities");
  require_label(label, probs.size());
  std::vector<double> g(probs.begin(), probs.end());
  g[static_cast<std::size_t>(label)] -= 1.0;
  return g;
}

// ---------------------------------------------------------------------------
// Regularization and temporal modulation.

enum class RegKind { L1, L2 };

struct ValueAndGrad {
  double value = 0.0;
  ParamVector grad;
};

/// L1: strength * sum|theta_i| with subgradient 0 at 0.
/// L2: strength * 0.5 * |theta|^2.
inline ValueAndGrad regularizer(const ParamVector& theta, RegKind kind, double strength) {
  if (!(strength >= 0.0) || !std::isfinite(strength)) {
    throw ConfigError("regularizer: strength must be a finite value >= 0");
  }
  std::vector<double> g(theta.size());
  double value = 0.0;
  if (kind == RegKind::L1) {
    for (std::size_t i = 0; i < theta.size(); ++i) {
      value += std::fabs(theta[i]);
      g[i] = strength * (theta[i] > 0.0 ? 1.0 : (theta[i] < 0.0 ? -1.0 : 0.0));
    }
    value *= strength;
  } else {
    for (std::size_t i = 0; i < theta.size(); ++i) {
      value += theta[i] * theta[i];
      g[i] = strength * theta[i];
    }
    value *= 0.5 * strength;
  }
  return {value, ParamVector::unchecked(std::move(g))};
}

/// gamma(t) = 1 + kappa * exp(-delta * t).
inline double temporal_modulation(double t, double kappa, double delta) {
  if (!(delta > 0.0) || !std::isfinite(delta)) throw ConfigError("temporal_modulation: delta must be > 0");
  if (!(kappa >= 0.0) || !std::isfinite(kappa)) throw ConfigError("temporal_modulation: kappa must be >= 0");
  if (!(t >= 0.0)) throw ParameterError("temporal_modulation: t must be >= 0");
  return 1.0 + kappa * std::exp(-delta * t);
}

}  // namespace levelrate
