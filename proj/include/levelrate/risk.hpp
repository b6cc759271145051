#pragma once

#include <cmath>
#include <cstddef>
#include <memory>
#include <string>
#include <vector>

#include "levelrate/dataset.hpp"
#include "levelrate/errors.hpp"
#include "levelrate/landscape.hpp"
#include "levelrate/loss.hpp"
#include "levelrate/mlp.hpp"
#include "levelrate/param_vector.hpp"

namespace levelrate {

/// Weights and modulation for the imbalance-aware empirical risk.
///
/// `robustness` is a per-sample confidence in [0, 1]; an empty vector means
/// every sample has confidence 1.
struct RiskConfig {
  std::vector<double> class_weights;
  std::vector<double> robustness;
  RegKind reg_kind = RegKind::L2;
  double reg_strength = 0.0;
  double kappa = 0.0;
  double delta = 1.0;

  void validate() const {
    for (std::size_t c = 0; c < class_weights.size(); ++c) {
      if (!(class_weights[c] > 0.0) || !std::isfinite(class_weights[c])) {
        throw ConfigError("class weight " + std::to_string(c) + " must be a finite value > 0");
      }
    }
    for (std::size_t i = 0; i < robustness.size(); ++i) {
      if (!(robustness[i] >= 0.0 && robustness[i] <= 1.0)) {
        throw ConfigError("robustness " + std::to_string(i) + " must lie in [0, 1]");
      }
    }
    if (!(reg_strength >= 0.0) || !std::isfinite(reg_strength)) throw ConfigError("reg_strength must be >= 0");
    if (!(kappa >= 0.0) || !std::isfinite(kappa)) throw ConfigError("kappa must be >= 0");
    if (!(delta > 0.0) || !std::isfinite(delta)) throw ConfigError("delta must be > 0");
  }
};

struct PriorSpec {
  enum class Kind { None, Gaussian };
  Kind kind = Kind::None;
  double precision = 0.0;
};

/// Inverse-frequency class weights, w_c = N / (C * count_c). Classes absent
/// from the data get weight 1.
inline std::vector<double> inverse_frequency_weights(const Dataset& data) {
  std::vector<std::size_t> counts(data.num_classes, 0);
  for (int y : data.labels) ++counts.at(static_cast<std::size_t>(y));
  std::vector<double> w(data.num_classes, 1.0);
  const double n = static_cast<double>(data.size());
  const double c = static_cast<double>(data.num_classes);
  for (std::size_t k = 0; k < counts.size(); ++k) {
    if (counts[k] > 0) w[k] = n / (c * static_cast<double>(counts[k]));
  }
  return w;
}

namespace detail {

inline std::vector<double> per_sample_weights(const Dataset& data, const std::vector<double>& class_weights,
                                              const std::vector<double>* robustness) {
  std::vector<double> w(data.size());
  for (std::size_t i = 0; i < data.size(); ++i) {
    const int y = data.labels[i];
    if (y < 0 || static_cast<std::size_t>(y) >= class_weights.size()) {
      throw ConfigError("no class weight for label " + std::to_string(y));
    }
    w[i] = class_weights[static_cast<std::size_t>(y)];
  }
  if (robustness != nullptr && !robustness->empty()) {
    require_same_size(robustness->size(), data.size(), "robustness");
    for (std::size_t i = 0; i < data.size(); ++i) {
      const double rho = (*robustness)[i];
      if (!(rho >= 0.0 && rho <= 1.0)) throw ConfigError("robustness " + std::to_string(i) + " outside [0, 1]");
      w[i] *= rho;
    }
  }
  return w;
}

inline void check_class_weights(const std::vector<double>& w) {
  for (std::size_t c = 0; c < w.size(); ++c) {
    if (!(w[c] > 0.0)) throw ConfigError("class weight " + std::to_string(c) + " must be > 0");
  }
}

}  // namespace detail

/// (1/N) sum_i w_{y_i} CE_i.
inline ValueAndGrad class_weighted_risk(const MlpShape& shape, const ParamVector& theta, const Dataset& batch,
                                        const std::vector<double>& class_weights) {
  detail::check_class_weights(class_weights);
  const auto w = detail::per_sample_weights(batch, class_weights, nullptr);
  return mlp_weighted_loss_and_grad(shape, theta, batch, w);
}

/// (1/N) sum_i rho_i w_{y_i} CE_i.
inline ValueAndGrad robust_risk(const MlpShape& shape, const ParamVector& theta, const Dataset& batch,
                                const std::vector<double>& class_weights, const std::vector<double>& robustness) {
  detail::check_class_weights(class_weights);
  const auto w = detail::per_sample_weights(batch, class_weights, &robustness);
  return mlp_weighted_loss_and_grad(shape, theta, batch, w);
}

/// robust_risk + regularizer. Empty class weights in `cfg` mean all ones.
inline ValueAndGrad regularized_risk(const MlpShape& shape, const ParamVector& theta, const Dataset& batch,
                                     const RiskConfig& cfg) {
  cfg.validate();
  const std::vector<double> weights =
      cfg.class_weights.empty() ? std::vector<double>(shape.classes, 1.0) : cfg.class_weights;
  ValueAndGrad risk = robust_risk(shape, theta, batch, weights, cfg.robustness);
  const ValueAndGrad reg = regularizer(theta, cfg.reg_kind, cfg.reg_strength);
  risk.value += reg.value;
  for (std::size_t k = 0; k < theta.size(); ++k) risk.grad[k] += reg.grad[k];
  return risk;
}

/// gamma(t) * J_reg(theta) and its gradient. Since gamma(t) > 0 the minimizer
/// does not depend on t.
inline ValueAndGrad dynamic_cost(const MlpShape& shape, const ParamVector& theta, const Dataset& batch, double t,
                                 const RiskConfig& cfg) {
  const double gamma = temporal_modulation(t, cfg.kappa, cfg.delta);
  ValueAndGrad j = regularized_risk(shape, theta, batch, cfg);
  j.value *= gamma;
  for (double& g : j.grad) g *= gamma;
  return j;
}

/// Mean negative log-likelihood plus (precision / 2) |theta|^2 for a Gaussian
/// prior. The normalizing constant is dropped.
inline ValueAndGrad neg_log_posterior(const MlpShape& shape, const ParamVector& theta, const Dataset& data,
                                      const PriorSpec& prior) {
  if (!(prior.precision >= 0.0) || !std::isfinite(prior.precision)) {
    throw ConfigError("prior precision must be >= 0");
  }
  ValueAndGrad nll = mlp_weighted_loss_and_grad(shape, theta, data);
  if (prior.kind == PriorSpec::Kind::Gaussian) {
    const ValueAndGrad pen = regularizer(theta, RegKind::L2, prior.precision);
    nll.value += pen.value;
    for (std::size_t k = 0; k < theta.size(); ++k) nll.grad[k] += pen.grad[k];
  }
  return nll;
}

/// J_reg as an Objective over the flattened MLP parameters.
inline Objective regularized_risk_objective(const MlpShape& shape, Dataset data, RiskConfig cfg) {
  cfg.validate();
  validate_labels(data);
  auto d = std::make_shared<const Dataset>(std::move(data));
  auto c = std::make_shared<const RiskConfig>(std::move(cfg));
  const std::size_t n = shape.num_params();
  return Objective{"mlp_reg", n, Box::cube(n, -kDefaultBoxHalfWidth, kDefaultBoxHalfWidth),
                   [shape, d, c](const ParamVector& th) { return regularized_risk(shape, th, *d, *c).value; },
                   [shape, d, c](const ParamVector& th) { return regularized_risk(shape, th, *d, *c).grad; }};
}

/// J_dynamic(., t) at a fixed epoch t as an Objective.
inline Objective dynamic_cost_objective(const MlpShape& shape, Dataset data, RiskConfig cfg, double t) {
  cfg.validate();
  validate_labels(data);
  auto d = std::make_shared<const Dataset>(std::move(data));
  auto c = std::make_shared<const RiskConfig>(std::move(cfg));
  const std::size_t n = shape.num_params();
  return Objective{"mlp_dynamic", n, Box::cube(n, -kDefaultBoxHalfWidth, kDefaultBoxHalfWidth),
                   [shape, d, c, t](const ParamVector& th) { return dynamic_cost(shape, th, *d, t, *c).value; },
                   [shape, d, c, t](const ParamVector& th) { return dynamic_cost(shape, th, *d, t, *c).grad; }};
}

}  // namespace levelrate
