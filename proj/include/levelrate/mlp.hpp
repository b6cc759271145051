#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <memory>
#include <random>
#include <span>
#include <vector>

#include "levelrate/dataset.hpp"
#include "levelrate/errors.hpp"
#include "levelrate/landscape.hpp"
#include "levelrate/loss.hpp"
#include "levelrate/param_vector.hpp"

namespace levelrate {

/// One-hidden-layer ReLU classifier:
///   z1 = W1 x + b1,  a1 = relu(z1),  logits = W2 a1 + b2.
///
/// Flattened parameter layout (fixed, so trajectories stay comparable):
///   [ W1 (hidden x inputs, row-major) | b1 (hidden) | W2 (classes x hidden, row-major) | b2 (classes) ]
struct MlpShape {
  std::size_t inputs = 0;
  std::size_t hidden = 0;
  std::size_t classes = 0;

  std::size_t w1_offset() const noexcept { return 0; }
  std::size_t b1_offset() const noexcept { return hidden * inputs; }
  std::size_t w2_offset() const noexcept { return b1_offset() + hidden; }
  std::size_t b2_offset() const noexcept { return w2_offset() + classes * hidden; }
  std::size_t num_params() const noexcept { return b2_offset() + classes; }

  void validate() const {
    if (inputs == 0 || hidden == 0 || classes < 2) {
      throw ConfigError("MlpShape needs inputs >= 1, hidden >= 1, classes >= 2");
    }
  }
};

/// Structured view of the MLP weights. `flatten` and `unflatten` are exact
/// inverses.
struct MlpParams {
  MlpShape shape;
  std::vector<double> w1, b1, w2, b2;

  explicit MlpParams(const MlpShape& s)
      : shape(s),
        w1(s.hidden * s.inputs, 0.0),
        b1(s.hidden, 0.0),
        w2(s.classes * s.hidden, 0.0),
        b2(s.classes, 0.0) {}

  ParamVector flatten() const {
    std::vector<double> out;
    out.reserve(shape.num_params());
    out.insert(out.end(), w1.begin(), w1.end());
    out.insert(out.end(), b1.begin(), b1.end());
    out.insert(out.end(), w2.begin(), w2.end());
    out.insert(out.end(), b2.begin(), b2.end());
    return ParamVector::unchecked(std::move(out));
  }

  static MlpParams unflatten(const MlpShape& s, const ParamVector& theta) {
    require_same_size(theta.size(), s.num_params(), "MlpParams::unflatten");
    MlpParams p(s);
    const auto v = theta.values();
    auto copy = [&](std::vector<double>& dst, std::size_t offset) {
      std::copy_n(v.begin() + static_cast<std::ptrdiff_t>(offset), dst.size(), dst.begin());
    };
    copy(p.w1, s.w1_offset());
    copy(p.b1, s.b1_offset());
    copy(p.w2, s.w2_offset());
    copy(p.b2, s.b2_offset());
    return p;
  }
};

/// Small uniform initialization in [-scale, scale]; biases start at zero.
inline ParamVector mlp_init(const MlpShape& shape, std::uint64_t seed, double scale = 0.5) {
  shape.validate();
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-scale, scale);
  MlpParams p(shape);
  for (double& w : p.w1) w = u(rng);
  for (double& w : p.w2) w = u(rng);
  return p.flatten();
}

/// Forward pass for one sample; returns the logits. `hidden_pre` receives z1.
inline void mlp_forward(const MlpShape& s, std::span<const double> theta, std::span<const double> x,
                        std::vector<double>& hidden_pre, std::vector<double>& logits) {
  hidden_pre.assign(s.hidden, 0.0);
  logits.assign(s.classes, 0.0);
  const double* w1 = theta.data() + s.w1_offset();
  const double* b1 = theta.data() + s.b1_offset();
  const double* w2 = theta.data() + s.w2_offset();
  const double* b2 = theta.data() + s.b2_offset();
  for (std::size_t h = 0; h < s.hidden; ++h) {
    double z = b1[h];
    for (std::size_t j = 0; j < s.inputs; ++j) z += w1[h * s.inputs + j] * x[j];
    hidden_pre[h] = z;
  }
  for (std::size_t c = 0; c < s.classes; ++c) {
    double z = b2[c];
    for (std::size_t h = 0; h < s.hidden; ++h) {
      const double a = hidden_pre[h] > 0.0 ? hidden_pre[h] : 0.0;
      z += w2[c * s.hidden + h] * a;
    }
    logits[c] = z;
  }
}

/// Per-sample cross-entropy losses for every row of `data`.
inline std::vector<double> mlp_sample_losses(const MlpShape& s, const ParamVector& theta, const Dataset& data) {
  require_same_size(theta.size(), s.num_params(), "mlp_sample_losses");
  require_same_size(data.num_features, s.inputs, "mlp_sample_losses features");
  validate_labels(data);
  std::vector<double> z1, logits, out(data.size());
  for (std::size_t i = 0; i < data.size(); ++i) {
    mlp_forward(s, theta.values(), data.row(i), z1, logits);
    out[i] = sample_cross_entropy(logits, data.labels[i]);
  }
  return out;
}

/// Smallest |z1| over all hidden units and samples: how far theta sits from
/// the nearest ReLU kink.
inline double mlp_relu_margin(const MlpShape& s, const ParamVector& theta, const Dataset& data) {
  require_same_size(theta.size(), s.num_params(), "mlp_relu_margin");
  require_same_size(data.num_features, s.inputs, "mlp_relu_margin features");
  std::vector<double> z1, logits;
  double margin = HUGE_VAL;
  for (std::size_t i = 0; i < data.size(); ++i) {
    mlp_forward(s, theta.values(), data.row(i), z1, logits);
    for (double z : z1) margin = std::fmin(margin, std::fabs(z));
  }
  return margin;
}

/// (1/N) sum_i weight_i * CE_i and its gradient by backpropagation. ReLU
/// uses subgradient 0 at 0. An empty `weights` span means all ones.
inline ValueAndGrad mlp_weighted_loss_and_grad(const MlpShape& s, const ParamVector& theta, const Dataset& data,
                                               std::span<const double> weights = {}) {
  s.validate();
  require_same_size(theta.size(), s.num_params(), "mlp_loss_and_grad");
  require_same_size(data.num_features, s.inputs, "mlp_loss_and_grad features");
  if (data.size() == 0) throw DataError("mlp_loss_and_grad: empty batch");
  if (!weights.empty()) require_same_size(weights.size(), data.size(), "mlp_loss_and_grad weights");
  for (std::size_t i = 0; i < data.size(); ++i) require_label(data.labels[i], s.classes);

  const double inv_n = 1.0 / static_cast<double>(data.size());
  const auto th = theta.values();
  const double* w2 = th.data() + s.w2_offset();
  std::vector<double> grad(s.num_params(), 0.0);
  double* gw1 = grad.data() + s.w1_offset();
  double* gb1 = grad.data() + s.b1_offset();
  double* gw2 = grad.data() + s.w2_offset();
  double* gb2 = grad.data() + s.b2_offset();

  std::vector<double> z1, logits, dz1(s.hidden);
  double total = 0.0;
  for (std::size_t i = 0; i < data.size(); ++i) {
    const double w = weights.empty() ? 1.0 : weights[i];
    const auto x = data.row(i);
    mlp_forward(s, th, x, z1, logits);
    const int y = data.labels[i];
    total += w * sample_cross_entropy(logits, y);
    if (w == 0.0) continue;

    std::vector<double> dz2 = ce_grad_logits(softmax(logits), y);
    for (double& d : dz2) d *= w * inv_n;

    std::fill(dz1.begin(), dz1.end(), 0.0);
    for (std::size_t c = 0; c < s.classes; ++c) {
      gb2[c] += dz2[c];
      for (std::size_t h = 0; h < s.hidden; ++h) {
        const double a = z1[h] > 0.0 ? z1[h] : 0.0;
        gw2[c * s.hidden + h] += dz2[c] * a;
        dz1[h] += w2[c * s.hidden + h] * dz2[c];
      }
    }
    for (std::size_t h = 0; h < s.hidden; ++h) {
      if (!(z1[h] > 0.0)) continue;
      gb1[h] += dz1[h];
      for (std::size_t j = 0; j < s.inputs; ++j) gw1[h * s.inputs + j] += dz1[h] * x[j];
    }
  }
  return {total * inv_n, ParamVector::unchecked(std::move(grad))};
}

/// Mean cross-entropy of the ReLU MLP over `batch`, with gradient.
inline ValueAndGrad mlp_loss_and_grad(const MlpParams& params, const Dataset& batch) {
  return mlp_weighted_loss_and_grad(params.shape, params.flatten(), batch);
}

inline ValueAndGrad mlp_loss_and_grad(const MlpShape& shape, const ParamVector& theta, const Dataset& batch) {
  return mlp_weighted_loss_and_grad(shape, theta, batch);
}

/// The MLP mean cross-entropy as an Objective over the flattened parameters.
inline Objective mlp_objective(const MlpShape& shape, Dataset data) {
  shape.validate();
  validate_labels(data);
  auto shared = std::make_shared<const Dataset>(std::move(data));
  const std::size_t n = shape.num_params();
  return Objective{"mlp", n, Box::cube(n, -kDefaultBoxHalfWidth, kDefaultBoxHalfWidth),
                   [shape, shared](const ParamVector& th) { return mlp_weighted_loss_and_grad(shape, th, *shared).value; },
                   [shape, shared](const ParamVector& th) { return mlp_weighted_loss_and_grad(shape, th, *shared).grad; }};
}

/// Restricts `obj` to a 2-D slice through `anchor`: coordinates `i` and `j`
/// vary, every other coordinate is frozen at the anchor's value.
inline Objective slice_2d(const Objective& obj, const ParamVector& anchor, std::size_t i, std::size_t j) {
  require_same_size(anchor.size(), obj.dim, "slice_2d anchor");
  if (i >= obj.dim || j >= obj.dim || i == j) throw ParameterError("slice_2d: invalid coordinate pair");
  auto embed = [anchor, i, j](const ParamVector& p) {
    ParamVector full = anchor;
    full[i] = p[0];
    full[j] = p[1];
    return full;
  };
  Box box{{obj.domain.lo.at(i), obj.domain.lo.at(j)}, {obj.domain.hi.at(i), obj.domain.hi.at(j)}};
  return Objective{obj.name + "[" + std::to_string(i) + "," + std::to_string(j) + "]", 2, std::move(box),
                   [obj, embed](const ParamVector& p) { return obj.eval(embed(p)); },
                   [obj, embed, i, j](const ParamVector& p) {
                     const ParamVector g = obj.grad(embed(p));
                     return ParamVector::unchecked({g[i], g[j]});
                   }};
}

}  // namespace levelrate
