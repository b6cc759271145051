#pragma once

#include <cmath>
#include <cstddef>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "levelrate/errors.hpp"
#include "levelrate/param_vector.hpp"

namespace levelrate {

/// Axis-aligned evaluation box, one [lo, hi] interval per coordinate.
struct Box {
  std::vector<double> lo;
  std::vector<double> hi;

  static Box cube(std::size_t dim, double lo, double hi) {
    return Box{std::vector<double>(dim, lo), std::vector<double>(dim, hi)};
  }

  std::size_t dim() const noexcept { return lo.size(); }

  bool contains(const ParamVector& x) const noexcept {
    if (x.size() != lo.size()) return false;
    for (std::size_t i = 0; i < x.size(); ++i) {
      if (x[i] < lo[i] || x[i] > hi[i]) return false;
    }
    return true;
  }
};

/// A named scalar field with analytic gradient. `eval` and `grad` are
/// expected to be pure; all built-in objectives are.
struct Objective {
  std::string name;
  std::size_t dim = 0;
  Box domain;
  std::function<double(const ParamVector&)> eval;
  std::function<ParamVector(const ParamVector&)> grad;

  double value(const ParamVector& x) const {
    require_same_size(x.size(), dim, name.c_str());
    return eval(x);
  }

  ParamVector gradient(const ParamVector& x) const {
    require_same_size(x.size(), dim, name.c_str());
    ParamVector g = grad(x);
    require_same_size(g.size(), dim, (name + " gradient").c_str());
    return g;
  }
};

inline constexpr double kDefaultBoxHalfWidth = 6.0;

// ---------------------------------------------------------------------------
// Test fixtures with closed-form gradients.

/// L(x) = 0.5 * |x|^2.
inline double eval_quadratic(const ParamVector& x) {
  require_finite(x, "quadratic");
  return 0.5 * squared_norm(x);
}

inline ParamVector grad_quadratic(const ParamVector& x) {
  require_finite(x, "quadratic");
  return x;
}

/// f(x, y) = (1 - x)^2 + 100 (y - x^2)^2
inline double eval_rosenbrock(const ParamVector& p) {
  require_same_size(p.size(), 2, "rosenbrock");
  require_finite(p, "rosenbrock");
  const double x = p[0], y = p[1];
  const double a = 1.0 - x;
  const double b = y - x * x;
  return a * a + 100.0 * b * b;
}

inline ParamVector grad_rosenbrock(const ParamVector& p) {
  require_same_size(p.size(), 2, "rosenbrock");
  require_finite(p, "rosenbrock");
  const double x = p[0], y = p[1];
  const double b = y - x * x;
  return ParamVector::unchecked({-2.0 * (1.0 - x) - 400.0 * x * b, 200.0 * b});
}

/// f(x, y) = (x^2 + y - 11)^2 + (x + y^2 - 7)^2, four global minima with f = 0.
inline double eval_himmelblau(const ParamVector& p) {
  require_same_size(p.size(), 2, "himmelblau");
  require_finite(p, "himmelblau");
  const double x = p[0], y = p[1];
  const double a = x * x + y - 11.0;
  const double b = x + y * y - 7.0;
  return a * a + b * b;
}

inline ParamVector grad_himmelblau(const ParamVector& p) {
  require_same_size(p.size(), 2, "himmelblau");
  require_finite(p, "himmelblau");
  const double x = p[0], y = p[1];
  const double a = x * x + y - 11.0;
  const double b = x + y * y - 7.0;
  return ParamVector::unchecked({4.0 * x * a + 2.0 * b, 2.0 * a + 4.0 * y * b});
}

inline Objective quadratic(std::size_t dim = 2) {
  if (dim == 0) throw DimensionError("quadratic: dim must be >= 1");
  return Objective{"quadratic", dim, Box::cube(dim, -kDefaultBoxHalfWidth, kDefaultBoxHalfWidth),
                   eval_quadratic, grad_quadratic};
}

inline Objective rosenbrock() {
  return Objective{"rosenbrock", 2, Box::cube(2, -kDefaultBoxHalfWidth, kDefaultBoxHalfWidth),
                   eval_rosenbrock, grad_rosenbrock};
}

inline Objective himmelblau() {
  return Objective{"himmelblau", 2, Box::cube(2, -kDefaultBoxHalfWidth, kDefaultBoxHalfWidth),
                   eval_himmelblau, grad_himmelblau};
}

inline Objective constant_objective(std::size_t dim, double c) {
  return Objective{"constant", dim, Box::cube(dim, -kDefaultBoxHalfWidth, kDefaultBoxHalfWidth),
                   [c](const ParamVector&) { return c; },
                   [dim](const ParamVector&) { return ParamVector(dim, 0.0); }};
}

/// Returns `obj` scaled by a positive constant: value and gradient both
/// multiplied by `c`.
inline Objective scaled(Objective obj, double c) {
  if (!(c > 0.0) || !std::isfinite(c)) throw ParameterError("scaled: factor must be positive");
  auto eval = obj.eval;
  auto grad = obj.grad;
  obj.eval = [eval, c](const ParamVector& x) { return c * eval(x); };
  obj.grad = [grad, c](const ParamVector& x) {
    ParamVector g = grad(x);
    for (double& v : g) v *= c;
    return g;
  };
  return obj;
}

/// Central-difference gradient: (f(x + h e_i) - f(x - h e_i)) / 2h.
inline ParamVector finite_diff_grad(const Objective& obj, const ParamVector& x, double h) {
  if (!(h > 0.0) || !std::isfinite(h)) throw ParameterError("finite_diff_grad: h must be > 0");
  require_same_size(x.size(), obj.dim, "finite_diff_grad");
  std::vector<double> g(x.size());
  ParamVector probe = x;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double xi = x[i];
    probe[i] = xi + h;
    const double fp = obj.eval(probe);
    probe[i] = xi - h;
    const double fm = obj.eval(probe);
    probe[i] = xi;
    g[i] = (fp - fm) / (2.0 * h);
  }
  return ParamVector::unchecked(std::move(g));
}

/// Max-norm relative discrepancy between two gradients,
/// |a - b|_inf / max(|a|_inf, |b|_inf, floor).
inline double gradient_rel_error(const ParamVector& a, const ParamVector& b, double floor = 1e-8) {
  require_same_size(a.size(), b.size(), "gradient_rel_error");
  double diff = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) diff = std::fmax(diff, std::fabs(a[i] - b[i]));
  const double scale = std::fmax(std::fmax(max_abs(a.values()), max_abs(b.values())), floor);
  return diff / scale;
}

}  // namespace levelrate
