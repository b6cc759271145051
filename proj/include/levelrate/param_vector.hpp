#pragma once

#include <cmath>
#include <cstddef>
#include <initializer_list>
#include <span>
#include <string>
#include <vector>

#include "levelrate/errors.hpp"

namespace levelrate {

/// Dense parameter vector. Construction rejects empty input and any
/// non-finite entry; mutation through operator[] is unchecked.
class ParamVector {
 public:
  ParamVector() = default;
  explicit ParamVector(std::size_t n, double fill = 0.0) : values_(n, fill) {}
  ParamVector(std::initializer_list<double> init) : values_(init) { validate(); }
  explicit ParamVector(std::vector<double> values) : values_(std::move(values)) { validate(); }

  /// Wraps values without the finiteness check. Used for gradients that are
  /// about to be checked by the caller anyway.
  static ParamVector unchecked(std::vector<double> values) {
    ParamVector p;
    p.values_ = std::move(values);
    return p;
  }

  std::size_t size() const noexcept { return values_.size(); }
  bool empty() const noexcept { return values_.empty(); }

  double& operator[](std::size_t i) noexcept { return values_[i]; }
  double operator[](std::size_t i) const noexcept { return values_[i]; }

  std::span<double> values() noexcept { return values_; }
  std::span<const double> values() const noexcept { return values_; }
  const std::vector<double>& vec() const noexcept { return values_; }

  auto begin() noexcept { return values_.begin(); }
  auto end() noexcept { return values_.end(); }
  auto begin() const noexcept { return values_.begin(); }
  auto end() const noexcept { return values_.end(); }

  bool all_finite() const noexcept {
    for (double v : values_) {
      if (!std::isfinite(v)) return false;
    }
    return true;
  }

  friend bool operator==(const ParamVector&, const ParamVector&) = default;

 private:
  void validate() const {
    if (values_.empty()) throw InputError("ParamVector must have at least one entry");
    for (std::size_t i = 0; i < values_.size(); ++i) {
      if (!std::isfinite(values_[i])) {
        throw InputError("ParamVector entry " + std::to_string(i) + " is not finite");
      }
    }
  }

  std::vector<double> values_;
};

inline void require_same_size(std::size_t a, std::size_t b, const char* what) {
  if (a != b) {
    throw DimensionError(std::string(what) + ": length " + std::to_string(a) +
                         " does not match " + std::to_string(b));
  }
}

inline void require_finite(const ParamVector& x, const char* what) {
  if (x.empty()) throw InputError(std::string(what) + ": empty vector");
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (!std::isfinite(x[i])) {
      throw InputError(std::string(what) + ": entry " + std::to_string(i) + " is not finite");
    }
  }
}

inline double dot(std::span<const double> a, std::span<const double> b) {
  require_same_size(a.size(), b.size(), "dot");
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

inline double squared_norm(std::span<const double> a) noexcept {
  double s = 0.0;
  for (double v : a) s += v * v;
  return s;
}

/// Euclidean norm.
inline double norm(std::span<const double> a) noexcept { return std::sqrt(squared_norm(a)); }

inline double norm(const ParamVector& a) noexcept { return norm(a.values()); }
inline double squared_norm(const ParamVector& a) noexcept { return squared_norm(a.values()); }
inline double dot(const ParamVector& a, const ParamVector& b) { return dot(a.values(), b.values()); }

inline double max_abs(std::span<const double> a) noexcept {
  double m = 0.0;
  for (double v : a) m = std::fmax(m, std::fabs(v));
  return m;
}

}  // namespace levelrate
