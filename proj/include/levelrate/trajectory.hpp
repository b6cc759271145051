#pragma once

#include <cstddef>
#include <vector>

namespace levelrate {

/// One row of a training run, recorded at iterate x_t before the step is taken.
struct StepRecord {
  std::size_t t = 0;
  double loss = 0.0;
  double grad_norm = 0.0;
  double rate = 0.0;
  double lyapunov_rate = 0.0;
  std::vector<double> x;  // empty when snapshots are disabled

  friend bool operator==(const StepRecord&, const StepRecord&) = default;
};

/// Step records with t = 0, 1, 2, ... in order.
struct Trajectory {
  std::vector<StepRecord> steps;

  std::size_t size() const noexcept { return steps.size(); }
  bool empty() const noexcept { return steps.empty(); }
  const StepRecord& front() const { return steps.front(); }
  const StepRecord& back() const { return steps.back(); }

  bool has_snapshots() const noexcept {
    for (const auto& s : steps) {
      if (s.x.empty()) return false;
    }
    return !steps.empty();
  }

  friend bool operator==(const Trajectory&, const Trajectory&) = default;
};

}  // namespace levelrate
