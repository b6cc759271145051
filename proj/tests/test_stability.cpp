#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "levelrate/landscape.hpp"
#include "levelrate/optimizer.hpp"
#include "levelrate/stability.hpp"

namespace levelrate {
namespace {

Trajectory from_losses(const std::vector<double>& losses) {
  Trajectory t;
  for (std::size_t k = 0; k < losses.size(); ++k) t.steps.push_back({k, losses[k], 0.0, 0.0, 0.0, {}});
  return t;
}

Trajectory adaptive_run(ParamVector x, std::size_t steps) {
  Method m;
  m.kind = MethodKind::Adaptive;
  return run_training(quadratic(x.size()), m, steps, x).trajectory;
}

TEST(LyapunovRate, Examples) {
  EXPECT_EQ(lyapunov_rate(0.3, ParamVector{0, 0}), 0.0);
  EXPECT_NEAR(lyapunov_rate(0.1, ParamVector{0, 2}), -0.4, 1e-16);
  EXPECT_THROW(lyapunov_rate(0.0, ParamVector{1}), ParameterError);
  EXPECT_THROW(lyapunov_rate(-0.1, ParamVector{1}), ParameterError);
}

TEST(LyapunovRate, NeverPositive) {
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> a(1e-6, 5.0);
  std::normal_distribution<double> n(0.0, 3.0);
  for (int k = 0; k < 1000; ++k) {
    const ParamVector g{n(rng), n(rng)};
    EXPECT_LE(lyapunov_rate(a(rng), g), 0.0);
  }
}

TEST(PredictedDescent, Examples) {
  EXPECT_EQ(predicted_descent(5.0, ParamVector{1, 0}), 4.5);
  EXPECT_EQ(predicted_descent(5.0, ParamVector{0, 0}), 5.0);
  std::mt19937_64 rng(8);
  std::normal_distribution<double> n(0.0, 4.0);
  for (int k = 0; k < 500; ++k) {
    const ParamVector g{n(rng), n(rng)};
    EXPECT_LE(predicted_descent(1.0, g), 1.0);
  }
}

TEST(PredictedDescent, AdaptiveStepOnQuadraticWithinSecondOrderTerm) {
  const Objective q = quadratic(2);
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> u(-6, 6);
  for (int k = 0; k < 300; ++k) {
    const ParamVector x{u(rng), u(rng)};
    const ParamVector g = q.gradient(x);
    const double eta = 1.0 / (1.0 + std::hypot(g[0], g[1]));
    // Exact: L(x - eta x) = (1 - eta)^2 |x|^2 / 2.
    const double exact = 0.5 * (1 - eta) * (1 - eta) * (x[0] * x[0] + x[1] * x[1]);
    const double new_loss = q.value(adaptive_gd_step(x, q));
    EXPECT_NEAR(new_loss, exact, 1e-12 * (1 + exact));
    const double bound = predicted_descent(q.value(x), g) + 0.5 * eta * eta * (g[0] * g[0] + g[1] * g[1]);
    EXPECT_LE(new_loss, bound + 1e-12 * (1 + bound));
  }
}

TEST(CheckMonotone, Examples) {
  const auto flat = check_monotone(from_losses({2, 2, 2, 2}));
  EXPECT_TRUE(flat.monotone);
  EXPECT_EQ(flat.steps_checked, 3u);
  EXPECT_EQ(flat.max_violation, 0.0);

  const auto rising = check_monotone(from_losses({1, 2, 3, 4, 5}), 0.0);
  EXPECT_FALSE(rising.monotone);
  ASSERT_EQ(rising.violations.size(), 4u);
  for (std::size_t k = 0; k < 4; ++k) {
    EXPECT_EQ(rising.violations[k].t, k);
    EXPECT_EQ(rising.violations[k].observed_change, 1.0);
  }
  EXPECT_EQ(rising.max_violation, 1.0);

  EXPECT_THROW(check_monotone(from_losses({1})), InputError);
  EXPECT_THROW(check_monotone(from_losses({1, 0}), -1.0), ParameterError);
}

TEST(CheckMonotone, ToleranceAndNaN) {
  EXPECT_TRUE(check_monotone(from_losses({1.0, 1.0 + 1e-13}), 1e-12).monotone);
  EXPECT_FALSE(check_monotone(from_losses({1.0, 1.0 + 1e-11}), 1e-12).monotone);
  const auto nan = check_monotone(from_losses({1.0, NAN}));
  EXPECT_FALSE(nan.monotone);
}

TEST(CheckMonotone, AdaptiveDescentOnQuadraticIsMonotoneAtZeroTolerance) {
  const auto traj = adaptive_run(ParamVector{4.0, -3.0, 1.5}, 100);
  ASSERT_EQ(traj.size(), 101u);
  const auto report = check_monotone(traj, 0.0);
  EXPECT_TRUE(report.monotone) << report.violations.size() << " violations";
}

TEST(CheckMonotone, GdStepDescentMatchesExactAlgebra) {
  // On the unit quadratic one gd step changes L by exactly -alpha (1 - alpha/2) |g|^2.
  const Objective q = quadratic(2);
  std::mt19937_64 rng(6);
  std::uniform_real_distribution<double> u(-5, 5), a(0.01, 1.0);
  for (int k = 0; k < 300; ++k) {
    const ParamVector x{u(rng), u(rng)};
    const double alpha = a(rng);
    const ParamVector g = q.gradient(x);
    const double g2 = squared_norm(g);
    const double change = q.value(gd_step(x, g, alpha)) - q.value(x);
    EXPECT_LE(change, 0.0);
    const double lyap = lyapunov_rate(alpha, g);
    EXPECT_NEAR(change, lyap * (1 - alpha / 2), 1e-12 * (1 + g2));
    if (g2 > 0) {
      const double ratio = change / lyap;
      EXPECT_LE(ratio, 1.0 + 1e-12);
      EXPECT_GE(ratio, (1.0 - alpha / 2) - 1e-12);
    }
  }
}

TEST(Boundedness, Examples) {
  Trajectory still;
  for (std::size_t k = 0; k < 5; ++k) still.steps.push_back({k, 0.0, 0.0, 0.0, 0.0, {0.3, 0.4}});
  const ParamVector origin{0, 0};
  EXPECT_TRUE(boundedness_check(still, origin, 1.0, 0.51));
  EXPECT_FALSE(boundedness_check(still, origin, 1.0, 0.5));
  // x0 at distance 0.5 lies outside delta = 0.4, so the premise fails.
  EXPECT_TRUE(boundedness_check(still, origin, 0.4, 0.01));

  const auto no_x = from_losses({1, 0});
  EXPECT_THROW(boundedness_check(no_x, origin, 1.0, 1.0), InputError);
  EXPECT_THROW(boundedness_check(still, origin, 0.0, 1.0), ParameterError);
  EXPECT_THROW(boundedness_check(still, ParamVector{0, 0, 0}, 1.0, 1.0), DimensionError);
}

TEST(Boundedness, AdaptiveDescentStaysInBall) {
  std::mt19937_64 rng(12);
  std::uniform_real_distribution<double> u(-0.7, 0.7);
  for (int k = 0; k < 20; ++k) {
    const auto traj = adaptive_run(ParamVector{u(rng), u(rng)}, 50);
    EXPECT_TRUE(boundedness_check(traj, ParamVector{0, 0}, 1.0, 1.01));
  }
}

}  // namespace
}  // namespace levelrate
