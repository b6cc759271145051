#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "levelrate/schedule.hpp"

namespace levelrate {
namespace {

TEST(ExpDecay, Examples) {
  const ExpDecaySchedule s{0.1, std::log(2.0)};
  EXPECT_EQ(exp_decay(s, 0.0), 0.1);
  EXPECT_NEAR(exp_decay(s, 1.0), 0.05, 1e-15);
  EXPECT_NEAR(exp_decay_half_life(s), 1.0, 1e-15);
  EXPECT_THROW(exp_decay(s, -1e-9), ParameterError);
  EXPECT_THROW(exp_decay({0.0, 1.0}, 1.0), ParameterError);
  EXPECT_THROW(exp_decay({0.1, -0.5}, 1.0), ParameterError);
}

TEST(ExpDecay, ExponentialLaw) {
  const ExpDecaySchedule s{0.3, 0.07};
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(0.0, 40.0);
  for (int k = 0; k < 200; ++k) {
    const double t1 = u(rng), t2 = u(rng);
    EXPECT_NEAR(exp_decay(s, t1 + t2), exp_decay(s, t1) * exp_decay(s, t2) / s.initial_rate, 1e-12);
  }
}

TEST(ExpDecay, PositiveAndDecreasingOnLadder) {
  const ExpDecaySchedule s{0.5, 0.01};
  double prev = exp_decay(s, 0.0);
  for (int t = 1; t <= 1000; ++t) {
    const double a = exp_decay(s, t);
    EXPECT_GT(a, 0.0);
    EXPECT_LT(a, prev);
    prev = a;
  }
}

TEST(ExpDecayDerivative, Examples) {
  const ExpDecaySchedule s{0.2, 0.3};
  EXPECT_NEAR(exp_decay_derivative(s, 0.0), -0.06, 1e-17);
  EXPECT_THROW(exp_decay_derivative(s, -1.0), ParameterError);
  for (double t : {0.5, 1.0, 3.0, 10.0, 25.0}) {
    const double h = 1e-6;
    const double fd = (exp_decay(s, t + h) - exp_decay(s, t - h)) / (2 * h);
    const double d = exp_decay_derivative(s, t);
    EXPECT_LT(d, 0.0);
    EXPECT_LT(std::fabs(d - fd) / std::fabs(d), 1e-6) << "t=" << t;
    EXPECT_NEAR(d / exp_decay(s, t), -0.3, 1e-12);
  }
}

TEST(GradAdaptiveRate, Examples) {
  EXPECT_EQ(grad_adaptive_rate(ParamVector{0, 0}), 1.0);
  EXPECT_EQ(grad_adaptive_rate(ParamVector{0, 3}), 0.25);
  EXPECT_EQ(grad_adaptive_rate(ParamVector{1}), 0.5);
  EXPECT_THROW(grad_adaptive_rate(ParamVector::unchecked({1.0, NAN})), InputError);
}

TEST(GradAdaptiveRate, ReciprocalIdentityAndMonotone) {
  std::mt19937_64 rng(17);
  std::normal_distribution<double> n(0.0, 10.0);
  for (int k = 0; k < 1000; ++k) {
    const ParamVector g{n(rng), n(rng), n(rng)};
    const double eta = grad_adaptive_rate(g);
    EXPECT_GT(eta, 0.0);
    EXPECT_LE(eta, 1.0);
    EXPECT_NEAR(eta * (1.0 + norm(g)), 1.0, 1e-12);
    const ParamVector bigger{2 * g[0], 2 * g[1], 2 * g[2]};
    if (norm(g) > 0) {
      EXPECT_LT(grad_adaptive_rate(bigger), eta);
    }
  }
}

}  // namespace
}  // namespace levelrate
