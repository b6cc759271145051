#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "levelrate/landscape.hpp"
#include "levelrate/optimizer.hpp"
#include "oracles.hpp"

namespace levelrate {
namespace {

TEST(GdStep, Examples) {
  EXPECT_EQ(gd_step(ParamVector{1, 2}, ParamVector{0, 0}, 0.3), (ParamVector{1, 2}));
  EXPECT_EQ(gd_step(ParamVector{1, 1}, ParamVector{1, 1}, 1.0), (ParamVector{0, 0}));
  EXPECT_THROW(gd_step(ParamVector{1, 1}, ParamVector{1}, 1.0), DimensionError);
  EXPECT_THROW(gd_step(ParamVector{1}, ParamVector{1}, 0.0), ParameterError);
}

TEST(GdStep, ClosedFormContractionOnQuadratic) {
  const Objective q = quadratic(1);
  ParamVector x{10.0};
  for (int k = 0; k < 100; ++k) x = gd_step(x, q.gradient(x), 0.1);
  EXPECT_NEAR(std::fabs(x[0]), 10.0 * std::pow(0.9, 100), 1e-9);
}

TEST(GdStep, SplitGradientComposes) {
  std::mt19937_64 rng(1);
  std::normal_distribution<double> n(0.0, 1.0);
  for (int k = 0; k < 200; ++k) {
    const ParamVector x{n(rng), n(rng)}, g1{n(rng), n(rng)}, g2{n(rng), n(rng)};
    const ParamVector sum{g1[0] + g2[0], g1[1] + g2[1]};
    const ParamVector once = gd_step(x, sum, 0.37);
    const ParamVector twice = gd_step(gd_step(x, g1, 0.37), g2, 0.37);
    EXPECT_NEAR(once[0], twice[0], 1e-14);
    EXPECT_NEAR(once[1], twice[1], 1e-14);
  }
}

TEST(AdaptiveGdStep, Examples) {
  const Objective q = quadratic(2);
  EXPECT_EQ(adaptive_gd_step(ParamVector{0, 0}, q), (ParamVector{0, 0}));
  const ParamVector x = adaptive_gd_step(ParamVector{3, 4}, q);
  EXPECT_NEAR(x[0], 2.5, 1e-15);
  EXPECT_NEAR(x[1], 10.0 / 3.0, 1e-15);
  ParamVector y{-5.0, 2.0};
  double prev = norm(y);
  for (int k = 0; k < 100; ++k) {
    y = adaptive_gd_step(y, q);
    // The contraction factor |x| / (1 + |x|) shrinks, so x reaches exactly 0.
    if (prev > 0.0) {
      EXPECT_LT(norm(y), prev);
    } else {
      EXPECT_EQ(norm(y), 0.0);
    }
    prev = norm(y);
  }
}

TEST(Tuner, InitialState) {
  const ParamVector x0{0.25, -7.5, 3.0};
  const TunerState st = tuner_init(x0, {});
  EXPECT_EQ(st.x_ref, x0);
  for (const auto* vec : {&st.m, &st.v, &st.r, &st.s}) {
    ASSERT_EQ(vec->size(), 6u);
    for (double e : *vec) EXPECT_EQ(e, 0.0);
  }
  for (double d : st.delta) EXPECT_EQ(d, 0.0);
  EXPECT_EQ(st.iterate(), x0);
}

TEST(Tuner, ConfigValidation) {
  TunerConfig c;
  c.betas = {};
  EXPECT_THROW(c.validate(), ConfigError);
  c.betas = {0.5, 1.2};
  EXPECT_THROW(c.validate(), ConfigError);
  c = {};
  c.s_init = 0.0;
  EXPECT_THROW(c.validate(), ConfigError);
  c = {};
  c.eps = -1.0;
  EXPECT_THROW(c.validate(), ConfigError);
}

TEST(Tuner, DefaultsAreTheDocumentedOnes) {
  const TunerConfig c;
  const std::vector<double> betas{0.9, 0.99, 0.999, 0.9999, 0.99999, 0.999999};
  EXPECT_EQ(c.betas, betas);
  EXPECT_EQ(c.lambda, 0.01);
  EXPECT_EQ(c.s_init, 1e-8);
  EXPECT_EQ(c.eps, 1e-8);
}

TEST(Tuner, FirstStepMatchesHandTrace) {
  // 1-D quadratic from x0 = 1 with u = -0.1 g. At Delta = 0: h = lambda |g| / |x| = 0.01,
  // m = 0.01, v = 1e-4, r = 0, W = 1e-8 * 0.01 / 6, s = W / (0.01 + 1e-8) per beta.
  const TunerConfig cfg;
  const Objective q = quadratic(1);
  const TunerState st = tuner_init(ParamVector{1.0}, cfg);
  const ParamVector g = q.gradient(st.iterate());
  const auto res = tuner_step(st, g, ParamVector{-0.1 * g[0]}, cfg);
  EXPECT_EQ(res.h, 0.01);
  const double s_each = (1e-8 * 0.01 / 6.0) / (0.01 + 1e-8);
  EXPECT_NEAR(res.x_next[0], 1.0 - 0.1 * 6.0 * s_each, 1e-15);
  EXPECT_NEAR(res.x_next[0], 1.0 - 0.1 * 1e-8 / (1.0 + 1e-6), 1e-15);

  oracle::ScalarTuner ref(1.0);
  EXPECT_NEAR(res.x_next[0], ref.step(g[0], -0.1 * g[0]), 1e-12);
  for (int i = 0; i < 6; ++i) {
    EXPECT_NEAR(res.state.m[i], ref.m[i], 1e-12);
    EXPECT_NEAR(res.state.v[i], ref.v[i], 1e-12);
    EXPECT_NEAR(res.state.r[i], ref.r[i], 1e-12);
    EXPECT_NEAR(res.state.s[i], ref.s[i], 1e-12);
  }
}

TEST(Tuner, ManyStepsMatchScalarTranscription) {
  const TunerConfig cfg;
  const Objective q = quadratic(1);
  for (double x0 : {1.0, -3.0, 0.2}) {
    TunerState st = tuner_init(ParamVector{x0}, cfg);
    oracle::ScalarTuner ref(x0);
    for (int t = 0; t < 500; ++t) {
      const ParamVector g = q.gradient(st.iterate());
      const double u = -0.1 * std::exp(-0.01 * t) * g[0];
      const double expect = ref.step(g[0], u);
      const auto res = tuner_step(st, g, ParamVector{u}, cfg);
      ASSERT_NEAR(res.x_next[0], expect, 1e-12 * (1 + std::fabs(expect))) << "x0=" << x0 << " t=" << t;
      for (int i = 0; i < 6; ++i) ASSERT_NEAR(res.state.s[i], ref.s[i], 1e-12 * (1 + ref.s[i]));
      st = res.state;
    }
  }
}

TEST(Tuner, ZeroSignalNeverMoves) {
  TunerConfig cfg;
  cfg.lambda = 0.0;
  const ParamVector x0{2.0, -1.0};
  TunerState st = tuner_init(x0, cfg);
  for (int t = 0; t < 50; ++t) {
    // Delta starts at 0 and g = 0, so h = 0 and every scale stays 0.
    const auto res = tuner_step(st, ParamVector{0.0, 0.0}, ParamVector{0.3, -0.2}, cfg);
    EXPECT_EQ(res.h, 0.0);
    EXPECT_EQ(res.x_next, x0);
    st = res.state;
  }
}

TEST(Tuner, StateStaysNonNegativeAndFinite) {
  const TunerConfig cfg;
  std::mt19937_64 rng(99);
  std::normal_distribution<double> n(0.0, 1.0);
  TunerState st = tuner_init(ParamVector{n(rng), n(rng), n(rng)}, cfg);
  for (int t = 0; t < 10000; ++t) {
    const ParamVector g{n(rng), n(rng), n(rng)};
    const ParamVector u{0.05 * n(rng), 0.05 * n(rng), 0.05 * n(rng)};
    auto res = tuner_step(st, g, u, cfg);
    for (std::size_t i = 0; i < 6; ++i) {
      ASSERT_GE(res.state.m[i], 0.0);
      ASSERT_GE(res.state.v[i], 0.0);
      ASSERT_GE(res.state.r[i], 0.0);
      ASSERT_GE(res.state.s[i], 0.0);
    }
    ASSERT_TRUE(std::isfinite(res.state.scale()));
    ASSERT_TRUE(res.x_next.all_finite());
    st = std::move(res.state);
  }
}

TEST(Tuner, RejectsMismatchedAndNonFiniteInputs) {
  const TunerConfig cfg;
  const TunerState st = tuner_init(ParamVector{1.0, 1.0}, cfg);
  EXPECT_THROW(tuner_step(st, ParamVector{1.0}, ParamVector{1.0, 1.0}, cfg), DimensionError);
  EXPECT_THROW(tuner_step(st, ParamVector::unchecked({INFINITY, 0.0}), ParamVector{0.0, 0.0}, cfg), NumericalError);
}

TEST(RunTraining, StepCounts) {
  const Objective q = quadratic(2);
  Method m;
  EXPECT_THROW(run_training(q, m, 0, ParamVector{1, 1}), ParameterError);
  const auto one = run_training(q, m, 1, ParamVector{1, 1});
  ASSERT_EQ(one.trajectory.size(), 2u);
  EXPECT_EQ(one.trajectory.steps[0].t, 0u);
  EXPECT_EQ(one.trajectory.steps[1].t, 1u);
  EXPECT_EQ(one.status, RunStatus::Completed);
  EXPECT_THROW(run_training(q, m, 3, ParamVector{1, 1, 1}), DimensionError);
}

TEST(RunTraining, ExpDecayDescendsOnQuadratic) {
  Method m;
  m.schedule = {0.5, 0.01};
  const auto res = run_training(quadratic(2), m, 200, ParamVector{3, -4});
  ASSERT_EQ(res.trajectory.size(), 201u);
  EXPECT_LT(res.trajectory.back().loss, res.trajectory.front().loss);
  const auto& r0 = res.trajectory.front();
  EXPECT_EQ(r0.rate, 0.5);
  EXPECT_EQ(r0.loss, 12.5);
  EXPECT_EQ(r0.grad_norm, 5.0);
  EXPECT_EQ(r0.lyapunov_rate, -12.5);
}

TEST(RunTraining, Deterministic) {
  for (MethodKind k : {MethodKind::Fixed, MethodKind::ExpDecay, MethodKind::Adaptive, MethodKind::Tuner}) {
    Method m;
    m.kind = k;
    const auto a = run_training(rosenbrock(), m, 300, ParamVector{-1.2, 1.0});
    const auto b = run_training(rosenbrock(), m, 300, ParamVector{-1.2, 1.0});
    EXPECT_EQ(a.trajectory, b.trajectory) << to_string(k);
  }
}

TEST(RunTraining, TunerReportsScaledRate) {
  Method m;
  m.kind = MethodKind::Tuner;
  const auto res = run_training(quadratic(2), m, 20, ParamVector{5, 5});
  const auto& steps = res.trajectory.steps;
  EXPECT_EQ(steps[0].rate, 0.0);  // no scale before the first step
  EXPECT_EQ(steps[0].lyapunov_rate, 0.0);
  for (std::size_t k = 1; k < steps.size(); ++k) {
    EXPECT_GT(steps[k].rate, 0.0);
    EXPECT_LE(steps[k].lyapunov_rate, 0.0);
  }
}

TEST(RunTraining, TunerShrinksQuadraticLoss) {
  Method m;
  m.kind = MethodKind::Tuner;
  const auto res = run_training(quadratic(2), m, 5000, ParamVector{5, 5}, {false, {}});
  EXPECT_EQ(res.status, RunStatus::Completed);
  EXPECT_LT(res.trajectory.back().loss, 0.01 * res.trajectory.front().loss);
}

TEST(RunTraining, DivergenceKeepsPartialTrajectory) {
  Method m;
  m.kind = MethodKind::Fixed;
  m.fixed_rate = 10.0;
  const auto res = run_training(rosenbrock(), m, 200, ParamVector{-1.2, 1.0});
  EXPECT_EQ(res.status, RunStatus::Diverged);
  EXPECT_LT(res.trajectory.size(), 201u);
  EXPECT_GE(res.trajectory.size(), 2u);
  EXPECT_FALSE(res.message.empty());
}

TEST(RunTraining, ModulationScalesLossAndGradient) {
  Method m;
  m.kind = MethodKind::Fixed;
  m.fixed_rate = 0.1;
  TrainingOptions opts;
  opts.modulation = [](double) { return 2.0; };
  const auto res = run_training(quadratic(1), m, 1, ParamVector{1.0}, opts);
  EXPECT_EQ(res.trajectory.steps[0].loss, 1.0);
  EXPECT_EQ(res.trajectory.steps[0].grad_norm, 2.0);
  EXPECT_NEAR(res.trajectory.steps[1].x[0], 0.8, 1e-15);
}

}  // namespace
}  // namespace levelrate
