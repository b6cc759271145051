#include <algorithm>
#include <cmath>
#include <cstring>
#include <numeric>
#include <random>
#include <sstream>

#include <gtest/gtest.h>

#include "levelrate/dataset.hpp"
#include "levelrate/landscape.hpp"
#include "levelrate/mlp.hpp"

namespace levelrate {
namespace {

TEST(Quadratic, ValuesAndGradient) {
  EXPECT_EQ(eval_quadratic(ParamVector{0, 0}), 0.0);
  EXPECT_EQ(grad_quadratic(ParamVector{0, 0}), (ParamVector{0, 0}));
  EXPECT_EQ(eval_quadratic(ParamVector{3, 4}), 12.5);
  EXPECT_EQ(grad_quadratic(ParamVector{3, 4}), (ParamVector{3, 4}));
  EXPECT_EQ(eval_quadratic(ParamVector{1}), 0.5);
  EXPECT_EQ(grad_quadratic(ParamVector{1}), (ParamVector{1}));
}

TEST(Quadratic, RejectsNonFiniteInput) {
  EXPECT_THROW(ParamVector({1.0, NAN}), InputError);
  EXPECT_THROW(eval_quadratic(ParamVector::unchecked({INFINITY})), InputError);
  EXPECT_THROW(quadratic(0), DimensionError);
}

TEST(Rosenbrock, KnownValues) {
  EXPECT_EQ(eval_rosenbrock(ParamVector{1, 1}), 0.0);
  EXPECT_EQ(eval_rosenbrock(ParamVector{0, 0}), 1.0);
  EXPECT_EQ(eval_rosenbrock(ParamVector{-1, 1}), 4.0);
  const ParamVector fd = finite_diff_grad(rosenbrock(), ParamVector{-1, 1}, 1e-6);
  const ParamVector g = grad_rosenbrock(ParamVector{-1, 1});
  EXPECT_LT(gradient_rel_error(g, fd), 1e-6);
  EXPECT_THROW(eval_rosenbrock(ParamVector{1, 2, 3}), DimensionError);
}

TEST(Himmelblau, KnownValues) {
  EXPECT_EQ(eval_himmelblau(ParamVector{3, 2}), 0.0);
  EXPECT_EQ(eval_himmelblau(ParamVector{0, 0}), 170.0);
  const ParamVector fd = finite_diff_grad(himmelblau(), ParamVector{1, 1}, 1e-6);
  const ParamVector g = grad_himmelblau(ParamVector{1, 1});
  EXPECT_LT(gradient_rel_error(g, fd), 1e-6);
  EXPECT_THROW(eval_himmelblau(ParamVector{1}), DimensionError);
}

TEST(FiniteDiff, Examples) {
  const ParamVector q = finite_diff_grad(quadratic(2), ParamVector{3, 4}, 1e-5);
  EXPECT_NEAR(q[0], 3.0, 1e-8);
  EXPECT_NEAR(q[1], 4.0, 1e-8);

  const ParamVector c = finite_diff_grad(constant_objective(3, 7.5), ParamVector{1, 2, 3}, 1e-4);
  for (double v : c) EXPECT_EQ(v, 0.0);

  const ParamVector r = finite_diff_grad(rosenbrock(), ParamVector{0, 0}, 1e-6);
  const ParamVector ra = grad_rosenbrock(ParamVector{0, 0});  // (-2, 0)
  EXPECT_LT(gradient_rel_error(ra, r), 1e-5);

  EXPECT_THROW(finite_diff_grad(quadratic(2), ParamVector{1, 1}, 0.0), ParameterError);
  EXPECT_THROW(finite_diff_grad(quadratic(2), ParamVector{1, 1}, -1e-3), ParameterError);
}

TEST(Objectives, AnalyticMatchesFiniteDifferenceEverywhere) {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(-5.5, 5.5);
  for (int k = 0; k < 200; ++k) {
    const ParamVector x{u(rng), u(rng)};
    EXPECT_LT(gradient_rel_error(grad_quadratic(x), finite_diff_grad(quadratic(2), x, 1e-5)), 1e-8);
    EXPECT_LT(gradient_rel_error(grad_rosenbrock(x), finite_diff_grad(rosenbrock(), x, 1e-6)), 1e-4);
    EXPECT_LT(gradient_rel_error(grad_himmelblau(x), finite_diff_grad(himmelblau(), x, 1e-6)), 1e-4);
  }
}

TEST(Objectives, EvaluationIsDeterministic) {
  const ParamVector x{0.123456789, -4.56789};
  for (const Objective& obj : {quadratic(2), rosenbrock(), himmelblau()}) {
    const double a = obj.eval(x);
    const double b = obj.eval(x);
    EXPECT_EQ(std::memcmp(&a, &b, sizeof a), 0) << obj.name;
  }
}

Dataset tiny_batch() {
  Dataset d;
  d.num_features = 2;
  d.num_classes = 2;
  d.push_back(std::vector<double>{0.5, -1.0}, 0);
  d.push_back(std::vector<double>{-0.3, 0.8}, 1);
  d.push_back(std::vector<double>{1.5, 0.2}, 1);
  return d;
}

TEST(Mlp, FlattenLayoutRoundTrips) {
  const MlpShape s{3, 4, 2};
  EXPECT_EQ(s.num_params(), 4u * 3 + 4 + 2 * 4 + 2);
  const ParamVector theta = mlp_init(s, 5, 1.0);
  const MlpParams p = MlpParams::unflatten(s, theta);
  EXPECT_EQ(p.flatten(), theta);
  EXPECT_EQ(p.w1[1], theta[1]);                    // W1 row 0, column 1
  EXPECT_EQ(p.w2[s.hidden + 2], theta[s.w2_offset() + s.hidden + 2]);  // W2 row 1, column 2
}

TEST(Mlp, ZeroWeightsGiveLogTwo) {
  const MlpShape s{2, 5, 2};
  const MlpParams zero(s);
  const auto r = mlp_loss_and_grad(zero, tiny_batch());
  EXPECT_NEAR(r.value, std::log(2.0), 1e-15);
  EXPECT_EQ(r.grad.size(), s.num_params());
}

TEST(Mlp, SingleSampleGradientMatchesFiniteDifferences) {
  Dataset one;
  one.num_features = 2;
  one.num_classes = 3;
  one.push_back(std::vector<double>{0.7, -1.3}, 2);
  const MlpShape s{2, 6, 3};
  const Objective obj = mlp_objective(s, one);
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const ParamVector theta = mlp_init(s, seed, 1.0);
    EXPECT_LT(gradient_rel_error(obj.gradient(theta), finite_diff_grad(obj, theta, 1e-5)), 1e-4);
  }
}

TEST(Mlp, DuplicatingSamplesLeavesLossAndGradient) {
  const MlpShape s{2, 4, 2};
  const ParamVector theta = mlp_init(s, 3, 1.0);
  const Dataset d = tiny_batch();
  Dataset doubled = d;
  for (std::size_t i = 0; i < d.size(); ++i) doubled.push_back(d.row(i), d.labels[i]);
  const auto a = mlp_loss_and_grad(s, theta, d);
  const auto b = mlp_loss_and_grad(s, theta, doubled);
  EXPECT_NEAR(a.value, b.value, 1e-15);
  EXPECT_LT(gradient_rel_error(a.grad, b.grad), 1e-14);
}

TEST(Mlp, PermutationInvariant) {
  const MlpShape s{2, 4, 2};
  const ParamVector theta = mlp_init(s, 8, 1.0);
  const Dataset d = make_imbalanced_blobs({50, 0.3, 2.0, 1.0, 4});
  std::vector<std::size_t> order(d.size());
  std::iota(order.begin(), order.end(), 0);
  std::shuffle(order.begin(), order.end(), std::mt19937_64(1));
  Dataset shuffled;
  shuffled.num_features = d.num_features;
  shuffled.num_classes = d.num_classes;
  for (std::size_t i : order) shuffled.push_back(d.row(i), d.labels[i]);
  const auto a = mlp_loss_and_grad(s, theta, d);
  const auto b = mlp_loss_and_grad(s, theta, shuffled);
  EXPECT_NEAR(a.value, b.value, 1e-13);
  EXPECT_LT(gradient_rel_error(a.grad, b.grad), 1e-12);
}

TEST(Mlp, LabelOutOfRangeIsDataError) {
  const MlpShape s{2, 3, 2};
  Dataset d = tiny_batch();
  d.labels[1] = 2;
  EXPECT_THROW(mlp_loss_and_grad(s, ParamVector(s.num_params(), 0.1), d), DataError);
  Dataset empty;
  empty.num_features = 2;
  empty.num_classes = 2;
  EXPECT_THROW(mlp_loss_and_grad(s, ParamVector(s.num_params(), 0.1), empty), DataError);
}

TEST(Mlp, ReluMarginIsSmallestPreactivation) {
  const MlpShape s{2, 2, 2};
  ParamVector theta(s.num_params(), 0.0);
  theta[s.w1_offset()] = 1.0;      // z1[0] = x0
  theta[s.w1_offset() + 3] = 2.0;  // z1[1] = 2 x1
  theta[s.b1_offset() + 1] = 0.5;  // z1[1] = 2 x1 + 0.5
  Dataset d;
  d.num_features = 2;
  d.num_classes = 2;
  d.push_back(std::vector<double>{0.3, -0.2}, 0);
  d.push_back(std::vector<double>{-0.7, 0.1}, 1);
  EXPECT_NEAR(mlp_relu_margin(s, theta, d), 0.1, 1e-15);
}

TEST(Mlp, SliceFreezesOtherCoordinates) {
  const MlpShape s{2, 3, 2};
  const Objective full = mlp_objective(s, tiny_batch());
  const ParamVector anchor = mlp_init(s, 2, 1.0);
  const Objective sl = slice_2d(full, anchor, 0, 7);
  ParamVector probe = anchor;
  probe[0] = 0.25;
  probe[7] = -0.5;
  EXPECT_EQ(sl.eval(ParamVector{0.25, -0.5}), full.eval(probe));
  const ParamVector g = full.grad(probe);
  EXPECT_EQ(sl.grad(ParamVector{0.25, -0.5}), ParamVector::unchecked({g[0], g[7]}));
  EXPECT_THROW(slice_2d(full, anchor, 3, 3), ParameterError);
}

TEST(Dataset, ParsesTwoRowFile) {
  std::istringstream in("x1,x2,label\n0.5,1.0,0\n-2,3e-1,1\n");
  const Dataset d = parse_dataset_csv(in);
  EXPECT_EQ(d.size(), 2u);
  EXPECT_EQ(d.num_classes, 2u);
  const auto hist = class_histogram(d);
  EXPECT_EQ(hist.at(0), 1u);
  EXPECT_EQ(hist.at(1), 1u);
  EXPECT_EQ(d.row(1)[1], 0.3);
}

TEST(Dataset, AcceptsCrlf) {
  std::istringstream in("a,b,label\r\n1,2,1\r\n3,4,0\r\n");
  const Dataset d = parse_dataset_csv(in);
  EXPECT_EQ(d.size(), 2u);
  EXPECT_EQ(d.labels[0], 1);
  EXPECT_EQ(d.row(1)[1], 4.0);
}

TEST(Dataset, NonNumericFeatureNamesLine) {
  std::istringstream in("x1,x2,label\n0.5,1.0,0\n0.1,abc,1\n");
  try {
    parse_dataset_csv(in, "data.csv");
    FAIL() << "expected DataError";
  } catch (const DataError& e) {
    EXPECT_NE(std::string(e.what()).find("data.csv:3"), std::string::npos) << e.what();
  }
}

TEST(Dataset, EmptyAndMalformedInputs) {
  std::istringstream empty("");
  EXPECT_THROW(parse_dataset_csv(empty), DataError);
  std::istringstream header_only("x,label\n");
  EXPECT_THROW(parse_dataset_csv(header_only), DataError);
  std::istringstream no_label("x,y\n1,2\n");
  EXPECT_THROW(parse_dataset_csv(no_label), DataError);
  std::istringstream ragged("x,label\n1,0,3\n");
  EXPECT_THROW(parse_dataset_csv(ragged), DataError);
  std::istringstream negative("x,label\n1,-1\n");
  EXPECT_THROW(parse_dataset_csv(negative), DataError);
}

TEST(Dataset, SyntheticBlobsHaveExactImbalance) {
  const Dataset d = make_imbalanced_blobs({1000, 0.1, 2.0, 1.0, 42});
  const auto hist = class_histogram(d);
  EXPECT_EQ(hist.at(0), 900u);
  EXPECT_EQ(hist.at(1), 100u);
  const Dataset again = make_imbalanced_blobs({1000, 0.1, 2.0, 1.0, 42});
  EXPECT_EQ(d.features, again.features);
  EXPECT_EQ(d.labels, again.labels);
}

}  // namespace
}  // namespace levelrate
