#include <cmath>

#include <gtest/gtest.h>

#include "dpc/attribution.hpp"
#include "dpc/image.hpp"
#include "test_util.hpp"

using namespace dpc;
using fixtures::vec;

namespace {

double logit_gap(const Model& m, const Eigen::VectorXd& x, const Eigen::VectorXd& b) {
  return forward_score<double>(m, x, TargetClass::positive, ScoreKind::logit) -
         forward_score<double>(m, b, TargetClass::positive, ScoreKind::logit);
}

}  // namespace

TEST(HyperParams, CanonicalIsKeySorted) {
  HyperParams hp;
  hp.set("sigma", 0.25).set("alpha", 1).set("flag", true).set("fill", "segment-mean");
  EXPECT_EQ(hp.canonical(), "alpha=1;fill=segment-mean;flag=true;sigma=0.25");
  EXPECT_DOUBLE_EQ(hp.number("sigma"), 0.25);
  EXPECT_TRUE(hp.flag("flag"));
  EXPECT_EQ(hp.text("fill"), "segment-mean");
  HyperParams other;
  other.set("flag", true).set("fill", "segment-mean").set("alpha", 1.0).set("sigma", 0.25);
  EXPECT_EQ(hp.hash(), other.hash());
  EXPECT_THROW(hp.number("missing"), std::out_of_range);
}

TEST(Gradient, DimensionMismatchThrows) {
  const Model m = fixtures::linear_model({1, 2});
  EXPECT_THROW(gradient_attribution(m, vec({1, 2, 3}), TargetClass::positive), std::invalid_argument);
}

TEST(GuidedBackpropAttribution, LinearEqualsGradient) {
  const Model m = fixtures::linear_model({1, -2, 0.5});
  const Eigen::VectorXd x = vec({1, 1, -3});
  EXPECT_EQ(guided_backprop_attribution(m, x, TargetClass::negative).values,
            gradient_attribution(m, x, TargetClass::negative).values);
}

TEST(SmoothGrad, LinearModelIsExactlyWeights) {
  const Model m = fixtures::linear_model({0.3, -1.2, 4.0});
  for (double sigma : {0.01, 0.5, 2.0})
    for (int n : {1, 7, 64}) {
      const auto a = smoothgrad(m, vec({1, 2, 3}), TargetClass::positive, sigma, n, RandomStream(1));
      EXPECT_LT((a.values - vec({0.3, -1.2, 4.0})).cwiseAbs().maxCoeff(), 1e-15);
    }
}

TEST(SmoothGrad, TinyNoiseEqualsGradient) {
  const Model m = fixtures::random_mlp(RandomStream(5), 6);
  const Eigen::VectorXd x = fixtures::random_vector(RandomStream(6), 6);
  const auto a = smoothgrad(m, x, TargetClass::positive, 1e-12, 1, RandomStream(7));
  EXPECT_LT((a.values - gradient_attribution(m, x, TargetClass::positive).values).cwiseAbs().maxCoeff(), 1e-6);
}

TEST(SmoothGrad, MonteCarloErrorShrinksWithSamples) {
  const Model m = fixtures::random_mlp(RandomStream(8), 5, {16, 16});
  const Eigen::VectorXd x = fixtures::random_vector(RandomStream(9), 5, 0.3);
  auto spread = [&](int n) {
    double total = 0;
    for (std::uint64_t r = 0; r < 20; ++r) {
      const auto a = smoothgrad(m, x, TargetClass::positive, 0.1, n, RandomStream(100 + r));
      const auto b = smoothgrad(m, x, TargetClass::positive, 0.1, n, RandomStream(200 + r));
      total += (a.values - b.values).norm();
    }
    return total / 20;
  };
  const double small = spread(32), large = spread(512);
  // Expected ratio is sqrt(512 / 32) = 4.
  EXPECT_GT(small / large, 2.5);
  EXPECT_LT(small / large, 6.0);
}

TEST(VarGrad, LinearModelIsZero) {
  const Model m = fixtures::linear_model({1, 2, 3});
  const auto a = vargrad(m, vec({0.5, -1, 2}), TargetClass::positive, 0.5, 16, RandomStream(3));
  EXPECT_LT(a.values.cwiseAbs().maxCoeff(), 1e-24);
  EXPECT_THROW(vargrad(m, vec({0, 0, 0}), TargetClass::positive, 0.5, 1, RandomStream(3)), std::invalid_argument);
}

TEST(IntegratedGradients, LinearFlagOnIsExact) {
  const Model m = fixtures::linear_model({1.5, -2, 0.25}, 0.3);
  const Eigen::VectorXd x = vec({1, 2, -4}), b = vec({0.5, -1, 1});
  for (int steps : {1, 3, 64}) {
    const auto a = integrated_gradients(m, x, TargetClass::positive, b, steps, true);
    EXPECT_LT((a.values - (x - b).cwiseProduct(vec({1.5, -2, 0.25}))).cwiseAbs().maxCoeff(), 1e-14);
    EXPECT_NEAR(a.values.sum(), logit_gap(m, x, b), 1e-12);
    EXPECT_EQ(a.flavor, Flavor::baseline_oriented);
  }
}

TEST(IntegratedGradients, LinearFlagOffIsGradient) {
  const Model m = fixtures::linear_model({1.5, -2});
  const auto a = integrated_gradients(m, vec({3, 4}), TargetClass::positive, vec({0, 0}), 16, false);
  EXPECT_LT((a.values - vec({1.5, -2})).cwiseAbs().maxCoeff(), 1e-14);
  EXPECT_EQ(a.flavor, Flavor::local);
}

TEST(IntegratedGradients, ZeroPathGivesZero) {
  const Model m = fixtures::random_mlp(RandomStream(1), 4);
  const Eigen::VectorXd x = fixtures::random_vector(RandomStream(2), 4);
  EXPECT_EQ(integrated_gradients(m, x, TargetClass::positive, x, 64, true).values, Eigen::VectorXd::Zero(4));
}

TEST(IntegratedGradients, CompletenessResidualWithinMidpointBound) {
  const RandomStream root(41);
  for (int trial = 0; trial < 10; ++trial) {
    const RandomStream s = root.child(static_cast<std::uint64_t>(trial));
    const Model m = fixtures::random_mlp(s.child("net"), 6, {12, 12});
    const Eigen::VectorXd x = fixtures::random_vector(s.child("x"), 6);
    const Eigen::VectorXd zero = Eigen::VectorXd::Zero(6);
    const double gap = logit_gap(m, x, zero);
    const double tv = fixtures::path_variation(m, x, zero);
    const double coarse = std::abs(integrated_gradients(m, x, TargetClass::positive, zero, 64, true).values.sum() - gap);
    const double fine = std::abs(integrated_gradients(m, x, TargetClass::positive, zero, 4096, true).values.sum() - gap);
    EXPECT_LE(coarse, tv / 128 + 1e-9);
    EXPECT_LE(fine, tv / 8192 + 1e-9);
    EXPECT_LE(fine, coarse + 1e-12);
  }
}

TEST(IntegratedGradients, SmoothSegmentsConvergeQuadratically) {
  // A linear model under the probability score has a smooth integrand, where
  // the midpoint rule is O(n^-2).
  const Model m = Model::linear(vec({0.7, -1.2, 0.4}), 0.1);
  const Eigen::VectorXd x = vec({1.5, 0.5, -2}), zero = Eigen::VectorXd::Zero(3);
  const double gap = forward_score<double>(m, x, TargetClass::positive, ScoreKind::probability) -
                     forward_score<double>(m, zero, TargetClass::positive, ScoreKind::probability);
  const auto residual = [&](int n) {
    return std::abs(
        integrated_gradients(m, x, TargetClass::positive, zero, n, true, ScoreKind::probability).values.sum() - gap);
  };
  const double r16 = residual(16), r64 = residual(64);
  EXPECT_LT(r64, 1e-3 * std::abs(gap));
  EXPECT_NEAR(r16 / r64, 16.0, 1.0);
}

TEST(LimeTabular, RecoversLocalProbabilitySlope) {
  const Eigen::VectorXd w = vec({1.0, -2.0, 0.5, 3.0});
  const Model m = Model::linear(w, 0.0);
  LimeTabularConfig cfg;
  cfg.alpha = 1e-4;
  cfg.perturbation_std = 0.01;
  cfg.n_samples = 1024;
  const auto a = lime_tabular(m, Eigen::VectorXd::Zero(4), TargetClass::positive, cfg, RandomStream(12));
  for (int i = 0; i < 4; ++i) EXPECT_NEAR(a.values[i], 0.25 * w[i], 0.1 * 0.25 * std::abs(w[i]));
}

TEST(LimeTabular, HugePenaltyIsDegenerate) {
  const Model m = fixtures::random_mlp(RandomStream(3), 5);
  LimeTabularConfig cfg;
  cfg.alpha = 1e9;
  const auto a = lime_tabular(m, fixtures::random_vector(RandomStream(4), 5), TargetClass::positive, cfg,
                              RandomStream(5));
  EXPECT_LT(a.values.cwiseAbs().maxCoeff(), 1e-6);
}

TEST(LimeTabular, DeterministicForStream) {
  const Model m = fixtures::random_mlp(RandomStream(3), 5);
  const Eigen::VectorXd x = fixtures::random_vector(RandomStream(4), 5);
  const auto a = lime_tabular(m, x, TargetClass::positive, {}, RandomStream(5));
  const auto b = lime_tabular(m, x, TargetClass::positive, {}, RandomStream(5));
  EXPECT_EQ(a.values, b.values);
  LimeTabularConfig bad;
  bad.kernel_width = 0;
  EXPECT_THROW(lime_tabular(m, x, TargetClass::positive, bad, RandomStream(5)), std::invalid_argument);
}

TEST(LimeImage, PlantedSegmentDominates) {
  const ImageShape shape{8, 8};
  const GridSegmentation grid{4, 4};
  const std::vector<int> labels = grid.labels(shape);
  Eigen::VectorXd w = Eigen::VectorXd::Zero(64);
  for (int p = 0; p < 64; ++p)
    if (labels[static_cast<std::size_t>(p)] == 3) w[p] = 1.0;
  const Model m = Model::linear(w, -0.2);
  const Eigen::VectorXd image = fixtures::random_vector(RandomStream(6), 64, 0.2).array() + 0.1;
  const Eigen::VectorXd zeros = Eigen::VectorXd::Zero(64);
  LimeImageConfig cfg;
  cfg.replacement = Replacement::dataset_mean;
  cfg.segmentation = grid;
  cfg.n_samples = 512;
  const auto a = lime_image(m, image, shape, TargetClass::positive, cfg, RandomStream(7), &zeros);
  double planted = 0, other = 0;
  for (int p = 0; p < 64; ++p) {
    if (labels[static_cast<std::size_t>(p)] == 3)
      planted = std::abs(a.values[p]);
    else
      other = std::max(other, std::abs(a.values[p]));
  }
  EXPECT_GE(planted, 5 * other);
}

TEST(LimeImage, ValidatesSampleCount) {
  const ImageShape shape{8, 8};
  LimeImageConfig cfg;
  cfg.segmentation = {2, 2};
  cfg.n_samples = 17;  // only 16 distinct masks exist
  EXPECT_THROW(cfg.validate(shape), std::invalid_argument);
  cfg.segmentation = {3, 3};  // does not tile 8 x 8
  cfg.n_samples = 64;
  EXPECT_THROW(cfg.validate(shape), std::invalid_argument);
  const Model m = Model::linear(Eigen::VectorXd::Ones(64), 0);
  LimeImageConfig ok;
  ok.replacement = Replacement::dataset_mean;
  EXPECT_THROW(lime_image(m, Eigen::VectorXd::Zero(64), shape, TargetClass::positive, ok, RandomStream(1)),
               std::invalid_argument);
}

TEST(DeepLiftShap, SingleZeroBaselineOnLinear) {
  const Model m = fixtures::linear_model({2, -1, 0.5}, 1.0);
  const Eigen::VectorXd x = vec({1, 3, -2});
  const auto a = deepliftshap(m, x, TargetClass::positive, Eigen::MatrixXd::Zero(3, 1), true);
  EXPECT_LT((a.values - vec({2, -3, -1})).cwiseAbs().maxCoeff(), 1e-15);
}

TEST(DeepLiftShap, BaselineEqualToInputIsZero) {
  const Model m = fixtures::random_mlp(RandomStream(2), 4);
  const Eigen::VectorXd x = fixtures::random_vector(RandomStream(3), 4);
  EXPECT_LT(deepliftshap(m, x, TargetClass::positive, x, true).values.cwiseAbs().maxCoeff(), 1e-15);
}

TEST(DeepLiftShap, MeanBaselineCompletenessOnLinear) {
  const Model m = fixtures::random_linear(RandomStream(4), 6);
  const Eigen::VectorXd x = fixtures::random_vector(RandomStream(5), 6);
  Eigen::MatrixXd baselines(6, 128);
  for (int j = 0; j < 128; ++j)
    baselines.col(j) = fixtures::random_vector(RandomStream(6).child(static_cast<std::uint64_t>(j)), 6);
  const auto a = deepliftshap(m, x, TargetClass::positive, baselines, true);
  const double mean_baseline_score =
      forward_scores<double>(m, baselines, TargetClass::positive, ScoreKind::logit).mean();
  EXPECT_NEAR(a.values.sum(),
              forward_score<double>(m, x, TargetClass::positive, ScoreKind::logit) - mean_baseline_score, 1e-6);
}

TEST(StratifiedBaselines, LabelMixMatchesRequest) {
  Eigen::MatrixXd train(10, 1);
  Eigen::VectorXi y(10);
  for (int i = 0; i < 10; ++i) {
    train(i, 0) = i;
    y[i] = i < 4 ? 1 : 0;
  }
  const Eigen::MatrixXd b = stratified_baselines(train, y, 0.25, 8, RandomStream(1));
  int positives = 0;
  for (int j = 0; j < 8; ++j) positives += b(0, j) < 4 ? 1 : 0;
  EXPECT_EQ(positives, 2);
  EXPECT_THROW(stratified_baselines(train, y, 1.5, 8, RandomStream(1)), std::invalid_argument);
}

TEST(RandomAttribution, ConstantFlag) {
  const RandomStream s(10);
  EXPECT_EQ(random_attribution(5, true, s, 0).values, random_attribution(5, true, s, 1).values);
  EXPECT_NE(random_attribution(5, false, s, 0).values, random_attribution(5, false, s, 1).values);
}

TEST(RandomAttribution, CoordinateMeansNearZero) {
  Eigen::VectorXd sum = Eigen::VectorXd::Zero(4);
  const RandomStream s(11);
  for (std::uint64_t k = 0; k < 10000; ++k) sum += random_attribution(4, false, s, k).values;
  EXPECT_LT((sum / 10000).cwiseAbs().maxCoeff(), 0.05);
}

TEST(Sobel, ConstantImageHasNoEdges) {
  const auto a = sobel_edge_attribution(Eigen::VectorXd::Constant(36, 2.5), {6, 6}, 0.0);
  EXPECT_LT(a.values.cwiseAbs().maxCoeff(), 1e-15);
}

TEST(Sobel, StepEdgePeaksOnEdgeColumns) {
  const ImageShape shape{8, 8};
  Eigen::VectorXd image(64);
  for (int r = 0; r < 8; ++r)
    for (int c = 0; c < 8; ++c) image[shape.index(r, c)] = c < 4 ? 0.0 : 1.0;
  const Eigen::MatrixXd edges = to_matrix(sobel_edge_attribution(image, shape, 0.0).values, shape);
  const double peak = edges.maxCoeff();
  for (int r = 0; r < 8; ++r) {
    EXPECT_DOUBLE_EQ(edges(r, 3), peak);
    EXPECT_DOUBLE_EQ(edges(r, 4), peak);
    EXPECT_DOUBLE_EQ(edges(r, 0), 0.0);
    EXPECT_DOUBLE_EQ(edges(r, 7), 0.0);
  }
}

TEST(Sobel, BlurSpreadsResponse) {
  const ImageShape shape{8, 8};
  Eigen::VectorXd image = Eigen::VectorXd::Zero(64);
  image[shape.index(4, 4)] = 1.0;
  const auto sharp = sobel_edge_attribution(image, shape, 0.0).values;
  const auto blurred = sobel_edge_attribution(image, shape, 2.0).values;
  EXPECT_LT(blurred.maxCoeff(), sharp.maxCoeff());
  EXPECT_GT((blurred.array() > 1e-9).count(), (sharp.array() > 1e-9).count());
}
