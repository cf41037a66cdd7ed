#include <algorithm>
#include <cmath>
#include <numeric>

#include <gtest/gtest.h>

#include "dpc/attribution.hpp"
#include "dpc/audit.hpp"
#include "dpc/perturbation.hpp"
#include "test_util.hpp"

using namespace dpc;
using fixtures::vec;

namespace {

// Weighted MoRF area of one removal order, evaluated feature by feature.
double morf_area(const Model& m, const Eigen::VectorXd& x, const Eigen::VectorXd& baseline,
                 const std::vector<int>& order) {
  const auto w = abpc_weights(static_cast<int>(order.size()));
  const double s0 = forward_score<double>(m, x, TargetClass::positive, ScoreKind::logit);
  Eigen::VectorXd state = x;
  double area = 0;
  for (std::size_t t = 0; t < order.size(); ++t) {
    state[order[t]] = baseline[order[t]];
    area += w[t] * (forward_score<double>(m, state, TargetClass::positive, ScoreKind::logit) - s0);
  }
  return area;
}

double brute_force_best(const Model& m, const Eigen::VectorXd& x, const Eigen::VectorXd& baseline) {
  std::vector<int> order(static_cast<std::size_t>(x.size()));
  std::iota(order.begin(), order.end(), 0);
  double best = morf_area(m, x, baseline, order);
  while (std::next_permutation(order.begin(), order.end())) best = std::min(best, morf_area(m, x, baseline, order));
  return best;
}

}  // namespace

TEST(SensitivityN, ClosedFormLinearInstance) {
  const Model m = fixtures::linear_model({1, 2});
  const Eigen::VectorXd x = vec({1, 1}), zero = Eigen::VectorXd::Zero(2);
  const auto ig = integrated_gradients(m, x, TargetClass::positive, zero, 64, true);
  EXPECT_LT((ig.values - vec({1, 2})).cwiseAbs().maxCoeff(), 1e-15);
  const AuditReport r = sensitivity_n_audit(m, x, ig.values, zero, TargetClass::positive, 1e-6);
  EXPECT_TRUE(r.passed);
  EXPECT_EQ(r.checked_subsets, 3u);
  EXPECT_LT(r.max_residual, 1e-15);
}

TEST(SensitivityN, GradientCounterexample) {
  const Model m = fixtures::linear_model({1, 2});
  const Eigen::VectorXd zero = Eigen::VectorXd::Zero(2);
  // At x = (1, 1) the gradient coincides with x * w and passes.
  EXPECT_TRUE(sensitivity_n_audit(m, vec({1, 1}), vec({1, 2}), zero, TargetClass::positive, 1e-6).passed);
  const Eigen::VectorXd x = vec({2, 1});
  const auto g = gradient_attribution(m, x, TargetClass::positive);
  const AuditReport r = sensitivity_n_audit(m, x, g.values, zero, TargetClass::positive, 1e-6);
  EXPECT_FALSE(r.passed);
  // Subset {0}: attribution 1 against a score drop of 2.
  const auto it = std::find_if(r.violations.begin(), r.violations.end(), [](const auto& v) { return v.subset == 1u; });
  ASSERT_NE(it, r.violations.end());
  EXPECT_DOUBLE_EQ(it->residual, 1.0);
}

TEST(SensitivityN, IgAndDeepLiftPassOnRandomLinear) {
  const RandomStream root(91);
  for (int trial = 0; trial < 30; ++trial) {
    const RandomStream s = root.child(static_cast<std::uint64_t>(trial));
    const int d = 2 + trial % 9;
    const Model m = fixtures::random_linear(s.child("m"), d);
    const Eigen::VectorXd x = fixtures::random_vector(s.child("x"), d);
    const Eigen::VectorXd zero = Eigen::VectorXd::Zero(d);
    const auto target = trial % 2 ? TargetClass::positive : TargetClass::negative;
    const auto ig = integrated_gradients(m, x, target, zero, 64, true);
    const auto dl = deepliftshap(m, x, target, zero, true);
    EXPECT_TRUE(sensitivity_n_audit(m, x, ig.values, zero, target, 1e-6).passed);
    EXPECT_TRUE(sensitivity_n_audit(m, x, dl.values, zero, target, 1e-6).passed);
  }
}

TEST(SensitivityN, MeanBaselineVariant) {
  const Model m = fixtures::random_linear(RandomStream(5), 5);
  const Eigen::VectorXd x = fixtures::random_vector(RandomStream(6), 5);
  Eigen::MatrixXd baselines(5, 16);
  for (int j = 0; j < 16; ++j)
    baselines.col(j) = fixtures::random_vector(RandomStream(7).child(static_cast<std::uint64_t>(j)), 5);
  const auto dls = deepliftshap(m, x, TargetClass::positive, baselines, true);
  EXPECT_TRUE(sensitivity_n_audit_mean(m, x, dls.values, baselines, TargetClass::positive, 1e-9).passed);
  EXPECT_THROW(sensitivity_n_audit_mean(m, x, dls.values, Eigen::MatrixXd(5, 0), TargetClass::positive, 1e-9),
               std::invalid_argument);
}

TEST(SensitivityN, MlpIntegratedGradientsFullSetIsQuadratureLimited) {
  const RandomStream root(17);
  for (int trial = 0; trial < 8; ++trial) {
    const RandomStream s = root.child(static_cast<std::uint64_t>(trial));
    const Model m = fixtures::random_mlp(s.child("m"), 6, {10, 10});
    const Eigen::VectorXd x = fixtures::random_vector(s.child("x"), 6);
    const Eigen::VectorXd zero = Eigen::VectorXd::Zero(6);
    const auto ig = integrated_gradients(m, x, TargetClass::positive, zero, 64, true);
    const AuditReport r = sensitivity_n_audit(m, x, ig.values, zero, TargetClass::positive, 1e-3);
    ASSERT_EQ(r.max_residual_by_size.size(), 7u);
    EXPECT_EQ(r.checked_subsets, 63u);
    const double gap = forward_score<double>(m, x, TargetClass::positive, ScoreKind::logit) -
                       forward_score<double>(m, zero, TargetClass::positive, ScoreKind::logit);
    EXPECT_NEAR(r.max_residual_by_size[6], std::abs(ig.values.sum() - gap), 1e-12);
    EXPECT_LE(r.max_residual_by_size[6], fixtures::path_variation(m, x, zero) / 128 + 1e-9);
  }
}

TEST(SensitivityN, RejectsLargeDimensions) {
  const Model m = Model::linear(Eigen::VectorXd::Ones(13), 0);
  const Eigen::VectorXd z = Eigen::VectorXd::Zero(13);
  EXPECT_THROW(sensitivity_n_audit(m, z, z, z, TargetClass::positive, 1e-6), std::invalid_argument);
}

TEST(SensitivityN, AuditRowFormat) {
  const Model m = fixtures::linear_model({1, 2});
  const auto r = sensitivity_n_audit(m, vec({1, 1}), vec({1, 2}), vec({0, 0}), TargetClass::positive, 1e-6);
  EXPECT_EQ(audit_row("lin", "integrated_gradients", "sample-0", r),
            "lin\tintegrated_gradients\tsample-0\t3\t0\t9.9999999999999995e-07\tpass");
}

TEST(PcOptimality, IgOnLinearMatchesBruteForce) {
  const RandomStream root(33);
  for (int trial = 0; trial < 20; ++trial) {
    const RandomStream s = root.child(static_cast<std::uint64_t>(trial));
    const int d = 1 + trial % 7;
    const Model m = fixtures::random_linear(s.child("m"), d);
    const Eigen::VectorXd x = fixtures::random_vector(s.child("x"), d);
    const Eigen::VectorXd zero = Eigen::VectorXd::Zero(d);
    const auto ig = integrated_gradients(m, x, TargetClass::positive, zero, 64, true);
    const OptimalityReport r = pc_optimality_audit(m, x, ig.values, zero, TargetClass::positive);
    EXPECT_TRUE(r.passed);
    EXPECT_NEAR(r.best_aupc, brute_force_best(m, x, zero), 1e-12);
    EXPECT_NEAR(r.attribution_aupc, morf_area(m, x, zero, r.attribution_order), 1e-12);
    std::uint64_t factorial = 1;
    for (int k = 2; k <= d; ++k) factorial *= static_cast<std::uint64_t>(k);
    EXPECT_EQ(r.permutations, factorial);
  }
}

TEST(PcOptimality, ReversedAttributionFails) {
  const Model m = fixtures::linear_model({1, 2, 3, 4});
  const Eigen::VectorXd x = vec({1, 1, 1, 1}), zero = Eigen::VectorXd::Zero(4);
  const OptimalityReport good = pc_optimality_audit(m, x, vec({1, 2, 3, 4}), zero, TargetClass::positive);
  EXPECT_TRUE(good.passed);
  EXPECT_EQ(good.best_order, (std::vector<int>{3, 2, 1, 0}));
  const OptimalityReport bad = pc_optimality_audit(m, x, vec({4, 3, 2, 1}), zero, TargetClass::positive);
  EXPECT_FALSE(bad.passed);
  EXPECT_GT(bad.attribution_aupc, bad.best_aupc);
}

TEST(PcOptimality, SingleFeatureTriviallyPasses) {
  const Model m = fixtures::linear_model({-3});
  const OptimalityReport r = pc_optimality_audit(m, vec({2}), vec({7}), vec({0}), TargetClass::positive);
  EXPECT_TRUE(r.passed);
  EXPECT_EQ(r.permutations, 1u);
}
