#include <cmath>
#include <set>

#include <gtest/gtest.h>

#include "dpc/numerics.hpp"
#include "test_util.hpp"

using namespace dpc;

namespace {

// Direct solve of the augmented system [1 X]^T W [1 X] theta = [1 X]^T W y with
// the penalty on every coefficient except the intercept.
std::pair<Eigen::VectorXd, double> normal_equations_oracle(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                                                           const Eigen::VectorXd& w, double alpha) {
  const Eigen::Index n = X.rows(), p = X.cols();
  Eigen::MatrixXd A(n, p + 1);
  A.col(0).setOnes();
  A.rightCols(p) = X;
  Eigen::MatrixXd lhs = A.transpose() * w.asDiagonal() * A;
  lhs.diagonal().tail(p).array() += alpha;
  const Eigen::VectorXd theta = lhs.fullPivLu().solve(A.transpose() * w.asDiagonal() * y);
  return {theta.tail(p), theta[0]};
}

}  // namespace

TEST(Ridge, RecoversExactLine) {
  Eigen::MatrixXd X(3, 1);
  X << 1, 2, 3;
  const Eigen::VectorXd y = fixtures::vec({2, 4, 6});
  const auto fit = ridge_fit<double>(X, y, Eigen::VectorXd::Ones(3), 0.0);
  EXPECT_NEAR(fit.weights[0], 2.0, 1e-12);
  EXPECT_NEAR(fit.intercept, 0.0, 1e-12);
}

TEST(Ridge, HugePenaltyShrinksToZero) {
  Eigen::MatrixXd X(3, 1);
  X << 1, 2, 3;
  const Eigen::VectorXd y = fixtures::vec({2, 4, 6});
  const auto fit = ridge_fit<double>(X, y, Eigen::VectorXd::Ones(3), 1e9);
  EXPECT_LT(std::abs(fit.weights[0]), 1e-8);
  EXPECT_NEAR(fit.intercept, 4.0, 1e-6);
}

TEST(Ridge, MatchesNormalEquationsOracle) {
  const RandomStream root(11);
  for (int trial = 0; trial < 10; ++trial) {
    const RandomStream s = root.child(static_cast<std::uint64_t>(trial));
    Eigen::MatrixXd X(20, 5);
    for (int j = 0; j < 5; ++j) X.col(j) = gaussian_vector(s.child("x").child(static_cast<std::uint64_t>(j)), 20, 1.0);
    const Eigen::VectorXd y = gaussian_vector(s.child("y"), 20, 1.0);
    Eigen::VectorXd w(20);
    RandomCursor c(s.child("w"));
    for (int i = 0; i < 20; ++i) w[i] = 0.1 + c.uniform();
    const auto fit = ridge_fit<double>(X, y, w, 0.1);
    const auto [beta, b0] = normal_equations_oracle(X, y, w, 0.1);
    EXPECT_LT((fit.weights - beta).cwiseAbs().maxCoeff(), 1e-8);
    EXPECT_NEAR(fit.intercept, b0, 1e-8);
  }
}

TEST(Ridge, RankDeficientWithoutPenaltyIsIllPosed) {
  Eigen::MatrixXd X(4, 2);
  X << 1, 2, 2, 4, 3, 6, 4, 8;
  const Eigen::VectorXd y = fixtures::vec({1, 2, 3, 4});
  try {
    ridge_fit<double>(X, y, Eigen::VectorXd::Ones(4), 0.0);
    FAIL() << "expected an exception";
  } catch (const std::runtime_error& e) {
    EXPECT_STREQ(e.what(), "ill-posed fit");
  }
}

TEST(Ridge, DimensionMismatchThrows) {
  Eigen::MatrixXd X(3, 1);
  X << 1, 2, 3;
  EXPECT_THROW(ridge_fit<double>(X, fixtures::vec({1, 2}), Eigen::VectorXd::Ones(3), 0.1), std::invalid_argument);
  EXPECT_THROW(ridge_fit<double>(X, fixtures::vec({1, 2, 3}), Eigen::VectorXd::Ones(2), 0.1), std::invalid_argument);
}

TEST(RandomStream, GaussianVectorIsDeterministic) {
  const RandomStream s = RandomStream(5).child("noise");
  EXPECT_EQ(gaussian_vector(s, 4, 0.2), gaussian_vector(s, 4, 0.2));
  EXPECT_NE(gaussian_vector(s, 4, 0.2), gaussian_vector(RandomStream(6).child("noise"), 4, 0.2));
}

TEST(RandomStream, SampleStdMatchesSigma) {
  const Eigen::VectorXd v = gaussian_vector(RandomStream(1).child("lln"), 100000, 0.2);
  const double mean = v.mean();
  const double sd = std::sqrt((v.array() - mean).square().sum() / (v.size() - 1));
  EXPECT_GE(sd, 0.195);
  EXPECT_LE(sd, 0.205);
  EXPECT_NEAR(mean, 0.0, 0.005);
}

TEST(RandomStream, DistinctPathsAreUncorrelated) {
  const RandomStream root(3);
  const Eigen::VectorXd a = gaussian_vector(root.child("a"), 10000, 1.0);
  const Eigen::VectorXd b = gaussian_vector(root.child("b"), 10000, 1.0);
  const double ca = a.mean(), cb = b.mean();
  const double rho = ((a.array() - ca) * (b.array() - cb)).sum() /
                     std::sqrt((a.array() - ca).square().sum() * (b.array() - cb).square().sum());
  EXPECT_LT(std::abs(rho), 0.05);
}

TEST(RandomStream, ChildLabelsAreDistinct) {
  const RandomStream root(0);
  std::set<std::uint64_t> keys;
  for (std::uint64_t i = 0; i < 1000; ++i) keys.insert(root.child(i).key());
  EXPECT_EQ(keys.size(), 1000u);
  EXPECT_NE(root.child("x").key(), root.child("y").key());
  EXPECT_EQ(root.child("x").child(3).key(), root.child("x").child(3).key());
}

TEST(RandomStream, UniformInOpenInterval) {
  const RandomStream s(9);
  double sum = 0;
  for (std::uint64_t c = 0; c < 20000; ++c) {
    const double u = s.uniform(c);
    ASSERT_GT(u, 0.0);
    ASSERT_LT(u, 1.0);
    sum += u;
  }
  EXPECT_NEAR(sum / 20000, 0.5, 0.01);
}

TEST(RandomCursor, SampleWithoutReplacementIsDistinct) {
  RandomCursor c(RandomStream(2));
  for (int trial = 0; trial < 50; ++trial) {
    const auto picks = c.sample_without_replacement(30, 12);
    ASSERT_EQ(picks.size(), 12u);
    const std::set<int> unique(picks.begin(), picks.end());
    EXPECT_EQ(unique.size(), 12u);
    EXPECT_GE(*unique.begin(), 0);
    EXPECT_LT(*unique.rbegin(), 30);
  }
  EXPECT_THROW(c.sample_without_replacement(3, 4), std::invalid_argument);
}

TEST(RandomCursor, BelowIsUniform) {
  RandomCursor c(RandomStream(4));
  std::vector<int> counts(7, 0);
  for (int i = 0; i < 70000; ++i) ++counts[c.below(7)];
  for (int k : counts) EXPECT_NEAR(k, 10000, 400);
}

TEST(Sign, ThreeValued) {
  EXPECT_EQ(sign_of(2.5), 1);
  EXPECT_EQ(sign_of(-0.1), -1);
  EXPECT_EQ(sign_of(0.0), 0);
}
