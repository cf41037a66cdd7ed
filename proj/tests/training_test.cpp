#include <cmath>
#include <limits>

#include <gtest/gtest.h>

#include "dpc/datasets.hpp"
#include "dpc/pipeline.hpp"
#include "dpc/training.hpp"
#include "test_util.hpp"

using namespace dpc;

namespace {

struct Split {
  Eigen::MatrixXd x;
  Eigen::VectorXi y;
};

Split separable(int n, std::uint64_t seed) {
  Split s{Eigen::MatrixXd(n, 2), Eigen::VectorXi(n)};
  RandomCursor c{RandomStream(seed)};
  for (int i = 0; i < n; ++i) {
    const int label = i % 2;
    s.x(i, 0) = (label ? 1.5 : -1.5) + 0.4 * c.normal();
    s.x(i, 1) = c.normal();
    s.y[i] = label;
  }
  return s;
}

}  // namespace

TEST(Training, SeparableDataLinearModel) {
  const Split train = separable(400, 1), val = separable(200, 2);
  const TrainedModel t = train_classifier(train.x, train.y, val.x, val.y, ArchSpec::linear(), TrainConfig{});
  EXPECT_GE(t.summary.train_accuracy, 0.99);
  EXPECT_GE(accuracy(t.model, val.x, val.y), 0.98);
  EXPECT_EQ(t.model.kind(), ModelKind::linear);
}

TEST(Training, DeterministicForSeed) {
  const Split train = separable(200, 3), val = separable(100, 4);
  TrainConfig cfg;
  cfg.epochs = 20;
  cfg.seed = 9;
  const auto a = train_classifier(train.x, train.y, val.x, val.y, ArchSpec{ModelKind::mlp, {8, 8}}, cfg);
  const auto b = train_classifier(train.x, train.y, val.x, val.y, ArchSpec{ModelKind::mlp, {8, 8}}, cfg);
  EXPECT_EQ(model_hash(a.model), model_hash(b.model));
}

TEST(Training, NonFiniteLossDiverges) {
  Split train = separable(64, 5);
  const Split val = separable(32, 6);
  train.x(3, 0) = std::numeric_limits<double>::quiet_NaN();
  try {
    train_classifier(train.x, train.y, val.x, val.y, ArchSpec::linear(), TrainConfig{});
    FAIL() << "expected divergence";
  } catch (const std::runtime_error& e) {
    EXPECT_STREQ(e.what(), "diverged");
  }
}

TEST(Training, RejectsBadLabels) {
  Split train = separable(64, 5);
  const Split val = separable(32, 6);
  train.y[0] = 2;
  EXPECT_THROW(train_classifier(train.x, train.y, val.x, val.y, ArchSpec::linear(), TrainConfig{}),
               std::invalid_argument);
}

TEST(Training, LinearRecoversSyntheticDirection) {
  const SyntheticLinear synth = synth_linear(6000, 6, 17, 0.02);
  const DatasetSplits splits = split_and_standardize(synth.data, {0.6, 0.2, 17});
  const TrainedModel t = train_classifier(splits.train.features, splits.train.labels, splits.validation.features,
                                          splits.validation.labels, ArchSpec::linear(), TrainConfig{});
  // Standardization rescales each column; map the learned weights back to raw units.
  const Eigen::VectorXd learned =
      t.model.layers()[0].weight.row(0).transpose().cwiseQuotient(splits.train.standardization->std.transpose());
  const double cosine = learned.dot(synth.weights) / (learned.norm() * synth.weights.norm());
  EXPECT_GT(cosine, 0.99);
}

TEST(Training, BlobImageWeightsPeakAtBlob) {
  const ImageDataset images = synth_blob_images(800, 16, 3);
  const DatasetSplits splits = split_and_standardize(images.data, {0.6, 0.2, 3});
  const TrainedModel t = train_classifier(splits.train.features, splits.train.labels, splits.validation.features,
                                          splits.validation.labels, ArchSpec::linear(), TrainConfig{});
  const Eigen::VectorXd w = t.model.layers()[0].weight.row(0).transpose();
  Eigen::Index peak = 0;
  w.maxCoeff(&peak);
  const int r = static_cast<int>(peak) / images.shape.cols, c = static_cast<int>(peak) % images.shape.cols;
  EXPECT_LE(std::abs(r - images.blob_row), 2);
  EXPECT_LE(std::abs(c - images.blob_col), 2);
  EXPECT_GT(t.summary.validation_accuracy, 0.9);
}

TEST(Training, ZeroContrastIsChance) {
  BlobImageOptions opts;
  opts.contrast = 0.0;
  const ImageDataset images = synth_blob_images(800, 16, 4, opts);
  const DatasetSplits splits = split_and_standardize(images.data, {0.6, 0.2, 4});
  const TrainedModel t = train_classifier(splits.train.features, splits.train.labels, splits.validation.features,
                                          splits.validation.labels, ArchSpec::linear(), TrainConfig{});
  EXPECT_NEAR(accuracy(t.model, splits.test.features, splits.test.labels), 0.5, 0.1);
}

class RealHeloc : public ::testing::Test {
 protected:
  void SetUp() override {
    if (!heloc_path_from_env()) GTEST_SKIP() << "set " << kHelocEnv << " to the HELOC csv to run this check";
  }
};

TEST_F(RealHeloc, LinearValidationAccuracy) {
  const PreparedData data = prepare_data("heloc", 0, std::filesystem::temp_directory_path() / "dpc-heloc-cache");
  const TrainedModel t = train_model(data, ModelKind::linear, 0);
  EXPECT_NEAR(t.summary.validation_accuracy, 0.7343, 0.03);
}

TEST_F(RealHeloc, MlpValidationAuroc) {
  const PreparedData data = prepare_data("heloc", 0, std::filesystem::temp_directory_path() / "dpc-heloc-cache");
  const TrainedModel t = train_model(data, ModelKind::mlp, 0);
  EXPECT_NEAR(t.summary.validation_auroc, 0.7972, 0.03);
}
