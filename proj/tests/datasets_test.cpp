#include <cmath>
#include <filesystem>
#include <fstream>
#include <set>

#include <gtest/gtest.h>

#include "dpc/datasets.hpp"
#include "dpc/pipeline.hpp"

using namespace dpc;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / "dpc-datasets-test";
  fs::create_directories(dir);
  return dir / name;
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path);
  out << text;
}

TabularDataset balanced(int n) {
  TabularDataset data;
  data.features.resize(n, 2);
  data.labels.resize(n);
  for (int i = 0; i < n; ++i) {
    data.features(i, 0) = i;
    data.features(i, 1) = 3.0 * i - 7.0;
    data.labels[i] = i % 2;
  }
  data.feature_names = {"a", "b"};
  return data;
}

}  // namespace

TEST(Heloc, StandInCleansToReferenceShape) {
  const fs::path csv = scratch("standin.csv");
  write_heloc_standin(csv, 0);
  const TabularDataset raw = read_heloc_table(csv);
  EXPECT_EQ(raw.rows(), 10459);
  EXPECT_EQ(raw.dim(), 23);
  const TabularDataset clean = clean_heloc(raw);
  EXPECT_EQ(clean.rows(), 8290);
  EXPECT_EQ(clean.dim(), 20);
  const std::set<std::string> kept(clean.feature_names.begin(), clean.feature_names.end());
  EXPECT_EQ(kept.count("MSinceMostRecentDelq"), 0u);
  EXPECT_EQ(kept.count("NetFractionInstallBurden"), 0u);
  EXPECT_EQ(kept.count("ExternalRiskEstimate"), 1u);
  const int positives = clean.labels.sum();
  EXPECT_GT(positives, clean.rows() / 3);
  EXPECT_LT(positives, 2 * clean.rows() / 3);
}

TEST(Heloc, NoMissingValuesKeepsEverything) {
  const fs::path csv = scratch("complete.csv");
  write_text(csv, "RiskPerformance,f1,f2,f3\nBad,1,2,3\nGood,4,5,6\nGood,7,8,9\n");
  const TabularDataset clean = load_heloc(csv);
  EXPECT_EQ(clean.rows(), 3);
  EXPECT_EQ(clean.dim(), 3);
  EXPECT_EQ(clean.labels[0], 1);
  EXPECT_EQ(clean.labels[1], 0);
}

TEST(Heloc, MostlyMissingFeatureIsDropped) {
  const fs::path csv = scratch("sparse.csv");
  std::string text = "f0,f1,f2,f3,f4,RiskPerformance\n";
  for (int i = 0; i < 20; ++i) {
    text += std::to_string(i) + ",";
    text += (i < 18 ? "-7" : "5");  // f1: 90% missing
    text += ",1,";
    text += (i == 3 ? "-8" : "2");  // f3: one missing entry
    text += ",4,";
    text += (i % 2 ? "Bad" : "Good");
    text += "\n";
  }
  write_text(csv, text);
  const TabularDataset clean = load_heloc(csv);
  // Only f1 and f3 have missing entries, so only those two are dropped.
  EXPECT_EQ(clean.feature_names, (std::vector<std::string>{"f0", "f2", "f4"}));
  EXPECT_EQ(clean.rows(), 20);
}

TEST(Heloc, RowsWithRemainingMissingCodesAreDropped) {
  const fs::path csv = scratch("rows.csv");
  HelocOptions opts;
  opts.drop_features = 1;
  write_text(csv, "RiskPerformance,a,b,c\nBad,-9,-9,1\nGood,1,2,3\nBad,-7,2,3\nGood,4,-8,6\n");
  const TabularDataset clean = load_heloc(csv, opts);
  EXPECT_EQ(clean.feature_names, (std::vector<std::string>{"b", "c"}));
  EXPECT_EQ(clean.rows(), 2);
}

TEST(Heloc, MalformedInputThrows) {
  const fs::path a = scratch("ragged.csv"), b = scratch("label.csv"), c = scratch("nolabel.csv");
  write_text(a, "RiskPerformance,f1\nBad,1,2\n");
  write_text(b, "RiskPerformance,f1\nUgly,1\n");
  write_text(c, "f0,f1\n1,2\n");
  EXPECT_THROW(read_heloc_table(a), std::runtime_error);
  EXPECT_THROW(read_heloc_table(b), std::runtime_error);
  EXPECT_THROW(read_heloc_table(c), std::runtime_error);
}

TEST(Splits, SizesAndStandardization) {
  const DatasetSplits s = split_and_standardize(balanced(100), {0.6, 0.2, 3});
  EXPECT_EQ(s.train.rows(), 60);
  EXPECT_EQ(s.validation.rows(), 20);
  EXPECT_EQ(s.test.rows(), 20);
  EXPECT_EQ(s.train.labels.sum(), 30);
  EXPECT_LT(s.train.features.colwise().mean().cwiseAbs().maxCoeff(), 1e-12);
  std::set<int> all(s.train_index.begin(), s.train_index.end());
  all.insert(s.validation_index.begin(), s.validation_index.end());
  all.insert(s.test_index.begin(), s.test_index.end());
  EXPECT_EQ(all.size(), 100u);
  const Eigen::MatrixXd restored = unstandardize(s.train.features, *s.train.standardization);
  EXPECT_DOUBLE_EQ(restored(0, 0), s.train_index[0]);
}

TEST(Splits, DeterministicForSeed) {
  const auto a = split_and_standardize(balanced(100), {0.6, 0.2, 5});
  const auto b = split_and_standardize(balanced(100), {0.6, 0.2, 5});
  const auto c = split_and_standardize(balanced(100), {0.6, 0.2, 6});
  EXPECT_EQ(a.train_index, b.train_index);
  EXPECT_EQ(a.test_index, b.test_index);
  EXPECT_NE(a.train_index, c.train_index);
  EXPECT_THROW(split_and_standardize(balanced(8), {0.6, 0.2, 5}), std::invalid_argument);
}

TEST(Standardization, ConstantColumnKeepsUnitScale) {
  Eigen::MatrixXd x(3, 2);
  x << 1, 5, 2, 5, 3, 5;
  const Standardization s = fit_standardization(x);
  EXPECT_DOUBLE_EQ(s.std[1], 1.0);
  EXPECT_NEAR(s.std[0], std::sqrt(2.0 / 3.0), 1e-15);
}

TEST(SynthLinear, LabelsFollowLogisticOfLogit) {
  const double noise = 0.25;
  const SyntheticLinear s = synth_linear(20000, 1, 4, noise);
  const double w = std::abs(s.weights[0]);
  // Expected agreement with sign(w x): E[logistic(|w x| / noise)], x ~ N(0, 1),
  // by the trapezoid rule on a fine grid.
  double expected = 0.0;
  const double step = 1e-3;
  for (double x = -10; x <= 10; x += step)
    expected += step * std::exp(-0.5 * x * x) / std::sqrt(2 * M_PI) / (1 + std::exp(-w * std::abs(x) / noise));
  int agree = 0;
  for (int i = 0; i < s.data.rows(); ++i)
    agree += s.data.labels[i] == (s.data.features(i, 0) * s.weights[0] > 0 ? 1 : 0);
  const double n = s.data.rows(), rate = agree / n;
  EXPECT_NEAR(rate, expected, 4 * std::sqrt(expected * (1 - expected) / n));
  // The zero-noise limit is the hard threshold.
  const SyntheticLinear hard = synth_linear(2000, 3, 4, 0.0);
  for (int i = 0; i < hard.data.rows(); ++i)
    ASSERT_EQ(hard.data.labels[i], hard.data.features.row(i).dot(hard.weights) > 0 ? 1 : 0);
}

TEST(SynthLinear, HashIsReproducible) {
  EXPECT_EQ(dataset_hash(synth_linear(500, 4, 1, 0.5).data), dataset_hash(synth_linear(500, 4, 1, 0.5).data));
  EXPECT_NE(dataset_hash(synth_linear(500, 4, 1, 0.5).data), dataset_hash(synth_linear(500, 4, 2, 0.5).data));
}

TEST(BlobImages, DeterministicAndBalanced) {
  const ImageDataset a = synth_blob_images(40, 16, 2), b = synth_blob_images(40, 16, 2);
  EXPECT_EQ(a.data.features, b.data.features);
  EXPECT_EQ(a.data.labels.sum(), 20);
  EXPECT_EQ(a.shape.pixels(), 256);
  EXPECT_THROW(synth_blob_images(40, 18, 2), std::invalid_argument);
}

TEST(BlobImages, PositiveClassIsBrighterAtBlob) {
  const ImageDataset img = synth_blob_images(400, 16, 3);
  const int p = img.shape.index(img.blob_row, img.blob_col);
  double pos = 0, neg = 0;
  for (int i = 0; i < img.data.rows(); ++i) (img.data.labels[i] ? pos : neg) += img.data.features(i, p);
  EXPECT_GT((pos - neg) / 200, 1.0);
}

TEST(DatasetCache, RoundTripAndCorruption) {
  const TabularDataset data = synth_linear(50, 3, 8, 0.5).data;
  const fs::path path = scratch("cache.bin");
  save_dataset_cache(path, data);
  const TabularDataset back = load_dataset_cache(path);
  EXPECT_EQ(dataset_hash(back), dataset_hash(data));
  EXPECT_EQ(back.feature_names, data.feature_names);
  {
    std::fstream f(path, std::ios::in | std::ios::out | std::ios::binary);
    f.seekp(40);
    f.put('\x7f');
  }
  EXPECT_THROW(load_dataset_cache(path), std::runtime_error);
}

TEST(DatasetCache, HelocEntryRebuildsAfterCorruption) {
  const fs::path csv = scratch("cached.csv");
  write_text(csv, "RiskPerformance,f1,f2\nBad,1,2\nGood,4,5\nGood,7,8\n");
  const fs::path dir = scratch("heloc-cache");
  fs::remove_all(dir);
  const TabularDataset first = load_heloc_cached(csv, dir);
  ASSERT_EQ(std::distance(fs::directory_iterator(dir), fs::directory_iterator()), 1);
  const fs::path entry = fs::directory_iterator(dir)->path();
  fs::resize_file(entry, 10);
  const TabularDataset second = load_heloc_cached(csv, dir);
  EXPECT_EQ(dataset_hash(first), dataset_hash(second));
}

TEST(Pipeline, NamedDatasets) {
  const fs::path dir = scratch("pipeline-cache");
  const PreparedData lin = prepare_data("synth-linear", 1, dir);
  EXPECT_EQ(lin.splits.train.dim(), 8);
  EXPECT_TRUE(lin.true_weights.has_value());
  EXPECT_EQ(lin.splits.train.rows() + lin.splits.validation.rows() + lin.splits.test.rows(), 3000);
  const PreparedData blobs = prepare_data("blobs", 1, dir);
  ASSERT_TRUE(blobs.image_shape.has_value());
  EXPECT_EQ(blobs.image_shape->pixels(), 256);
  EXPECT_THROW(prepare_data("mnist", 1, dir), std::invalid_argument);
}
