#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "dpc/image.hpp"

namespace dpc {

struct Standardization {
  Eigen::RowVectorXd mean;
  Eigen::RowVectorXd std;
};

struct TabularDataset {
  Eigen::MatrixXd features;  // n x d, one row per sample
  Eigen::VectorXi labels;
  std::vector<std::string> feature_names;
  std::optional<Standardization> standardization;

  int rows() const noexcept { return static_cast<int>(features.rows()); }
  int dim() const noexcept { return static_cast<int>(features.cols()); }
};

/// FNV-1a over shape, values and labels.
std::uint64_t dataset_hash(const TabularDataset& data);

struct HelocOptions {
  std::string label_column = "RiskPerformance";
  std::string positive_label = "Bad";
  std::string negative_label = "Good";
  std::vector<double> missing_codes = {-7.0, -8.0, -9.0};
  int drop_features = 3;
  char delimiter = ',';
};

/// Cleans a HELOC-format table: drops up to `drop_features` columns with the
/// highest missing rate (only columns that have missing entries; ties go to
/// the earlier column), then every row still holding a missing code.
TabularDataset clean_heloc(const TabularDataset& raw, const HelocOptions& options = {});

/// Parses the delimited file (header row, label column anywhere) and cleans it.
TabularDataset load_heloc(const std::filesystem::path& path, const HelocOptions& options = {});

/// Parses without cleaning. Throws on malformed rows and unknown labels.
TabularDataset read_heloc_table(const std::filesystem::path& path, const HelocOptions& options = {});

/// Writes a synthetic table in the HELOC layout (23 named integer features,
/// Good/Bad label, sentinel missing codes) whose cleaning yields 8290 x 20.
void write_heloc_standin(const std::filesystem::path& path, std::uint64_t seed);

struct SplitSpec {
  double train = 0.6;
  double validation = 0.2;
  std::uint64_t seed = 0;
};

struct DatasetSplits {
  TabularDataset train;
  TabularDataset validation;
  TabularDataset test;
  std::vector<int> train_index;
  std::vector<int> validation_index;
  std::vector<int> test_index;
};

Standardization fit_standardization(const Eigen::MatrixXd& features);
Eigen::MatrixXd standardize(const Eigen::MatrixXd& features, const Standardization& s);
Eigen::MatrixXd unstandardize(const Eigen::MatrixXd& features, const Standardization& s);

/// Stratified split; standardization is fitted on the training rows and
/// applied to all three splits.
DatasetSplits split_and_standardize(const TabularDataset& data, const SplitSpec& spec);

struct SyntheticLinear {
  TabularDataset data;
  Eigen::VectorXd weights;
};

/// x ~ N(0, I), w ~ N(0, I) and label ~ Bernoulli(logistic(w^T x / noise));
/// noise = 0 gives the hard threshold 1[w^T x > 0].
SyntheticLinear synth_linear(int n, int d, std::uint64_t seed, double noise);

struct ImageDataset {
  TabularDataset data;  // one flattened image per row
  ImageShape shape;
  int blob_row = 0;
  int blob_col = 0;
  double contrast = 0.0;
};

struct BlobImageOptions {
  double contrast = 1.5;
  double blob_sigma = 1.5;
  double background_sigma = 0.5;
};

/// Noise images; class 1 adds a Gaussian blob centred in the second grid
/// cell of a 4 x 4 grid. Labels alternate, so classes are balanced.
ImageDataset synth_blob_images(int n, int side, std::uint64_t seed, const BlobImageOptions& options = {});

/// Columnar binary cache of a cleaned table.
void save_dataset_cache(const std::filesystem::path& path, const TabularDataset& data);
TabularDataset load_dataset_cache(const std::filesystem::path& path);

/// Loads a HELOC file through a cache entry named after the content hash of
/// the source file and the cleaning options.
TabularDataset load_heloc_cached(const std::filesystem::path& csv, const std::filesystem::path& cache_dir,
                                 const HelocOptions& options = {});

}  // namespace dpc
