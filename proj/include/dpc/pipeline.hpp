#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>

#include <Eigen/Dense>

#include "dpc/datasets.hpp"
#include "dpc/image.hpp"
#include "dpc/training.hpp"

namespace dpc {

/// Environment variable naming a real HELOC csv file.
inline constexpr const char* kHelocEnv = "DPC_HELOC_CSV";

struct PreparedData {
  std::string name;
  DatasetSplits splits;
  std::optional<ImageShape> image_shape;
  std::optional<Eigen::VectorXd> true_weights;  // synthetic-linear only
  bool real_heloc = false;
};

/// Resolves a dataset name and returns standardized 60:20:20 splits.
///
///   heloc          the file named by DPC_HELOC_CSV (error when unset)
///   heloc-standin  a generated table in the HELOC layout
///   heloc-auto     heloc when DPC_HELOC_CSV is set, otherwise heloc-standin
///   synth-linear   8 Gaussian features with a logistic label
///   blobs          16 x 16 noise images with a planted blob
///   <path>.csv     any HELOC-format file
PreparedData prepare_data(const std::string& dataset, std::uint64_t seed, const std::filesystem::path& cache_dir);

/// Locates the real HELOC file, if configured and present.
std::optional<std::filesystem::path> heloc_path_from_env();

ArchSpec arch_for(ModelKind kind);
ModelKind parse_model_kind(const std::string& text);
std::string to_string(ModelKind kind);

/// Trains on the training split with early stopping on the validation split.
TrainedModel train_model(const PreparedData& data, ModelKind kind, std::uint64_t seed);

std::map<std::string, std::string> training_metadata(const PreparedData& data, const TrainedModel& trained);

}  // namespace dpc
