#include "dpc/pipeline.hpp"

#include <cstdio>
#include <cstdlib>
#include <stdexcept>

namespace dpc {
namespace {

PreparedData from_table(std::string name, const TabularDataset& table, std::uint64_t seed) {
  PreparedData out;
  out.name = std::move(name);
  out.splits = split_and_standardize(table, {0.6, 0.2, seed});
  return out;
}

std::string fixed(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6f", v);
  return buf;
}

}  // namespace

std::optional<std::filesystem::path> heloc_path_from_env() {
  const char* value = std::getenv(kHelocEnv);
  if (!value || !*value) return std::nullopt;
  std::filesystem::path path(value);
  if (!std::filesystem::is_regular_file(path)) return std::nullopt;
  return path;
}

PreparedData prepare_data(const std::string& dataset, std::uint64_t seed, const std::filesystem::path& cache_dir) {
  if (dataset == "heloc" || (dataset == "heloc-auto" && heloc_path_from_env())) {
    const auto path = heloc_path_from_env();
    if (!path) throw std::runtime_error(std::string("heloc: set ") + kHelocEnv + " to the HELOC csv file");
    PreparedData out = from_table("heloc", load_heloc_cached(*path, cache_dir), seed);
    out.real_heloc = true;
    return out;
  }
  if (dataset == "heloc-standin" || dataset == "heloc-auto") {
    std::filesystem::create_directories(cache_dir);
    const auto csv = cache_dir / "heloc-standin.csv";
    if (!std::filesystem::exists(csv)) write_heloc_standin(csv, 0);
    return from_table("heloc-standin", load_heloc_cached(csv, cache_dir), seed);
  }
  if (dataset == "synth-linear") {
    const SyntheticLinear synth = synth_linear(3000, 8, seed, 0.25);
    PreparedData out = from_table("synth-linear", synth.data, seed);
    out.true_weights = synth.weights;
    return out;
  }
  if (dataset == "blobs") {
    const ImageDataset images = synth_blob_images(800, 16, seed);
    PreparedData out = from_table("blobs", images.data, seed);
    out.image_shape = images.shape;
    return out;
  }
  if (std::filesystem::path(dataset).extension() == ".csv") {
    return from_table(std::filesystem::path(dataset).stem().string(), load_heloc_cached(dataset, cache_dir), seed);
  }
  throw std::invalid_argument("unknown dataset " + dataset);
}

ArchSpec arch_for(ModelKind kind) { return kind == ModelKind::linear ? ArchSpec::linear() : ArchSpec::tabular_mlp(); }

ModelKind parse_model_kind(const std::string& text) {
  if (text == "linear") return ModelKind::linear;
  if (text == "mlp") return ModelKind::mlp;
  throw std::invalid_argument("unknown model kind " + text);
}

std::string to_string(ModelKind kind) { return kind == ModelKind::linear ? "linear" : "mlp"; }

TrainedModel train_model(const PreparedData& data, ModelKind kind, std::uint64_t seed) {
  TrainConfig cfg;
  cfg.seed = seed;
  return train_classifier(data.splits.train.features, data.splits.train.labels, data.splits.validation.features,
                          data.splits.validation.labels, arch_for(kind), cfg);
}

std::map<std::string, std::string> training_metadata(const PreparedData& data, const TrainedModel& trained) {
  const auto& s = trained.summary;
  return {{"dataset", data.name},
          {"seed", std::to_string(trained.config.seed)},
          {"train_accuracy", fixed(s.train_accuracy)},
          {"train_auroc", fixed(s.train_auroc)},
          {"validation_accuracy", fixed(s.validation_accuracy)},
          {"validation_auroc", fixed(s.validation_auroc)},
          {"epochs_run", std::to_string(s.epochs_run)},
          {"best_epoch", std::to_string(s.best_epoch)},
          {"kind", trained.model.kind() == ModelKind::linear ? "linear" : "mlp"}};
}

}  // namespace dpc
