#include "dpc/checkpoint.hpp"

#include <cinttypes>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace dpc {
namespace {

std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016" PRIx64, v);
  return buf;
}

[[noreturn]] void corrupt(const std::filesystem::path& path, const std::string& what) {
  throw std::runtime_error("checkpoint " + path.string() + ": " + what);
}

}  // namespace

std::uint64_t metadata_hash(const std::map<std::string, std::string>& metadata) {
  std::string canonical;
  for (const auto& [k, v] : metadata) canonical += k + "=" + v + "\n";
  return fnv1a(canonical);
}

void save_checkpoint(const std::filesystem::path& path, const Model& model,
                     const std::map<std::string, std::string>& metadata) {
  for (const auto& [k, v] : metadata)
    if (k.find_first_of(" \n") != std::string::npos || v.find('\n') != std::string::npos)
      throw std::invalid_argument("checkpoint metadata keys may not contain spaces or newlines");

  std::ostringstream out;
  out << "dpc-checkpoint 1\n";
  out << "layers " << model.depth() << "\n";
  for (const auto& [k, v] : metadata) out << "meta " << k << " " << v << "\n";
  out << "meta-hash " << hex64(metadata_hash(metadata)) << "\n";
  for (const auto& layer : model.layers()) {
    out << "layer " << layer.weight.rows() << " " << layer.weight.cols() << "\n";
    for (Eigen::Index r = 0; r < layer.weight.rows(); ++r) {
      for (Eigen::Index c = 0; c < layer.weight.cols(); ++c)
        out << (c ? " " : "") << format_double(layer.weight(r, c));
      out << "\n";
    }
    for (Eigen::Index r = 0; r < layer.bias.size(); ++r) out << (r ? " " : "") << format_double(layer.bias[r]);
    out << "\n";
  }
  out << "end\n";

  const auto tmp = std::filesystem::path(path.string() + ".tmp");
  {
    std::ofstream file(tmp, std::ios::trunc);
    if (!file) throw std::runtime_error("cannot write checkpoint " + path.string());
    file << out.str();
  }
  std::filesystem::rename(tmp, path);
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream file(path);
  if (!file) throw std::runtime_error("cannot open checkpoint " + path.string());
  std::string tag;
  int version = 0;
  if (!(file >> tag >> version) || tag != "dpc-checkpoint") corrupt(path, "bad header");
  if (version != 1) corrupt(path, "unsupported version " + std::to_string(version));
  std::size_t depth = 0;
  if (!(file >> tag >> depth) || tag != "layers" || depth == 0) corrupt(path, "bad layer count");

  std::map<std::string, std::string> metadata;
  std::string stored_hash;
  while (file >> tag) {
    if (tag == "meta") {
      std::string key, value;
      file >> key;
      std::getline(file, value);
      if (!value.empty() && value.front() == ' ') value.erase(0, 1);
      metadata[key] = value;
    } else if (tag == "meta-hash") {
      file >> stored_hash;
      break;
    } else {
      corrupt(path, "unexpected token " + tag);
    }
  }
  if (stored_hash != hex64(metadata_hash(metadata))) corrupt(path, "metadata hash mismatch");

  std::vector<DenseLayer<double>> layers;
  for (std::size_t l = 0; l < depth; ++l) {
    Eigen::Index rows = 0, cols = 0;
    if (!(file >> tag >> rows >> cols) || tag != "layer" || rows < 1 || cols < 1)
      corrupt(path, "bad layer header");
    DenseLayer<double> layer{Eigen::MatrixXd(rows, cols), Eigen::VectorXd(rows)};
    for (Eigen::Index r = 0; r < rows; ++r)
      for (Eigen::Index c = 0; c < cols; ++c)
        if (!(file >> layer.weight(r, c))) corrupt(path, "truncated weights");
    for (Eigen::Index r = 0; r < rows; ++r)
      if (!(file >> layer.bias[r])) corrupt(path, "truncated biases");
    layers.push_back(std::move(layer));
  }
  if (!(file >> tag) || tag != "end") corrupt(path, "missing end marker");
  return {Model(std::move(layers)), std::move(metadata)};
}

}  // namespace dpc
