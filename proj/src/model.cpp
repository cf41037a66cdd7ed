#include "dpc/model.hpp"

#include <cmath>
#include <cstring>

namespace dpc {

Model make_network(int input_dim, const std::vector<int>& hidden, const RandomStream& stream) {
  if (input_dim < 1) throw std::invalid_argument("make_network: input_dim must be positive");
  std::vector<int> widths{input_dim};
  widths.insert(widths.end(), hidden.begin(), hidden.end());
  widths.push_back(1);
  std::vector<DenseLayer<double>> layers;
  for (std::size_t l = 0; l + 1 < widths.size(); ++l) {
    const int in = widths[l];
    const int out = widths[l + 1];
    if (out < 1) throw std::invalid_argument("make_network: hidden widths must be positive");
    // He-uniform for ReLU fan-in; the linear model starts at zero.
    const double bound = hidden.empty() ? 0.0 : std::sqrt(6.0 / in);
    RandomCursor cursor(stream.child(static_cast<std::uint64_t>(l)));
    DenseLayer<double> layer{Eigen::MatrixXd(out, in), Eigen::VectorXd::Zero(out)};
    for (int r = 0; r < out; ++r)
      for (int c = 0; c < in; ++c) layer.weight(r, c) = bound * (2.0 * cursor.uniform() - 1.0);
    layers.push_back(std::move(layer));
  }
  return Model(std::move(layers));
}

std::uint64_t model_hash(const Model& model) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  const auto feed = [&h](const void* data, std::size_t bytes) {
    h = fnv1a(std::string_view(static_cast<const char*>(data), bytes), h);
  };
  for (const auto& layer : model.layers()) {
    const std::int64_t shape[2] = {layer.weight.rows(), layer.weight.cols()};
    feed(shape, sizeof(shape));
    for (Eigen::Index r = 0; r < layer.weight.rows(); ++r)
      for (Eigen::Index c = 0; c < layer.weight.cols(); ++c) {
        const double v = layer.weight(r, c);
        feed(&v, sizeof(v));
      }
    feed(layer.bias.data(), sizeof(double) * static_cast<std::size_t>(layer.bias.size()));
  }
  return h;
}

std::string to_string(ScoreKind kind) { return kind == ScoreKind::logit ? "logit" : "probability"; }

ScoreKind parse_score_kind(const std::string& text) {
  if (text == "logit") return ScoreKind::logit;
  if (text == "probability" || text == "prob") return ScoreKind::probability;
  throw std::invalid_argument("unknown score kind: " + text);
}

}  // namespace dpc
