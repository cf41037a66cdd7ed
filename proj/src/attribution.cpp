#include "dpc/attribution.hpp"

#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <stdexcept>
#include <unordered_set>

namespace dpc {

namespace {

std::string canonical_number(double value) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", value);
  return buf;
}

void check_dim(const Model& model, const Eigen::VectorXd& v, const char* what) {
  if (v.size() != model.input_dim()) throw std::invalid_argument(std::string(what) + ": dimension mismatch");
}

Eigen::MatrixXd noisy_copies(const Eigen::VectorXd& x, double sigma, int n, const RandomStream& stream) {
  Eigen::MatrixXd out = x.replicate(1, n);
  const auto d = static_cast<std::uint64_t>(x.size());
  for (int j = 0; j < n; ++j)
    for (Eigen::Index i = 0; i < x.size(); ++i)
      out(i, j) += sigma * stream.normal(static_cast<std::uint64_t>(j) * d + static_cast<std::uint64_t>(i));
  return out;
}

}  // namespace

HyperParams& HyperParams::set(const std::string& key, double value) {
  entries_[key] = canonical_number(value);
  return *this;
}

HyperParams& HyperParams::set(const std::string& key, bool value) {
  entries_[key] = value ? "true" : "false";
  return *this;
}

HyperParams& HyperParams::set(const std::string& key, std::string value) {
  entries_[key] = std::move(value);
  return *this;
}

const std::string& HyperParams::text(const std::string& key) const {
  const auto it = entries_.find(key);
  if (it == entries_.end()) throw std::out_of_range("missing hyperparameter " + key);
  return it->second;
}

double HyperParams::number(const std::string& key) const { return std::stod(text(key)); }

bool HyperParams::flag(const std::string& key) const {
  const auto& v = text(key);
  if (v == "true") return true;
  if (v == "false") return false;
  throw std::invalid_argument("hyperparameter " + key + " is not a flag");
}

std::string HyperParams::canonical() const {
  std::string out;
  for (const auto& [k, v] : entries_) {
    if (!out.empty()) out += ';';
    out += k + "=" + v;
  }
  return out;
}

std::uint64_t HyperParams::hash() const { return fnv1a(canonical()); }

Attribution gradient_attribution(const Model& model, const Eigen::VectorXd& x, TargetClass target,
                                 ScoreKind score) {
  check_dim(model, x, "gradient");
  return {gradient<double>(model, x, target, score), "gradient", {}, target, Flavor::local};
}

Attribution guided_backprop_attribution(const Model& model, const Eigen::VectorXd& x,
                                        TargetClass target, ScoreKind score) {
  check_dim(model, x, "guided_backprop");
  return {guided_backprop<double>(model, x, target, score), "guided_backprop", {}, target, Flavor::local};
}

Attribution smoothgrad(const Model& model, const Eigen::VectorXd& x, TargetClass target,
                       double sigma, int n_samples, const RandomStream& stream, ScoreKind score) {
  check_dim(model, x, "smoothgrad");
  if (!(sigma > 0.0) || n_samples < 1) throw std::invalid_argument("smoothgrad: need sigma > 0, n_samples >= 1");
  const Eigen::MatrixXd grads = gradients<double>(model, noisy_copies(x, sigma, n_samples, stream), target, score);
  HyperParams hp;
  hp.set("sigma", sigma).set("n_samples", n_samples);
  return {grads.rowwise().mean(), "smoothgrad", hp, target, Flavor::local};
}

Attribution vargrad(const Model& model, const Eigen::VectorXd& x, TargetClass target, double sigma,
                    int n_samples, const RandomStream& stream, ScoreKind score) {
  check_dim(model, x, "vargrad");
  if (!(sigma > 0.0) || n_samples < 2) throw std::invalid_argument("vargrad: need sigma > 0, n_samples >= 2");
  const Eigen::MatrixXd grads = gradients<double>(model, noisy_copies(x, sigma, n_samples, stream), target, score);
  const Eigen::VectorXd mean = grads.rowwise().mean();
  const Eigen::MatrixXd centered = grads.colwise() - mean;
  HyperParams hp;
  hp.set("sigma", sigma).set("n_samples", n_samples);
  return {centered.array().square().rowwise().sum() / (n_samples - 1.0), "vargrad", hp, target, Flavor::local};
}

Attribution integrated_gradients(const Model& model, const Eigen::VectorXd& x, TargetClass target,
                                 const Eigen::VectorXd& baseline, int n_steps,
                                 bool multiply_by_inputs, ScoreKind score) {
  check_dim(model, x, "integrated_gradients");
  check_dim(model, baseline, "integrated_gradients baseline");
  if (n_steps < 1) throw std::invalid_argument("integrated_gradients: n_steps must be >= 1");
  const Eigen::VectorXd delta = x - baseline;
  Eigen::MatrixXd path(x.size(), n_steps);
  for (int k = 0; k < n_steps; ++k) path.col(k) = baseline + ((k + 0.5) / n_steps) * delta;
  const Eigen::VectorXd average = gradients<double>(model, path, target, score).rowwise().mean();
  HyperParams hp;
  hp.set("n_steps", n_steps).set("multiply_by_inputs", multiply_by_inputs);
  return {multiply_by_inputs ? Eigen::VectorXd(delta.cwiseProduct(average)) : average,
          "integrated_gradients", hp, target,
          multiply_by_inputs ? Flavor::baseline_oriented : Flavor::local};
}

void LimeTabularConfig::validate() const {
  if (!(alpha > 0.0) || !(kernel_width > 0.0) || !(perturbation_std > 0.0) || n_samples < 1)
    throw std::invalid_argument("LimeTabularConfig: all parameters must be positive");
}

Attribution lime_tabular(const Model& model, const Eigen::VectorXd& x, TargetClass target,
                         const LimeTabularConfig& cfg, const RandomStream& stream) {
  check_dim(model, x, "lime_tabular");
  cfg.validate();
  const int d = static_cast<int>(x.size());
  Eigen::MatrixXd noise(cfg.n_samples, d);
  for (int j = 0; j < cfg.n_samples; ++j)
    for (int i = 0; i < d; ++i)
      noise(j, i) = cfg.perturbation_std * stream.normal(static_cast<std::uint64_t>(j) * d + i);

  const Eigen::MatrixXd points = (noise.transpose()).colwise() + x;
  const Eigen::VectorXd targets = forward_scores<double>(model, points, target, ScoreKind::probability);
  const double inv_width2 = 1.0 / (cfg.kernel_width * cfg.kernel_width);
  const Eigen::VectorXd weights = (-noise.rowwise().squaredNorm() * inv_width2).array().exp();

  const auto fit = ridge_fit<double>(noise, targets, weights, cfg.alpha);
  HyperParams hp;
  hp.set("alpha", cfg.alpha).set("sigma_k", cfg.kernel_width).set("sigma_s", cfg.perturbation_std)
      .set("n_samples", cfg.n_samples);
  return {fit.weights, "lime_tabular", hp, target, Flavor::local};
}

std::string to_string(Replacement r) {
  switch (r) {
    case Replacement::segment_mean: return "segment-mean";
    case Replacement::image_mean: return "image-mean";
    case Replacement::dataset_mean: return "dataset-mean";
  }
  return "?";
}

Replacement parse_replacement(const std::string& text) {
  if (text == "segment-mean") return Replacement::segment_mean;
  if (text == "image-mean") return Replacement::image_mean;
  if (text == "dataset-mean") return Replacement::dataset_mean;
  throw std::invalid_argument("unknown replacement " + text);
}

void LimeImageConfig::validate(const ImageShape& shape) const {
  if (!(alpha > 0.0) || !(kernel_width > 0.0)) throw std::invalid_argument("LimeImageConfig: alpha and width must be positive");
  const int segments = segmentation.segments();
  (void)segmentation.labels(shape);
  if (n_samples < segments) throw std::invalid_argument("LimeImageConfig: n_samples below segment count");
  if (segments < 63 && static_cast<std::uint64_t>(n_samples) > (1ULL << segments))
    throw std::invalid_argument("LimeImageConfig: more samples than distinct masks");
}

Attribution lime_image(const Model& model, const Eigen::VectorXd& image, const ImageShape& shape,
                       TargetClass target, const LimeImageConfig& cfg, const RandomStream& stream,
                       const Eigen::VectorXd* dataset_mean) {
  check_dim(model, image, "lime_image");
  cfg.validate(shape);
  if (cfg.replacement == Replacement::dataset_mean && (!dataset_mean || dataset_mean->size() != image.size()))
    throw std::invalid_argument("lime_image: dataset-mean replacement needs dataset statistics");

  const std::vector<int> labels = cfg.segmentation.labels(shape);
  const int segments = cfg.segmentation.segments();
  const int pixels = shape.pixels();

  Eigen::VectorXd fill(pixels);
  switch (cfg.replacement) {
    case Replacement::image_mean: fill.setConstant(image.mean()); break;
    case Replacement::dataset_mean: fill = *dataset_mean; break;
    case Replacement::segment_mean: {
      Eigen::VectorXd sums = Eigen::VectorXd::Zero(segments);
      Eigen::VectorXd counts = Eigen::VectorXd::Zero(segments);
      for (int p = 0; p < pixels; ++p) {
        sums[labels[static_cast<std::size_t>(p)]] += image[p];
        counts[labels[static_cast<std::size_t>(p)]] += 1.0;
      }
      for (int p = 0; p < pixels; ++p) fill[p] = sums[labels[static_cast<std::size_t>(p)]] / counts[labels[static_cast<std::size_t>(p)]];
      break;
    }
  }

  Eigen::MatrixXd masks(cfg.n_samples, segments);
  std::unordered_set<std::string> seen;
  RandomCursor cursor(stream);
  for (int j = 0; j < cfg.n_samples;) {
    std::string key(static_cast<std::size_t>(segments), '0');
    for (int s = 0; s < segments; ++s)
      if (cursor.bits() >> 63) key[static_cast<std::size_t>(s)] = '1';
    if (!seen.insert(key).second) continue;
    for (int s = 0; s < segments; ++s) masks(j, s) = key[static_cast<std::size_t>(s)] == '1' ? 1.0 : 0.0;
    ++j;
  }

  Eigen::MatrixXd points(pixels, cfg.n_samples);
  for (int j = 0; j < cfg.n_samples; ++j)
    for (int p = 0; p < pixels; ++p)
      points(p, j) = masks(j, labels[static_cast<std::size_t>(p)]) > 0.5 ? image[p] : fill[p];

  const Eigen::VectorXd targets = forward_scores<double>(model, points, target, ScoreKind::probability);
  const Eigen::VectorXd off_fraction = (1.0 - masks.array()).rowwise().sum() / segments;
  const Eigen::VectorXd weights =
      (-off_fraction.array().square() / (cfg.kernel_width * cfg.kernel_width)).exp();
  const auto fit = ridge_fit<double>(masks, targets, weights, cfg.alpha);

  Eigen::VectorXd values(pixels);
  for (int p = 0; p < pixels; ++p) values[p] = fit.weights[labels[static_cast<std::size_t>(p)]];
  HyperParams hp;
  hp.set("alpha", cfg.alpha).set("sigma_k", cfg.kernel_width).set("n_samples", cfg.n_samples)
      .set("replacement", to_string(cfg.replacement))
      .set("grid", std::to_string(cfg.segmentation.grid_rows) + "x" + std::to_string(cfg.segmentation.grid_cols));
  return {values, "lime_image", hp, target, Flavor::local};
}

Attribution deepliftshap(const Model& model, const Eigen::VectorXd& x, TargetClass target,
                         const Eigen::MatrixXd& baselines, bool multiply_by_inputs, ScoreKind score) {
  check_dim(model, x, "deepliftshap");
  if (baselines.cols() == 0) throw std::invalid_argument("deepliftshap: empty baseline set");
  if (baselines.rows() != x.size()) throw std::invalid_argument("deepliftshap: baseline dimension mismatch");
  const Eigen::MatrixXd m = deeplift_multipliers<double>(model, x, baselines, target, score);
  Eigen::VectorXd values;
  if (multiply_by_inputs) {
    const Eigen::MatrixXd diff = (-baselines).colwise() + x;
    values = diff.cwiseProduct(m).rowwise().mean();
  } else {
    values = m.rowwise().mean();
  }
  HyperParams hp;
  hp.set("multiply_by_inputs", multiply_by_inputs).set("n_baselines", static_cast<int>(baselines.cols()));
  return {values, "deepliftshap", hp, target,
          multiply_by_inputs ? Flavor::baseline_oriented : Flavor::local};
}

Eigen::MatrixXd stratified_baselines(const Eigen::MatrixXd& train_x, const Eigen::VectorXi& train_y,
                                     std::optional<double> expected_label, int count,
                                     const RandomStream& stream) {
  if (count < 1) throw std::invalid_argument("stratified_baselines: count must be positive");
  if (train_x.rows() != train_y.size() || train_x.rows() == 0)
    throw std::invalid_argument("stratified_baselines: bad training split");
  RandomCursor cursor(stream);
  Eigen::MatrixXd out(train_x.cols(), count);
  if (!expected_label) {
    for (int j = 0; j < count; ++j)
      out.col(j) = train_x.row(static_cast<Eigen::Index>(cursor.below(static_cast<std::uint64_t>(train_x.rows())))).transpose();
    return out;
  }
  if (*expected_label < 0.0 || *expected_label > 1.0)
    throw std::invalid_argument("stratified_baselines: expected label outside [0, 1]");
  std::vector<Eigen::Index> negatives, positives;
  for (Eigen::Index i = 0; i < train_y.size(); ++i) (train_y[i] == 1 ? positives : negatives).push_back(i);
  const int n_pos = static_cast<int>(std::lround(*expected_label * count));
  if ((n_pos > 0 && positives.empty()) || (n_pos < count && negatives.empty()))
    throw std::invalid_argument("stratified_baselines: requested class has no samples");
  for (int j = 0; j < count; ++j) {
    const auto& pool = j < n_pos ? positives : negatives;
    out.col(j) = train_x.row(pool[cursor.below(pool.size())]).transpose();
  }
  return out;
}

Attribution random_attribution(int dim, bool constant, const RandomStream& stream, std::uint64_t sample_id) {
  if (dim < 1) throw std::invalid_argument("random_attribution: dim must be positive");
  const RandomStream source = constant ? stream.child("constant") : stream.child("sample").child(sample_id);
  HyperParams hp;
  hp.set("constant", constant);
  return {gaussian_vector(source, dim, 1.0), "random", hp, TargetClass::positive, Flavor::local};
}

Attribution sobel_edge_attribution(const Eigen::VectorXd& image, const ImageShape& shape, double post_sigma) {
  if (post_sigma < 0.0) throw std::invalid_argument("sobel_edge_attribution: post_sigma must be >= 0");
  const Eigen::MatrixXd edges = gaussian_blur(sobel_magnitude(to_matrix(image, shape)), post_sigma);
  HyperParams hp;
  hp.set("post_sigma", post_sigma);
  return {to_vector(edges), "sobel", hp, TargetClass::positive, Flavor::local};
}

}  // namespace dpc
