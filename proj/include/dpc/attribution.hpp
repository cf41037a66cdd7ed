#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>

#include <Eigen/Dense>

#include "dpc/image.hpp"
#include "dpc/model.hpp"
#include "dpc/numerics.hpp"

namespace dpc {

/// Local attributions predict the effect of nudging a feature; baseline-
/// oriented ones split s(x) - s(baseline) across features.
enum class Flavor { local, baseline_oriented };

/// Canonical (sorted-key) hyperparameter record.
class HyperParams {
 public:
  HyperParams& set(const std::string& key, double value);
  HyperParams& set(const std::string& key, int value) { return set(key, static_cast<double>(value)); }
  HyperParams& set(const std::string& key, bool value);
  HyperParams& set(const std::string& key, std::string value);
  HyperParams& set(const std::string& key, const char* value) { return set(key, std::string(value)); }

  bool has(const std::string& key) const { return entries_.count(key) > 0; }
  const std::string& text(const std::string& key) const;
  double number(const std::string& key) const;
  bool flag(const std::string& key) const;

  /// "key=value;key=value" in key order; the cache address of a config.
  std::string canonical() const;
  std::uint64_t hash() const;
  const std::map<std::string, std::string>& entries() const noexcept { return entries_; }

  bool operator==(const HyperParams&) const = default;

 private:
  std::map<std::string, std::string> entries_;
};

struct Attribution {
  Eigen::VectorXd values;
  std::string method;
  HyperParams hyperparams;
  TargetClass target = TargetClass::positive;
  Flavor flavor = Flavor::local;
};

Attribution gradient_attribution(const Model& model, const Eigen::VectorXd& x, TargetClass target,
                                 ScoreKind score = ScoreKind::logit);

Attribution guided_backprop_attribution(const Model& model, const Eigen::VectorXd& x,
                                        TargetClass target, ScoreKind score = ScoreKind::logit);

/// Mean gradient over x + eps, eps ~ N(0, sigma^2 I).
Attribution smoothgrad(const Model& model, const Eigen::VectorXd& x, TargetClass target,
                       double sigma, int n_samples, const RandomStream& stream,
                       ScoreKind score = ScoreKind::logit);

/// Per-coordinate unbiased variance of the noisy gradients; n_samples >= 2.
Attribution vargrad(const Model& model, const Eigen::VectorXd& x, TargetClass target, double sigma,
                    int n_samples, const RandomStream& stream, ScoreKind score = ScoreKind::logit);

/// Midpoint-rule path integral of the gradient from `baseline` to x. With
/// `multiply_by_inputs` off, the average path gradient is returned instead.
Attribution integrated_gradients(const Model& model, const Eigen::VectorXd& x, TargetClass target,
                                 const Eigen::VectorXd& baseline, int n_steps,
                                 bool multiply_by_inputs, ScoreKind score = ScoreKind::logit);

struct LimeTabularConfig {
  double alpha = 0.01;              // ridge penalty
  double kernel_width = 0.75;       // sigma_k
  double perturbation_std = 0.5;    // sigma_s
  int n_samples = 256;

  void validate() const;
};

/// Ridge surrogate fitted to class probabilities on Gaussian perturbations,
/// weighted by exp(-||eps||^2 / sigma_k^2).
Attribution lime_tabular(const Model& model, const Eigen::VectorXd& x, TargetClass target,
                         const LimeTabularConfig& cfg, const RandomStream& stream);

enum class Replacement { segment_mean, image_mean, dataset_mean };
std::string to_string(Replacement r);
Replacement parse_replacement(const std::string& text);

struct LimeImageConfig {
  double alpha = 0.01;
  double kernel_width = 0.25;  // on the fraction of switched-off segments
  int n_samples = 1024;
  Replacement replacement = Replacement::segment_mean;
  GridSegmentation segmentation;

  void validate(const ImageShape& shape) const;
};

/// Ridge surrogate over binary segment masks; switched-off segments are
/// filled per the replacement rule. Masks are distinct by construction.
Attribution lime_image(const Model& model, const Eigen::VectorXd& image, const ImageShape& shape,
                       TargetClass target, const LimeImageConfig& cfg, const RandomStream& stream,
                       const Eigen::VectorXd* dataset_mean = nullptr);

/// Mean DeepLift (Rescale) attribution over the baseline columns.
Attribution deepliftshap(const Model& model, const Eigen::VectorXd& x, TargetClass target,
                         const Eigen::MatrixXd& baselines, bool multiply_by_inputs,
                         ScoreKind score = ScoreKind::logit);

/// `count` training rows (returned as columns) whose label mean matches
/// `expected_label` (rounded to whole samples); nullopt draws uniformly.
Eigen::MatrixXd stratified_baselines(const Eigen::MatrixXd& train_x, const Eigen::VectorXi& train_y,
                                     std::optional<double> expected_label, int count,
                                     const RandomStream& stream);

/// Standard-normal attribution. `constant` reuses one vector per stream;
/// otherwise each sample id gets its own draw.
Attribution random_attribution(int dim, bool constant, const RandomStream& stream,
                               std::uint64_t sample_id);

/// Sobel magnitude, then a Gaussian blur of width post_sigma.
Attribution sobel_edge_attribution(const Eigen::VectorXd& image, const ImageShape& shape,
                                   double post_sigma);

}  // namespace dpc
