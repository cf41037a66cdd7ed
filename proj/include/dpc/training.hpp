#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "dpc/model.hpp"

namespace dpc {

/// AdamW with the AMSGrad max-of-second-moment correction, minibatch
/// logistic loss, early stopping on validation AUROC.
struct TrainConfig {
  double learning_rate = 1e-3;
  double weight_decay = 1e-2;
  int epochs = 200;
  int batch_size = 64;
  std::uint64_t seed = 0;
  int patience = 10;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  /// Std of Gaussian feature noise added to each training batch; 0 disables.
  double augmentation_sigma = 0.05;
};

struct ArchSpec {
  ModelKind kind = ModelKind::linear;
  std::vector<int> hidden;  // ignored for linear

  static ArchSpec linear() { return {ModelKind::linear, {}}; }
  /// The seven-hidden-layer tabular MLP.
  static ArchSpec tabular_mlp() { return {ModelKind::mlp, {32, 128, 256, 128, 256, 128, 32}}; }
};

struct TrainingSummary {
  double train_accuracy = 0.0;
  double validation_accuracy = 0.0;
  double train_auroc = 0.0;
  double validation_auroc = 0.0;
  int epochs_run = 0;
  int best_epoch = 0;
};

struct TrainedModel {
  Model model;
  TrainingSummary summary;
  TrainConfig config;
};

/// Splits are n x d (rows are samples); labels are 0/1.
TrainedModel train_classifier(const Eigen::MatrixXd& train_x, const Eigen::VectorXi& train_y,
                              const Eigen::MatrixXd& val_x, const Eigen::VectorXi& val_y,
                              const ArchSpec& arch, const TrainConfig& cfg);

double accuracy(const Model& model, const Eigen::MatrixXd& x, const Eigen::VectorXi& y);
double auroc(const Model& model, const Eigen::MatrixXd& x, const Eigen::VectorXi& y);

}  // namespace dpc
