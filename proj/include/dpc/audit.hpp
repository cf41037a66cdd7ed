#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "dpc/model.hpp"

namespace dpc {

struct SubsetResidual {
  std::uint32_t subset;  // bit i set means feature i is replaced
  double residual;
};

struct AuditReport {
  std::uint64_t checked_subsets = 0;
  double max_residual = 0.0;
  double tolerance = 0.0;
  /// Largest residual among subsets of each size (index 0 unused).
  std::vector<double> max_residual_by_size;
  std::vector<SubsetResidual> violations;
  bool passed = false;
};

/// Exhaustively compares sum_{i in S} a_i with s(x) - s(x with S set to the
/// baseline) on the logit score for every nonempty subset S.
AuditReport sensitivity_n_audit(const Model& model, const Eigen::VectorXd& x,
                                const Eigen::VectorXd& attribution, const Eigen::VectorXd& baseline,
                                TargetClass target, double tolerance, int max_dim = 12);

/// The same audit with several baselines: the score of the replaced input
/// is averaged across the baseline columns, matching a mean-baseline
/// attribution such as DeepLiftSHAP.
AuditReport sensitivity_n_audit_mean(const Model& model, const Eigen::VectorXd& x,
                                     const Eigen::VectorXd& attribution, const Eigen::MatrixXd& baselines,
                                     TargetClass target, double tolerance, int max_dim = 12);

struct OptimalityReport {
  std::uint64_t permutations = 0;
  double best_aupc = 0.0;
  double attribution_aupc = 0.0;
  std::vector<int> best_order;
  std::vector<int> attribution_order;
  bool passed = false;
};

/// Enumerates every single-feature removal order and checks whether the
/// signed-descending order of `attribution` attains the minimum weighted
/// MoRF area (ties allowed up to `tolerance`). Logit score.
OptimalityReport pc_optimality_audit(const Model& model, const Eigen::VectorXd& x,
                                     const Eigen::VectorXd& attribution, const Eigen::VectorXd& baseline,
                                     TargetClass target, double tolerance = 1e-9, int max_dim = 8);

/// Tab-separated summary row for the report stream.
std::string audit_row(const std::string& model_id, const std::string& method, const std::string& sample_id,
                      const AuditReport& report);

}  // namespace dpc
