#include "dpc/audit.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include "dpc/perturbation.hpp"

namespace dpc {
namespace {

void check_inputs(const Model& model, const Eigen::VectorXd& x, const Eigen::VectorXd& attribution,
                  Eigen::Index baseline_rows, int max_dim) {
  const int d = static_cast<int>(x.size());
  if (d != model.input_dim() || attribution.size() != d || baseline_rows != d)
    throw std::invalid_argument("audit: dimension mismatch");
  if (d < 1 || d > max_dim) throw std::invalid_argument("audit: dimension exceeds enumeration limit");
}

// Scores of x with every subset replaced by each baseline, averaged over
// baselines. Column s of the batch is subset s.
Eigen::VectorXd subset_scores(const Model& model, const Eigen::VectorXd& x, const Eigen::MatrixXd& baselines,
                              TargetClass target) {
  const int d = static_cast<int>(x.size());
  const std::uint32_t count = 1u << d;
  Eigen::VectorXd mean = Eigen::VectorXd::Zero(count);
  Eigen::MatrixXd states(d, count);
  for (Eigen::Index b = 0; b < baselines.cols(); ++b) {
    for (std::uint32_t s = 0; s < count; ++s)
      for (int i = 0; i < d; ++i) states(i, s) = (s >> i) & 1u ? baselines(i, b) : x[i];
    mean += forward_scores(model, states, target, ScoreKind::logit);
  }
  return mean / static_cast<double>(baselines.cols());
}

AuditReport audit_against(const Eigen::VectorXd& attribution, const Eigen::VectorXd& scores, double tolerance) {
  const int d = static_cast<int>(attribution.size());
  AuditReport report;
  report.tolerance = tolerance;
  report.max_residual_by_size.assign(static_cast<std::size_t>(d) + 1, 0.0);
  const double s_x = scores[0];
  for (std::uint32_t s = 1; s < (1u << d); ++s) {
    double sum = 0.0;
    for (int i = 0; i < d; ++i)
      if ((s >> i) & 1u) sum += attribution[i];
    const double residual = std::abs(sum - (s_x - scores[s]));
    auto& by_size = report.max_residual_by_size[static_cast<std::size_t>(std::popcount(s))];
    by_size = std::max(by_size, residual);
    report.max_residual = std::max(report.max_residual, residual);
    if (residual > tolerance) report.violations.push_back({s, residual});
    ++report.checked_subsets;
  }
  report.passed = report.max_residual <= tolerance;
  return report;
}

}  // namespace

AuditReport sensitivity_n_audit(const Model& model, const Eigen::VectorXd& x,
                                const Eigen::VectorXd& attribution, const Eigen::VectorXd& baseline,
                                TargetClass target, double tolerance, int max_dim) {
  check_inputs(model, x, attribution, baseline.size(), max_dim);
  return audit_against(attribution, subset_scores(model, x, baseline, target), tolerance);
}

AuditReport sensitivity_n_audit_mean(const Model& model, const Eigen::VectorXd& x,
                                     const Eigen::VectorXd& attribution, const Eigen::MatrixXd& baselines,
                                     TargetClass target, double tolerance, int max_dim) {
  check_inputs(model, x, attribution, baselines.rows(), max_dim);
  if (baselines.cols() == 0) throw std::invalid_argument("audit: empty baseline set");
  return audit_against(attribution, subset_scores(model, x, baselines, target), tolerance);
}

OptimalityReport pc_optimality_audit(const Model& model, const Eigen::VectorXd& x,
                                     const Eigen::VectorXd& attribution, const Eigen::VectorXd& baseline,
                                     TargetClass target, double tolerance, int max_dim) {
  check_inputs(model, x, attribution, baseline.size(), max_dim);
  const int d = static_cast<int>(x.size());
  const Eigen::VectorXd scores = subset_scores(model, x, baseline, target);
  const std::vector<double> weights = abpc_weights(d);

  const auto area = [&](const std::vector<int>& order) {
    std::uint32_t removed = 0;
    double total = 0.0;
    for (int t = 0; t < d; ++t) {
      removed |= 1u << order[static_cast<std::size_t>(t)];
      total += weights[static_cast<std::size_t>(t)] * (scores[removed] - scores[0]);
    }
    return total;
  };

  OptimalityReport report;
  const auto schedule = build_schedule(attribution, d, RankingRule::signed_desc, Order::morf, baseline);
  for (const auto& group : schedule.groups) report.attribution_order.push_back(group.front());
  report.attribution_aupc = area(report.attribution_order);

  std::vector<int> order(static_cast<std::size_t>(d));
  std::iota(order.begin(), order.end(), 0);
  report.best_aupc = area(order);
  report.best_order = order;
  do {
    const double a = area(order);
    if (a < report.best_aupc) {
      report.best_aupc = a;
      report.best_order = order;
    }
    ++report.permutations;
  } while (std::next_permutation(order.begin(), order.end()));

  report.passed = report.attribution_aupc <= report.best_aupc + tolerance;
  return report;
}

std::string audit_row(const std::string& model_id, const std::string& method, const std::string& sample_id,
                      const AuditReport& report) {
  std::ostringstream row;
  row.precision(17);
  row << model_id << '\t' << method << '\t' << sample_id << '\t' << report.checked_subsets << '\t'
      << report.max_residual << '\t' << report.tolerance << '\t' << (report.passed ? "pass" : "fail");
  return row.str();
}

}  // namespace dpc
