#pragma once

#include <optional>
#include <span>
#include <vector>

namespace dpc::stats {

/// Ranks starting at 1; tied values share the average of their ranks.
std::vector<double> average_ranks(std::span<const double> values);

/// Spearman rank correlation (Pearson of average ranks). Empty when either
/// rank vector has zero variance.
std::optional<double> spearman_rho(std::span<const double> xs, std::span<const double> ys);

double pearson(std::span<const double> xs, std::span<const double> ys);

/// Mann-Whitney AUROC with tie correction. Labels are 0/1.
double auroc(std::span<const double> scores, std::span<const int> labels);

struct ParetoPoint {
  double infidelity;  // minimized
  double dpc;         // maximized
};

/// Indices (ascending) of the points not dominated by any other point:
/// q dominates p when q is at least as good in both coordinates and strictly
/// better in one.
std::vector<std::size_t> pareto_front(std::span<const ParetoPoint> points);

struct Summary {
  double mean = 0.0;
  double median = 0.0;
  double std = 0.0;  // sample standard deviation (n - 1); 0 for n < 2
  double min = 0.0;
  double max = 0.0;
  std::size_t count = 0;
};

Summary summarize(std::span<const double> values);
double median(std::vector<double> values);

}  // namespace dpc::stats
