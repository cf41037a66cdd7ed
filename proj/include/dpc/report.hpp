#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "dpc/sweep.hpp"

namespace dpc {

struct BoxStats {
  double min = 0.0, q1 = 0.0, median = 0.0, q3 = 0.0, max = 0.0;
  std::size_t count = 0;
};

/// Linear-interpolated quartiles; whiskers at the observed extremes.
BoxStats box_stats(std::vector<double> values);

struct ReportSummary {
  std::vector<std::filesystem::path> files;
  std::vector<std::string> notices;
  /// Per model: "method|hyperparams" labels of the Pareto-optimal configs.
  std::map<std::string, std::vector<std::string>> pareto;
};

/// Writes, per model, a method comparison table, one boxplot per metric
/// (one box per method over its config means) and an Infidelity/DPC-ABPC
/// scatter marking the Pareto set, plus a correlation summary for all
/// models. A metric without finite values gets a notice instead of a plot.
ReportSummary emit_report(const std::vector<ResultRecord>& records, const std::filesystem::path& out_dir);

}  // namespace dpc
