#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "dpc/attribution.hpp"
#include "dpc/cache.hpp"
#include "dpc/image.hpp"
#include "dpc/model.hpp"
#include "dpc/perturbation.hpp"

namespace dpc {

struct MethodConfig {
  std::string method;
  HyperParams hyperparams;
};

struct SweepGrid {
  std::vector<MethodConfig> configs;

  std::size_t count(const std::string& method) const;
  /// Configurations of the listed methods, in grid order.
  SweepGrid only(const std::vector<std::string>& methods) const;
};

/// Tabular grid: gradient, guided_backprop, IG (8), tabular LIME (729),
/// DeepLiftSHAP (24), SmoothGrad (5), VarGrad (5), random (2).
SweepGrid tabular_grid();
SweepGrid lime_tabular_grid();
/// Image grid: the tabular propagation and wrapping methods, grid-segmented
/// LIME (8 alpha x 4 widths x 3 fills x 4 grids up to 8 x 8) and Sobel (4).
SweepGrid image_grid();

/// Everything an attribution method may need beyond the model and input.
struct AttributionContext {
  const Model* model = nullptr;
  const Eigen::MatrixXd* train_x = nullptr;  // standardized training rows
  const Eigen::VectorXi* train_y = nullptr;
  Eigen::VectorXd feature_min, feature_mean, feature_median, feature_max;
  std::optional<ImageShape> image_shape;
  std::uint64_t seed = 0;
  int ig_steps = 64;
  int smoothgrad_samples = 32;
  int dls_baselines = 1024;
  ScoreKind explain_score = ScoreKind::logit;
};

AttributionContext make_context(const Model& model, const Eigen::MatrixXd& train_x, const Eigen::VectorXi& train_y,
                                std::uint64_t seed, std::optional<ImageShape> image_shape = std::nullopt);

/// Class with the larger probability; the positive class on a tie.
TargetClass predicted_class(const Model& model, const Eigen::VectorXd& x);

/// Stream for (seed, method, hyperparameters), shared by all samples.
RandomStream config_stream(std::uint64_t seed, const MethodConfig& config);

Attribution compute_attribution(const AttributionContext& ctx, const MethodConfig& config, const Eigen::VectorXd& x,
                                TargetClass target, std::uint64_t sample_index);

struct MetricsConfig {
  bool pc = true;
  bool dpc = true;
  bool infidelity = true;
  int steps = 0;  // 0 selects d (singleton groups)
  RankingRule pc_ranking = RankingRule::signed_desc;
  RankingRule dpc_ranking = RankingRule::absolute_desc;
  ScoreKind score = ScoreKind::probability;
  InfidelityConfig infidelity_config;
  std::optional<Eigen::VectorXd> baseline;  // zero vector when absent

  /// Parses "pc", "dpc", "infidelity" or "all".
  void select(const std::string& metric);
};

struct SampleRow {
  std::size_t config = 0;
  std::uint64_t sample = 0;
  double pc_abpc = 0.0;
  double dpc_abpc = 0.0;
  double infidelity = 0.0;
  std::uint64_t guided_evaluations = 0;
  std::uint64_t infidelity_evaluations = 0;
  bool non_finite = false;
  bool degenerate = false;
};

struct ResultRecord {
  std::string model_id;
  std::string split;
  std::string method;
  std::string hyperparams;  // canonical text
  std::uint64_t hyperparams_hash = 0;
  std::string metric;       // pc_abpc, dpc_abpc, infidelity
  std::string aggregate;    // mean, median, std, min, max
  double value = 0.0;
  std::uint64_t eval_count = 0;
  std::uint64_t samples = 0;
  std::uint64_t flagged_non_finite = 0;
  std::uint64_t flagged_degenerate = 0;
};

struct SweepOptions {
  std::string model_id = "model";
  std::string split = "validation";
  std::uint64_t seed = 0;
  int max_samples = 0;  // 0 evaluates every row
  int shard_index = 0;
  int shard_count = 1;
  std::optional<std::filesystem::path> cache_dir;
  /// When set, every guided experiment is appended here as curve rows.
  std::ostream* curves = nullptr;
};

struct SweepResult {
  std::vector<SampleRow> rows;
  std::vector<ResultRecord> records;
  CacheStats cache;
  std::uint64_t attribution_computations = 0;
  double wall_seconds = 0.0;
};

/// Evaluates every configuration on the selected samples. Rows are sorted
/// by (config, sample); records are aggregated from the rows.
SweepResult run_sweep(const AttributionContext& ctx, const Eigen::MatrixXd& samples, const SweepGrid& grid,
                      const MetricsConfig& metrics, const SweepOptions& options);

/// Merges shard rows and re-aggregates them.
std::vector<SampleRow> merge_rows(std::vector<std::vector<SampleRow>> shards);
std::vector<ResultRecord> aggregate_rows(const std::vector<SampleRow>& rows, const SweepGrid& grid,
                                         const MetricsConfig& metrics, const SweepOptions& options);

void write_records(std::ostream& out, const std::vector<ResultRecord>& records);
std::vector<ResultRecord> read_records(std::istream& in);
void write_sample_rows(std::ostream& out, const std::vector<SampleRow>& rows, const SweepGrid& grid);

/// Per-config aggregate lookup: value of (metric, aggregate) for each
/// config in grid order; NaN when the record is missing.
std::vector<double> config_values(const std::vector<ResultRecord>& records, const SweepGrid& grid,
                                  const std::string& metric, const std::string& aggregate = "mean");

struct BenchmarkResult {
  std::vector<std::uint64_t> guided_counts;      // per sample, MoRF + LeRF
  std::vector<std::uint64_t> infidelity_counts;  // per sample
  double guided_seconds = 0.0;
  double infidelity_seconds = 0.0;
  double count_ratio = 0.0;
  double time_ratio = 0.0;
};

/// Times both metrics on the same samples with precomputed attributions
/// (columns of `attributions`); counts exclude the shared s(x).
BenchmarkResult cost_benchmark(const Model& model, const Eigen::MatrixXd& samples, const Eigen::MatrixXd& attributions,
                               int steps, const InfidelityConfig& infidelity_config, std::uint64_t seed,
                               ScoreKind score = ScoreKind::probability);

struct ConfigUncertainty {
  std::string label;
  std::vector<UncertaintyRow> rows;
};

/// Config-level resampling: each repeat draws `size` cached pairs per
/// sample, averages the per-sample infidelities, and the spread is taken
/// across repeats.
std::vector<UncertaintyRow> pooled_infidelity_uncertainty(
    const std::vector<std::vector<PerturbationPair>>& per_sample, const std::vector<int>& sizes, int repeats,
    const RandomStream& stream);

/// Resampling stream keyed by the cached pair values alone, so reruns
/// under any run seed that reuse the same pairs report the same spread.
RandomStream pairs_stream(const std::vector<std::vector<PerturbationPair>>& per_sample);

}  // namespace dpc
