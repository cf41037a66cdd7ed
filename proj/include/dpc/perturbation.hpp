#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "dpc/image.hpp"
#include "dpc/model.hpp"
#include "dpc/numerics.hpp"

namespace dpc {

enum class Order { morf, lerf };
enum class RankingRule { signed_desc, absolute_desc };
enum class CurveMetric { pc, dpc };

std::string to_string(Order order);
std::string to_string(RankingRule rule);
RankingRule parse_ranking_rule(const std::string& text);

struct PerturbationSchedule {
  Order order = Order::morf;
  RankingRule ranking = RankingRule::signed_desc;
  std::vector<std::vector<int>> groups;  // one group per step
  Eigen::VectorXd baseline;

  int steps() const noexcept { return static_cast<int>(groups.size()); }
};

/// Sorts features by the ranking rule (ties: ascending index) and buckets
/// them into `steps` equal groups, the remainder going to the last group.
/// LeRF is the reversed MoRF group sequence.
PerturbationSchedule build_schedule(const Eigen::VectorXd& attribution, int steps, RankingRule ranking,
                                    Order order, const Eigen::VectorXd& baseline);

struct CurveRecord {
  std::vector<double> pc_steps;
  std::vector<double> dpc_steps;
  double score0 = 0.0;
  std::uint64_t eval_count = 0;  // perturbed evaluations only
};

/// Guided perturbation experiment: replace group G_t with baseline values,
/// pc_t = s(pi_t) - s(pi_{t-1}),
/// dpc_t = sign(sum_G a_i) * sign(sum_G (x_i - baseline_i)) * pc_t.
/// Both sequences come from the same T evaluations. `score0` is s(x); when
/// absent it is evaluated (and counted) here.
CurveRecord run_guided_experiment(Scorer& scorer, const Eigen::VectorXd& x,
                                  const Eigen::VectorXd& attribution,
                                  const PerturbationSchedule& schedule,
                                  std::optional<double> score0 = std::nullopt);

/// Step weights 2(T - t + 1) / (T(T + 1)), t = 1..T; they sum to one.
std::vector<double> abpc_weights(int steps);

/// Weighted area between the cumulative LeRF and MoRF curves.
double abpc(const CurveRecord& lerf, const CurveRecord& morf, CurveMetric metric);

/// Weighted area under one cumulative curve (lower is a stronger early drop).
double weighted_aupc(const std::vector<double>& steps);

/// MoRF + LeRF experiment sharing one unperturbed evaluation.
struct GuidedResult {
  CurveRecord morf;
  CurveRecord lerf;
  double pc_abpc = 0.0;
  double dpc_abpc = 0.0;
};

GuidedResult evaluate_guided(Scorer& scorer, const Eigen::VectorXd& x, const Eigen::VectorXd& attribution,
                             int steps, RankingRule ranking, const Eigen::VectorXd& baseline,
                             std::optional<double> score0 = std::nullopt);

/// One row per (sample, order, step) for plotting.
void write_curve_rows(std::ostream& out, const std::string& sample_id, const GuidedResult& result);
void write_curve_header(std::ostream& out);

struct InfidelityConfig {
  int n_perturbations = 1280;
  double noise_sigma = 0.2;
  /// Number of perturbed features; 0 means ceil(d / 2).
  int subset_size = 0;
  /// When set, perturb a random square patch of this side instead of a
  /// uniform feature subset (image inputs).
  std::optional<ImageShape> image_shape;
  int patch_side = 0;

  int resolved_subset_size(int dim) const;
  void validate(int dim) const;

  /// 640 perturbations and a quarter-side square patch.
  static InfidelityConfig image_default(const ImageShape& shape);
};

struct PerturbationPair {
  double predicted;  // P = (x - pi(x))^T a
  double actual;     // S = s(x) - s(pi(x))
};

struct InfidelityResult {
  double value = 0.0;
  std::vector<PerturbationPair> pairs;
};

/// Monte Carlo infidelity E[(P - S)^2] with Gaussian noise on a random
/// feature subset. Lower is better.
InfidelityResult infidelity(Scorer& scorer, const Eigen::VectorXd& x, const Eigen::VectorXd& attribution,
                            const InfidelityConfig& cfg, const RandomStream& stream,
                            std::optional<double> score0 = std::nullopt);

double infidelity_of(const std::vector<PerturbationPair>& pairs);

struct UncertaintyRow {
  int size = 0;
  double mean = 0.0;
  double std = 0.0;
};

/// Resamples `repeats` subsets of each size (without replacement) from
/// cached pairs and reports the spread of the resulting infidelity values.
/// Performs no model evaluations.
std::vector<UncertaintyRow> infidelity_uncertainty(const std::vector<PerturbationPair>& pairs,
                                                   const std::vector<int>& sizes, int repeats,
                                                   const RandomStream& stream);

}  // namespace dpc
