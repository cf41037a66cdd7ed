#include "dpc/perturbation.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <ostream>
#include <stdexcept>

#include "dpc/stats.hpp"

namespace dpc {

std::string to_string(Order order) { return order == Order::morf ? "morf" : "lerf"; }

std::string to_string(RankingRule rule) {
  return rule == RankingRule::signed_desc ? "signed" : "absolute";
}

RankingRule parse_ranking_rule(const std::string& text) {
  if (text == "signed" || text == "signed-desc") return RankingRule::signed_desc;
  if (text == "absolute" || text == "absolute-desc") return RankingRule::absolute_desc;
  throw std::invalid_argument("unknown ranking rule " + text);
}

PerturbationSchedule build_schedule(const Eigen::VectorXd& attribution, int steps, RankingRule ranking,
                                    Order order, const Eigen::VectorXd& baseline) {
  const int d = static_cast<int>(attribution.size());
  if (baseline.size() != d) throw std::invalid_argument("build_schedule: baseline dimension mismatch");
  if (steps < 1 || steps > d) throw std::invalid_argument("build_schedule: steps must be in [1, d]");

  std::vector<int> features(static_cast<std::size_t>(d));
  std::iota(features.begin(), features.end(), 0);
  const auto key = [&](int i) {
    return ranking == RankingRule::signed_desc ? attribution[i] : std::abs(attribution[i]);
  };
  std::stable_sort(features.begin(), features.end(), [&](int a, int b) { return key(a) > key(b); });

  PerturbationSchedule out;
  out.order = order;
  out.ranking = ranking;
  out.baseline = baseline;
  const int size = d / steps;
  for (int t = 0; t < steps; ++t) {
    const auto begin = features.begin() + t * size;
    const auto end = t + 1 == steps ? features.end() : begin + size;
    out.groups.emplace_back(begin, end);
  }
  if (order == Order::lerf) std::reverse(out.groups.begin(), out.groups.end());
  return out;
}

CurveRecord run_guided_experiment(Scorer& scorer, const Eigen::VectorXd& x,
                                  const Eigen::VectorXd& attribution,
                                  const PerturbationSchedule& schedule, std::optional<double> score0) {
  if (x.size() != attribution.size() || schedule.baseline.size() != x.size())
    throw std::invalid_argument("run_guided_experiment: dimension mismatch");
  CurveRecord out;
  out.score0 = score0 ? *score0 : scorer(x);

  const int steps = schedule.steps();
  Eigen::MatrixXd states(x.size(), steps);
  std::vector<int> directions(static_cast<std::size_t>(steps));
  Eigen::VectorXd current = x;
  for (int t = 0; t < steps; ++t) {
    double attr_sum = 0.0, shift_sum = 0.0;
    for (int i : schedule.groups[static_cast<std::size_t>(t)]) {
      attr_sum += attribution[i];
      shift_sum += x[i] - schedule.baseline[i];
      current[i] = schedule.baseline[i];
    }
    directions[static_cast<std::size_t>(t)] = sign_of(attr_sum) * sign_of(shift_sum);
    states.col(t) = current;
  }

  const std::uint64_t before = scorer.evaluations();
  const Eigen::VectorXd scores = scorer.batch(states);
  out.eval_count = scorer.evaluations() - before;

  double previous = out.score0;
  for (int t = 0; t < steps; ++t) {
    const double pc = scores[t] - previous;
    out.pc_steps.push_back(pc);
    out.dpc_steps.push_back(directions[static_cast<std::size_t>(t)] * pc);
    previous = scores[t];
  }
  return out;
}

std::vector<double> abpc_weights(int steps) {
  if (steps < 1) throw std::invalid_argument("abpc_weights: steps must be positive");
  std::vector<double> w(static_cast<std::size_t>(steps));
  const double norm = static_cast<double>(steps) * (steps + 1);
  for (int t = 1; t <= steps; ++t) w[static_cast<std::size_t>(t - 1)] = 2.0 * (steps - t + 1) / norm;
  return w;
}

double weighted_aupc(const std::vector<double>& steps) {
  const auto w = abpc_weights(static_cast<int>(steps.size()));
  double cumulative = 0.0, area = 0.0;
  for (std::size_t t = 0; t < steps.size(); ++t) {
    cumulative += steps[t];
    area += w[t] * cumulative;
  }
  return area;
}

double abpc(const CurveRecord& lerf, const CurveRecord& morf, CurveMetric metric) {
  const auto& a = metric == CurveMetric::pc ? lerf.pc_steps : lerf.dpc_steps;
  const auto& b = metric == CurveMetric::pc ? morf.pc_steps : morf.dpc_steps;
  if (a.size() != b.size() || a.empty()) throw std::invalid_argument("abpc: curve length mismatch");
  return weighted_aupc(a) - weighted_aupc(b);
}

GuidedResult evaluate_guided(Scorer& scorer, const Eigen::VectorXd& x, const Eigen::VectorXd& attribution,
                             int steps, RankingRule ranking, const Eigen::VectorXd& baseline,
                             std::optional<double> score0) {
  const double s0 = score0 ? *score0 : scorer(x);
  GuidedResult out;
  out.morf = run_guided_experiment(scorer, x, attribution,
                                   build_schedule(attribution, steps, ranking, Order::morf, baseline), s0);
  out.lerf = run_guided_experiment(scorer, x, attribution,
                                   build_schedule(attribution, steps, ranking, Order::lerf, baseline), s0);
  out.pc_abpc = abpc(out.lerf, out.morf, CurveMetric::pc);
  out.dpc_abpc = abpc(out.lerf, out.morf, CurveMetric::dpc);
  return out;
}

void write_curve_header(std::ostream& out) {
  out << "sample\torder\tstep\tpc\tdpc\tpc_cumulative\tdpc_cumulative\n";
}

void write_curve_rows(std::ostream& out, const std::string& sample_id, const GuidedResult& result) {
  for (const auto* curve : {&result.morf, &result.lerf}) {
    const char* order = curve == &result.morf ? "morf" : "lerf";
    double pc_c = 0.0, dpc_c = 0.0;
    for (std::size_t t = 0; t < curve->pc_steps.size(); ++t) {
      pc_c += curve->pc_steps[t];
      dpc_c += curve->dpc_steps[t];
      out << sample_id << '\t' << order << '\t' << t + 1 << '\t' << curve->pc_steps[t] << '\t'
          << curve->dpc_steps[t] << '\t' << pc_c << '\t' << dpc_c << '\n';
    }
  }
}

int InfidelityConfig::resolved_subset_size(int dim) const {
  if (image_shape) return patch_side * patch_side;
  return subset_size > 0 ? subset_size : (dim + 1) / 2;
}

void InfidelityConfig::validate(int dim) const {
  if (n_perturbations < 1 || !(noise_sigma > 0.0)) throw std::invalid_argument("InfidelityConfig: invalid counts");
  if (image_shape) {
    if (image_shape->pixels() != dim) throw std::invalid_argument("InfidelityConfig: image shape mismatch");
    if (patch_side < 1 || patch_side > std::min(image_shape->rows, image_shape->cols))
      throw std::invalid_argument("InfidelityConfig: patch side out of range");
  } else {
    const int k = resolved_subset_size(dim);
    if (k < 1 || k > dim) throw std::invalid_argument("InfidelityConfig: subset size out of range");
  }
}

InfidelityConfig InfidelityConfig::image_default(const ImageShape& shape) {
  InfidelityConfig cfg;
  cfg.n_perturbations = 640;
  cfg.image_shape = shape;
  cfg.patch_side = std::max(1, std::min(shape.rows, shape.cols) / 4);
  return cfg;
}

double infidelity_of(const std::vector<PerturbationPair>& pairs) {
  if (pairs.empty()) throw std::invalid_argument("infidelity_of: no pairs");
  double total = 0.0;
  for (const auto& p : pairs) total += (p.predicted - p.actual) * (p.predicted - p.actual);
  return total / static_cast<double>(pairs.size());
}

InfidelityResult infidelity(Scorer& scorer, const Eigen::VectorXd& x, const Eigen::VectorXd& attribution,
                            const InfidelityConfig& cfg, const RandomStream& stream,
                            std::optional<double> score0) {
  const int d = static_cast<int>(x.size());
  if (attribution.size() != d) throw std::invalid_argument("infidelity: dimension mismatch");
  cfg.validate(d);
  const double s0 = score0 ? *score0 : scorer(x);
  const int k = cfg.resolved_subset_size(d);

  Eigen::MatrixXd points = x.replicate(1, cfg.n_perturbations);
  std::vector<double> predicted(static_cast<std::size_t>(cfg.n_perturbations));
  for (int j = 0; j < cfg.n_perturbations; ++j) {
    const RandomStream draw = stream.child(static_cast<std::uint64_t>(j));
    RandomCursor pick(draw.child("subset"));
    std::vector<int> subset;
    if (cfg.image_shape) {
      const auto& shape = *cfg.image_shape;
      const int r0 = static_cast<int>(pick.below(static_cast<std::uint64_t>(shape.rows - cfg.patch_side + 1)));
      const int c0 = static_cast<int>(pick.below(static_cast<std::uint64_t>(shape.cols - cfg.patch_side + 1)));
      for (int r = r0; r < r0 + cfg.patch_side; ++r)
        for (int c = c0; c < c0 + cfg.patch_side; ++c) subset.push_back(shape.index(r, c));
    } else {
      subset = pick.sample_without_replacement(d, k);
    }
    const RandomStream noise = draw.child("noise");
    double p = 0.0;
    for (std::size_t m = 0; m < subset.size(); ++m) {
      const double eps = cfg.noise_sigma * noise.normal(m);
      points(subset[m], j) += eps;
      p -= eps * attribution[subset[m]];  // (x - pi(x))^T a
    }
    predicted[static_cast<std::size_t>(j)] = p;
  }
  const Eigen::VectorXd scores = scorer.batch(points);

  InfidelityResult out;
  out.pairs.reserve(static_cast<std::size_t>(cfg.n_perturbations));
  for (int j = 0; j < cfg.n_perturbations; ++j)
    out.pairs.push_back({predicted[static_cast<std::size_t>(j)], s0 - scores[j]});
  out.value = infidelity_of(out.pairs);
  return out;
}

std::vector<UncertaintyRow> infidelity_uncertainty(const std::vector<PerturbationPair>& pairs,
                                                   const std::vector<int>& sizes, int repeats,
                                                   const RandomStream& stream) {
  if (repeats < 1) throw std::invalid_argument("infidelity_uncertainty: repeats must be positive");
  std::vector<UncertaintyRow> out;
  for (int size : sizes) {
    if (size < 1 || static_cast<std::size_t>(size) > pairs.size())
      throw std::invalid_argument("infidelity_uncertainty: size exceeds cached pairs");
    std::vector<double> values;
    for (int r = 0; r < repeats; ++r) {
      RandomCursor cursor(stream.child(static_cast<std::uint64_t>(size)).child(static_cast<std::uint64_t>(r)));
      auto picked = cursor.sample_without_replacement(static_cast<int>(pairs.size()), size);
      std::sort(picked.begin(), picked.end());
      double total = 0.0;
      for (int i : picked) {
        const auto& p = pairs[static_cast<std::size_t>(i)];
        total += (p.predicted - p.actual) * (p.predicted - p.actual);
      }
      values.push_back(total / size);
    }
    const auto summary = stats::summarize(values);
    out.push_back({size, summary.mean, summary.std});
  }
  return out;
}

}  // namespace dpc
