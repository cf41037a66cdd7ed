#include "dpc/sweep.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <istream>
#include <limits>
#include <map>
#include <ostream>
#include <stdexcept>
#include <tuple>

#include "json.hpp"

#include "dpc/stats.hpp"

namespace dpc {
namespace {

using Clock = std::chrono::steady_clock;

const char* const kLabels[] = {"0.0", "0.1", "0.2", "0.3", "0.4", "0.5",
                               "0.6", "0.7", "0.8", "0.9", "1.0", "random"};

void add_propagation(SweepGrid& grid, int dls_baselines) {
  grid.configs.push_back({"gradient", {}});
  grid.configs.push_back({"guided_backprop", {}});
  for (const char* baseline : {"min", "mean", "median", "max"}) {
    for (bool multiply : {true, false}) {
      HyperParams hp;
      hp.set("baseline", baseline).set("multiply_by_inputs", multiply).set("n_steps", 64);
      grid.configs.push_back({"integrated_gradients", hp});
    }
  }
  for (const char* label : kLabels) {
    for (bool multiply : {true, false}) {
      HyperParams hp;
      hp.set("expected_label", label).set("multiply_by_inputs", multiply).set("n_baselines", dls_baselines);
      grid.configs.push_back({"deepliftshap", hp});
    }
  }
}

void add_wrappers(SweepGrid& grid) {
  for (const char* method : {"smoothgrad", "vargrad"}) {
    for (double sigma : {0.01, 0.1, 0.25, 0.5, 1.0}) {
      HyperParams hp;
      hp.set("sigma", sigma).set("n_samples", 32);
      grid.configs.push_back({method, hp});
    }
  }
  for (bool constant : {true, false}) {
    HyperParams hp;
    hp.set("constant", constant);
    grid.configs.push_back({"random", hp});
  }
}

Eigen::VectorXd column_median(const Eigen::MatrixXd& x) {
  Eigen::VectorXd out(x.cols());
  for (Eigen::Index c = 0; c < x.cols(); ++c) {
    std::vector<double> col(x.rows());
    for (Eigen::Index r = 0; r < x.rows(); ++r) col[static_cast<std::size_t>(r)] = x(r, c);
    out[c] = stats::median(std::move(col));
  }
  return out;
}

const Eigen::VectorXd& ig_baseline(const AttributionContext& ctx, const std::string& name) {
  if (name == "min") return ctx.feature_min;
  if (name == "mean") return ctx.feature_mean;
  if (name == "median") return ctx.feature_median;
  if (name == "max") return ctx.feature_max;
  throw std::invalid_argument("unknown IG baseline " + name);
}

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

std::string config_label(const MethodConfig& c) { return c.method + "|" + c.hyperparams.canonical(); }

}  // namespace

std::size_t SweepGrid::count(const std::string& method) const {
  return static_cast<std::size_t>(
      std::count_if(configs.begin(), configs.end(), [&](const MethodConfig& c) { return c.method == method; }));
}

SweepGrid SweepGrid::only(const std::vector<std::string>& methods) const {
  SweepGrid out;
  for (const auto& c : configs)
    if (std::find(methods.begin(), methods.end(), c.method) != methods.end()) out.configs.push_back(c);
  return out;
}

SweepGrid lime_tabular_grid() {
  SweepGrid grid;
  for (double alpha : {0.000055, 0.0001, 0.00055, 0.001, 0.0055, 0.01, 0.055, 0.1, 0.55})
    for (int k = 0; k < 9; ++k)
      for (double sigma_s : {0.1, 0.5, 1.0})
        for (int n : {64, 256, 1024}) {
          HyperParams hp;
          hp.set("alpha", alpha).set("sigma_k", 0.25 + 0.125 * k).set("sigma_s", sigma_s).set("n_samples", n);
          grid.configs.push_back({"lime_tabular", hp});
        }
  return grid;
}

SweepGrid tabular_grid() {
  SweepGrid grid;
  add_propagation(grid, 1024);
  for (auto& c : lime_tabular_grid().configs) grid.configs.push_back(std::move(c));
  add_wrappers(grid);
  return grid;
}

SweepGrid image_grid() {
  SweepGrid grid;
  add_propagation(grid, 128);
  for (double alpha : {0.00055, 0.001, 0.0055, 0.01, 0.055, 0.1, 0.55, 1.0})
    for (double sigma_k : {0.125, 0.25, 0.375, 0.5})
      for (const char* fill : {"segment-mean", "image-mean", "dataset-mean"})
        for (const char* grid_spec : {"4x4", "4x8", "8x4", "8x8"}) {
          HyperParams hp;
          hp.set("alpha", alpha).set("sigma_k", sigma_k).set("n_samples", 1024).set("replacement", fill)
              .set("grid", grid_spec);
          grid.configs.push_back({"lime_image", hp});
        }
  add_wrappers(grid);
  for (double post : {0.0, 2.0, 4.0, 8.0}) {
    HyperParams hp;
    hp.set("post_sigma", post);
    grid.configs.push_back({"sobel", hp});
  }
  return grid;
}

AttributionContext make_context(const Model& model, const Eigen::MatrixXd& train_x, const Eigen::VectorXi& train_y,
                                std::uint64_t seed, std::optional<ImageShape> image_shape) {
  if (train_x.cols() != model.input_dim() || train_x.rows() != train_y.size() || train_x.rows() == 0)
    throw std::invalid_argument("make_context: training split does not match the model");
  AttributionContext ctx;
  ctx.model = &model;
  ctx.train_x = &train_x;
  ctx.train_y = &train_y;
  ctx.feature_min = train_x.colwise().minCoeff().transpose();
  ctx.feature_mean = train_x.colwise().mean().transpose();
  ctx.feature_median = column_median(train_x);
  ctx.feature_max = train_x.colwise().maxCoeff().transpose();
  ctx.image_shape = image_shape;
  ctx.seed = seed;
  ctx.dls_baselines = image_shape ? 128 : 1024;
  return ctx;
}

TargetClass predicted_class(const Model& model, const Eigen::VectorXd& x) {
  return forward_score<double>(model, x, TargetClass::positive, ScoreKind::logit) >= 0.0 ? TargetClass::positive
                                                                                          : TargetClass::negative;
}

RandomStream config_stream(std::uint64_t seed, const MethodConfig& config) {
  return RandomStream(seed).child("attribution").child(config.method).child(config.hyperparams.hash());
}

Attribution compute_attribution(const AttributionContext& ctx, const MethodConfig& config, const Eigen::VectorXd& x,
                                TargetClass target, std::uint64_t sample_index) {
  const Model& model = *ctx.model;
  const HyperParams& hp = config.hyperparams;
  const RandomStream shared = config_stream(ctx.seed, config);
  const RandomStream own = shared.child("sample").child(sample_index);
  const std::string& m = config.method;
  const auto number_or = [&](const char* key, double fallback) { return hp.has(key) ? hp.number(key) : fallback; };

  Attribution out;
  if (m == "gradient") {
    out = gradient_attribution(model, x, target, ctx.explain_score);
  } else if (m == "guided_backprop") {
    out = guided_backprop_attribution(model, x, target, ctx.explain_score);
  } else if (m == "integrated_gradients") {
    out = integrated_gradients(model, x, target, ig_baseline(ctx, hp.text("baseline")),
                               static_cast<int>(number_or("n_steps", ctx.ig_steps)), hp.flag("multiply_by_inputs"),
                               ctx.explain_score);
  } else if (m == "lime_tabular") {
    LimeTabularConfig cfg;
    cfg.alpha = hp.number("alpha");
    cfg.kernel_width = hp.number("sigma_k");
    cfg.perturbation_std = hp.number("sigma_s");
    cfg.n_samples = static_cast<int>(hp.number("n_samples"));
    out = lime_tabular(model, x, target, cfg, own);
  } else if (m == "lime_image") {
    if (!ctx.image_shape) throw std::invalid_argument("lime_image requires an image shape");
    LimeImageConfig cfg;
    cfg.alpha = hp.number("alpha");
    cfg.kernel_width = hp.number("sigma_k");
    cfg.n_samples = static_cast<int>(hp.number("n_samples"));
    cfg.replacement = parse_replacement(hp.text("replacement"));
    const std::string& grid = hp.text("grid");
    const auto sep = grid.find('x');
    cfg.segmentation = {std::stoi(grid.substr(0, sep)), std::stoi(grid.substr(sep + 1))};
    out = lime_image(model, x, *ctx.image_shape, target, cfg, own, &ctx.feature_mean);
  } else if (m == "deepliftshap") {
    if (!ctx.train_x || !ctx.train_y) throw std::invalid_argument("deepliftshap requires the training split");
    const std::string& label = hp.text("expected_label");
    const std::optional<double> expected = label == "random" ? std::nullopt : std::optional<double>(std::stod(label));
    const Eigen::MatrixXd baselines = stratified_baselines(
        *ctx.train_x, *ctx.train_y, expected, static_cast<int>(number_or("n_baselines", ctx.dls_baselines)),
        shared.child("baselines"));
    out = deepliftshap(model, x, target, baselines, hp.flag("multiply_by_inputs"), ctx.explain_score);
  } else if (m == "smoothgrad" || m == "vargrad") {
    const double sigma = hp.number("sigma");
    const int n = static_cast<int>(number_or("n_samples", ctx.smoothgrad_samples));
    out = m == "smoothgrad" ? smoothgrad(model, x, target, sigma, n, own, ctx.explain_score)
                            : vargrad(model, x, target, sigma, n, own, ctx.explain_score);
  } else if (m == "random") {
    out = random_attribution(static_cast<int>(x.size()), hp.flag("constant"), shared, sample_index);
  } else if (m == "sobel") {
    if (!ctx.image_shape) throw std::invalid_argument("sobel requires an image shape");
    out = sobel_edge_attribution(x, *ctx.image_shape, hp.number("post_sigma"));
  } else {
    throw std::invalid_argument("unknown attribution method " + m);
  }
  out.method = m;
  out.hyperparams = hp;
  out.target = target;
  return out;
}

void MetricsConfig::select(const std::string& metric) {
  if (metric == "all") {
    pc = dpc = infidelity = true;
  } else if (metric == "pc" || metric == "dpc" || metric == "infidelity") {
    pc = metric == "pc";
    dpc = metric == "dpc";
    infidelity = metric == "infidelity";
  } else {
    throw std::invalid_argument("unknown metric " + metric);
  }
}

SweepResult run_sweep(const AttributionContext& ctx, const Eigen::MatrixXd& samples, const SweepGrid& grid,
                      const MetricsConfig& metrics, const SweepOptions& options) {
  if (!ctx.model) throw std::invalid_argument("run_sweep: context has no model");
  if (options.shard_count < 1 || options.shard_index < 0 || options.shard_index >= options.shard_count)
    throw std::invalid_argument("run_sweep: invalid shard");
  const Model& model = *ctx.model;
  const int d = model.input_dim();
  if (samples.cols() != d) throw std::invalid_argument("run_sweep: sample dimension mismatch");

  const auto start = Clock::now();
  const int steps = metrics.steps > 0 ? metrics.steps : d;
  const Eigen::VectorXd baseline = metrics.baseline ? *metrics.baseline : Eigen::VectorXd::Zero(d);
  const std::uint64_t model_id_hash = model_hash(model);
  std::optional<AttributionCache> cache;
  if (options.cache_dir) cache.emplace(*options.cache_dir);

  const int limit = options.max_samples > 0 ? std::min<int>(options.max_samples, static_cast<int>(samples.rows()))
                                            : static_cast<int>(samples.rows());
  std::vector<int> selected;
  for (int k = 0; k < limit; ++k)
    if (k % options.shard_count == options.shard_index) selected.push_back(k);

  std::vector<TargetClass> targets;
  for (int k : selected) targets.push_back(predicted_class(model, samples.row(k).transpose()));

  SweepResult result;
  for (std::size_t c = 0; c < grid.configs.size(); ++c) {
    const MethodConfig& config = grid.configs[c];
    for (std::size_t s = 0; s < selected.size(); ++s) {
      const int k = selected[s];
      const Eigen::VectorXd x = samples.row(k).transpose();
      const TargetClass target = targets[s];
      const auto compute = [&] {
        ++result.attribution_computations;
        return compute_attribution(ctx, config, x, target, static_cast<std::uint64_t>(k)).values;
      };
      Eigen::VectorXd a;
      if (cache) {
        const CacheKey key{model_id_hash, config.method, config.hyperparams.hash(), "sample-" + std::to_string(k),
                           ctx.seed};
        a = cache->get_or_compute(key, compute);
      } else {
        a = compute();
      }

      SampleRow row;
      row.config = c;
      row.sample = static_cast<std::uint64_t>(k);
      row.non_finite = !a.allFinite();
      row.degenerate = !row.non_finite && a.cwiseAbs().maxCoeff() < 1e-6;
      if (row.non_finite) {
        row.pc_abpc = row.dpc_abpc = row.infidelity = std::numeric_limits<double>::quiet_NaN();
        result.rows.push_back(row);
        continue;
      }

      Scorer scorer(model, target, metrics.score);
      const double s0 = scorer(x);
      if (metrics.pc || metrics.dpc) {
        const std::uint64_t before = scorer.evaluations();
        if (metrics.pc_ranking == metrics.dpc_ranking || !(metrics.pc && metrics.dpc)) {
          const RankingRule rule = metrics.pc ? metrics.pc_ranking : metrics.dpc_ranking;
          const GuidedResult g = evaluate_guided(scorer, x, a, steps, rule, baseline, s0);
          row.pc_abpc = g.pc_abpc;
          row.dpc_abpc = g.dpc_abpc;
          if (options.curves) write_curve_rows(*options.curves, "c" + std::to_string(c) + "-s" + std::to_string(k), g);
        } else {
          const GuidedResult gp = evaluate_guided(scorer, x, a, steps, metrics.pc_ranking, baseline, s0);
          const GuidedResult gd = evaluate_guided(scorer, x, a, steps, metrics.dpc_ranking, baseline, s0);
          row.pc_abpc = gp.pc_abpc;
          row.dpc_abpc = gd.dpc_abpc;
          if (options.curves) {
            write_curve_rows(*options.curves, "c" + std::to_string(c) + "-s" + std::to_string(k) + "-pc", gp);
            write_curve_rows(*options.curves, "c" + std::to_string(c) + "-s" + std::to_string(k) + "-dpc", gd);
          }
        }
        row.guided_evaluations = scorer.evaluations() - before;
      }
      if (metrics.infidelity) {
        const std::uint64_t before = scorer.evaluations();
        const RandomStream stream = RandomStream(ctx.seed).child("infidelity").child(static_cast<std::uint64_t>(k));
        row.infidelity = infidelity(scorer, x, a, metrics.infidelity_config, stream, s0).value;
        row.infidelity_evaluations = scorer.evaluations() - before;
      }
      result.rows.push_back(row);
    }
  }
  if (cache) result.cache = cache->stats();
  result.records = aggregate_rows(result.rows, grid, metrics, options);
  result.wall_seconds = seconds_since(start);
  return result;
}

std::vector<SampleRow> merge_rows(std::vector<std::vector<SampleRow>> shards) {
  std::vector<SampleRow> out;
  for (auto& shard : shards) out.insert(out.end(), shard.begin(), shard.end());
  std::sort(out.begin(), out.end(),
            [](const SampleRow& a, const SampleRow& b) { return std::tie(a.config, a.sample) < std::tie(b.config, b.sample); });
  return out;
}

std::vector<ResultRecord> aggregate_rows(const std::vector<SampleRow>& rows, const SweepGrid& grid,
                                         const MetricsConfig& metrics, const SweepOptions& options) {
  std::vector<std::vector<const SampleRow*>> by_config(grid.configs.size());
  for (const auto& row : rows) {
    if (row.config >= grid.configs.size()) throw std::invalid_argument("aggregate_rows: config index out of range");
    by_config[row.config].push_back(&row);
  }
  for (auto& group : by_config)
    std::sort(group.begin(), group.end(), [](const SampleRow* a, const SampleRow* b) { return a->sample < b->sample; });

  std::vector<std::pair<std::string, double SampleRow::*>> selected;
  if (metrics.dpc) selected.emplace_back("dpc_abpc", &SampleRow::dpc_abpc);
  if (metrics.infidelity) selected.emplace_back("infidelity", &SampleRow::infidelity);
  if (metrics.pc) selected.emplace_back("pc_abpc", &SampleRow::pc_abpc);

  std::vector<ResultRecord> out;
  for (std::size_t c = 0; c < grid.configs.size(); ++c) {
    const auto& config = grid.configs[c];
    std::uint64_t non_finite = 0, degenerate = 0;
    for (const auto* row : by_config[c]) {
      non_finite += row->non_finite;
      degenerate += row->degenerate;
    }
    for (const auto& [name, member] : selected) {
      std::vector<double> values;
      std::uint64_t evals = 0;
      for (const auto* row : by_config[c]) {
        if (row->non_finite) continue;
        values.push_back(row->*member);
        evals += name == "infidelity" ? row->infidelity_evaluations : row->guided_evaluations;
      }
      const double nan = std::numeric_limits<double>::quiet_NaN();
      const stats::Summary summary = values.empty() ? stats::Summary{nan, nan, nan, nan, nan, 0} : stats::summarize(values);
      const std::pair<const char*, double> aggregates[] = {{"max", summary.max},
                                                           {"mean", summary.mean},
                                                           {"median", summary.median},
                                                           {"min", summary.min},
                                                           {"std", summary.std}};
      for (const auto& [aggregate, value] : aggregates) {
        ResultRecord r;
        r.model_id = options.model_id;
        r.split = options.split;
        r.method = config.method;
        r.hyperparams = config.hyperparams.canonical();
        r.hyperparams_hash = config.hyperparams.hash();
        r.metric = name;
        r.aggregate = aggregate;
        r.value = value;
        r.eval_count = evals;
        r.samples = values.size();
        r.flagged_non_finite = non_finite;
        r.flagged_degenerate = degenerate;
        out.push_back(std::move(r));
      }
    }
  }
  return out;
}

void write_records(std::ostream& out, const std::vector<ResultRecord>& records) {
  for (const auto& r : records) {
    nlohmann::json j;
    j["model"] = r.model_id;
    j["split"] = r.split;
    j["method"] = r.method;
    j["hyperparams"] = r.hyperparams;
    j["hyperparams_hash"] = r.hyperparams_hash;
    j["metric"] = r.metric;
    j["aggregate"] = r.aggregate;
    j["value"] = std::isfinite(r.value) ? nlohmann::json(r.value) : nlohmann::json(nullptr);
    j["eval_count"] = r.eval_count;
    j["samples"] = r.samples;
    j["flagged_non_finite"] = r.flagged_non_finite;
    j["flagged_degenerate"] = r.flagged_degenerate;
    out << j.dump() << '\n';
  }
}

std::vector<ResultRecord> read_records(std::istream& in) {
  std::vector<ResultRecord> out;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto j = nlohmann::json::parse(line);
    ResultRecord r;
    r.model_id = j.at("model").get<std::string>();
    r.split = j.at("split").get<std::string>();
    r.method = j.at("method").get<std::string>();
    r.hyperparams = j.at("hyperparams").get<std::string>();
    r.hyperparams_hash = j.at("hyperparams_hash").get<std::uint64_t>();
    r.metric = j.at("metric").get<std::string>();
    r.aggregate = j.at("aggregate").get<std::string>();
    r.value = j.at("value").is_null() ? std::numeric_limits<double>::quiet_NaN() : j.at("value").get<double>();
    r.eval_count = j.at("eval_count").get<std::uint64_t>();
    r.samples = j.at("samples").get<std::uint64_t>();
    r.flagged_non_finite = j.value("flagged_non_finite", std::uint64_t{0});
    r.flagged_degenerate = j.value("flagged_degenerate", std::uint64_t{0});
    out.push_back(std::move(r));
  }
  return out;
}

void write_sample_rows(std::ostream& out, const std::vector<SampleRow>& rows, const SweepGrid& grid) {
  out << "method\thyperparams\tsample\tpc_abpc\tdpc_abpc\tinfidelity\tguided_evaluations\tinfidelity_evaluations\tflags\n";
  const auto old_precision = out.precision(17);
  for (const auto& row : rows) {
    const auto& config = grid.configs.at(row.config);
    out << config.method << '\t' << config.hyperparams.canonical() << '\t' << row.sample << '\t' << row.pc_abpc
        << '\t' << row.dpc_abpc << '\t' << row.infidelity << '\t' << row.guided_evaluations << '\t'
        << row.infidelity_evaluations << '\t'
        << (row.non_finite ? "non-finite" : row.degenerate ? "degenerate" : "-") << '\n';
  }
  out.precision(old_precision);
}

std::vector<double> config_values(const std::vector<ResultRecord>& records, const SweepGrid& grid,
                                  const std::string& metric, const std::string& aggregate) {
  std::map<std::string, double> lookup;
  for (const auto& r : records)
    if (r.metric == metric && r.aggregate == aggregate) lookup[r.method + "|" + r.hyperparams] = r.value;
  std::vector<double> out;
  for (const auto& c : grid.configs) {
    const auto it = lookup.find(config_label(c));
    out.push_back(it == lookup.end() ? std::numeric_limits<double>::quiet_NaN() : it->second);
  }
  return out;
}

BenchmarkResult cost_benchmark(const Model& model, const Eigen::MatrixXd& samples, const Eigen::MatrixXd& attributions,
                               int steps, const InfidelityConfig& infidelity_config, std::uint64_t seed,
                               ScoreKind score) {
  if (samples.rows() != attributions.cols() || samples.cols() != attributions.rows())
    throw std::invalid_argument("cost_benchmark: one attribution column per sample required");
  BenchmarkResult out;
  const Eigen::VectorXd baseline = Eigen::VectorXd::Zero(samples.cols());
  std::uint64_t guided_total = 0, infidelity_total = 0;
  for (Eigen::Index k = 0; k < samples.rows(); ++k) {
    const Eigen::VectorXd x = samples.row(k).transpose();
    const Eigen::VectorXd a = attributions.col(k);
    Scorer scorer(model, predicted_class(model, x), score);
    const double s0 = scorer(x);

    std::uint64_t before = scorer.evaluations();
    auto start = Clock::now();
    evaluate_guided(scorer, x, a, steps, RankingRule::absolute_desc, baseline, s0);
    out.guided_seconds += seconds_since(start);
    out.guided_counts.push_back(scorer.evaluations() - before);

    before = scorer.evaluations();
    start = Clock::now();
    infidelity(scorer, x, a, infidelity_config, RandomStream(seed).child("infidelity").child(static_cast<std::uint64_t>(k)), s0);
    out.infidelity_seconds += seconds_since(start);
    out.infidelity_counts.push_back(scorer.evaluations() - before);

    guided_total += out.guided_counts.back();
    infidelity_total += out.infidelity_counts.back();
  }
  out.count_ratio = guided_total ? static_cast<double>(infidelity_total) / static_cast<double>(guided_total) : 0.0;
  out.time_ratio = out.guided_seconds > 0.0 ? out.infidelity_seconds / out.guided_seconds : 0.0;
  return out;
}

std::vector<UncertaintyRow> pooled_infidelity_uncertainty(
    const std::vector<std::vector<PerturbationPair>>& per_sample, const std::vector<int>& sizes, int repeats,
    const RandomStream& stream) {
  if (per_sample.empty()) throw std::invalid_argument("pooled_infidelity_uncertainty: no samples");
  if (repeats < 2) throw std::invalid_argument("pooled_infidelity_uncertainty: repeats must be >= 2");
  std::size_t smallest = per_sample.front().size();
  for (const auto& pairs : per_sample) smallest = std::min(smallest, pairs.size());
  std::vector<UncertaintyRow> out;
  for (int size : sizes) {
    if (size < 1 || static_cast<std::size_t>(size) > smallest)
      throw std::invalid_argument("pooled_infidelity_uncertainty: size exceeds cached pairs");
    std::vector<double> values;
    for (int r = 0; r < repeats; ++r) {
      const RandomStream repeat = stream.child(static_cast<std::uint64_t>(size)).child(static_cast<std::uint64_t>(r));
      double total = 0.0;
      for (std::size_t s = 0; s < per_sample.size(); ++s) {
        RandomCursor cursor(repeat.child(static_cast<std::uint64_t>(s)));
        const auto& pairs = per_sample[s];
        double sq = 0.0;
        auto picked = cursor.sample_without_replacement(static_cast<int>(pairs.size()), size);
        std::sort(picked.begin(), picked.end());
        for (int i : picked) {
          const auto& p = pairs[static_cast<std::size_t>(i)];
          sq += (p.predicted - p.actual) * (p.predicted - p.actual);
        }
        total += sq / size;
      }
      values.push_back(total / static_cast<double>(per_sample.size()));
    }
    const auto summary = stats::summarize(values);
    out.push_back({size, summary.mean, summary.std});
  }
  return out;
}

RandomStream pairs_stream(const std::vector<std::vector<PerturbationPair>>& per_sample) {
  std::uint64_t h = fnv1a("uncertainty");
  for (const auto& pairs : per_sample) {
    const std::string_view bytes(reinterpret_cast<const char*>(pairs.data()), pairs.size() * sizeof(PerturbationPair));
    h = fnv1a(bytes, h ^ pairs.size());
  }
  return RandomStream(h);
}

}  // namespace dpc
