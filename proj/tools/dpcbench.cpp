// dpcbench: command-line front end for the attribution fidelity workbench.

#include <algorithm>
#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "dpc/attribution.hpp"
#include "dpc/audit.hpp"
#include "dpc/checkpoint.hpp"
#include "dpc/datasets.hpp"
#include "dpc/perturbation.hpp"
#include "dpc/pipeline.hpp"
#include "dpc/report.hpp"
#include "dpc/sweep.hpp"

namespace fs = std::filesystem;
using namespace dpc;

namespace {

struct Common {
  std::string dataset = "synth-linear";
  std::string model = "linear";
  std::string metric = "all";
  int steps = 0;
  std::string ranking;  // empty keeps the per-metric defaults
  std::string score = "probability";
  std::uint64_t seed = 0;
  std::string cache_dir = ".dpc-cache";
  std::string out = "dpc-out";
  std::string checkpoint;
  int max_samples = 0;
};

void add_common(CLI::App* sub, Common& c) {
  sub->add_option("--dataset", c.dataset, "heloc, heloc-standin, heloc-auto, synth-linear, blobs or a csv path")
      ->capture_default_str();
  sub->add_option("--model", c.model, "Model kind")->check(CLI::IsMember({"linear", "mlp"}))->capture_default_str();
  sub->add_option("--seed", c.seed, "Seed for splits, training and attribution streams")->capture_default_str();
  sub->add_option("--cache-dir", c.cache_dir, "Dataset and attribution cache directory")->capture_default_str();
  sub->add_option("--out", c.out, "Output directory")->capture_default_str();
  sub->add_option("--checkpoint", c.checkpoint, "Use a saved model instead of training one");
  sub->add_option("--max-samples", c.max_samples, "Evaluate at most this many validation rows (0 = all)")
      ->capture_default_str();
  sub->configurable();
}

void add_metric_flags(CLI::App* sub, Common& c) {
  sub->add_option("--metric", c.metric, "Metric selection")
      ->check(CLI::IsMember({"pc", "dpc", "infidelity", "all"}))
      ->capture_default_str();
  sub->add_option("--steps", c.steps, "Perturbation steps T (0 = one per feature)")->capture_default_str();
  sub->add_option("--ranking", c.ranking, "Ranking rule for both PC and DPC")
      ->check(CLI::IsMember({"signed", "absolute"}));
  sub->add_option("--score", c.score, "Score used by the metrics")
      ->check(CLI::IsMember({"logit", "probability"}))
      ->capture_default_str();
}

struct Loaded {
  PreparedData data;
  Model model;
};

Model model_for(const Common& c, const PreparedData& data) {
  if (c.checkpoint.empty()) {
    std::cerr << "training " << c.model << " on " << data.name << "...\n";
    return train_model(data, parse_model_kind(c.model), c.seed).model;
  }
  Checkpoint ckpt = load_checkpoint(c.checkpoint);
  if (ckpt.model.input_dim() != data.splits.train.dim())
    throw std::runtime_error("checkpoint input dimension does not match the dataset");
  return std::move(ckpt.model);
}

Loaded load_or_train(const Common& c) {
  PreparedData data = prepare_data(c.dataset, c.seed, c.cache_dir);
  Model model = model_for(c, data);
  return {std::move(data), std::move(model)};
}

MetricsConfig metrics_from(const Common& c, const PreparedData& data) {
  MetricsConfig m;
  m.select(c.metric);
  m.steps = c.steps > 0 ? c.steps : (data.image_shape ? 20 : 0);
  if (!c.ranking.empty()) m.pc_ranking = m.dpc_ranking = parse_ranking_rule(c.ranking);
  m.score = parse_score_kind(c.score);
  if (data.image_shape) m.infidelity_config = InfidelityConfig::image_default(*data.image_shape);
  return m;
}

std::vector<std::string> split_list(const std::string& text) {
  std::vector<std::string> out;
  std::stringstream ss(text);
  for (std::string item; std::getline(ss, item, ',');)
    if (!item.empty()) out.push_back(item);
  return out;
}

std::ofstream open_out(const fs::path& path) {
  fs::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  return out;
}

std::string model_id(const Common& c, const PreparedData& data) { return data.name + "-" + c.model; }

int cmd_prepare(const Common& c) {
  const PreparedData data = prepare_data(c.dataset, c.seed, c.cache_dir);
  const fs::path out(c.out);
  fs::create_directories(out);
  save_dataset_cache(out / "train.bin", data.splits.train);
  save_dataset_cache(out / "validation.bin", data.splits.validation);
  save_dataset_cache(out / "test.bin", data.splits.test);
  nlohmann::json j;
  j["dataset"] = data.name;
  j["features"] = data.splits.train.dim();
  for (const auto& [name, split] : {std::pair<const char*, const TabularDataset*>{"train", &data.splits.train},
                                    {"validation", &data.splits.validation},
                                    {"test", &data.splits.test}}) {
    j["splits"][name]["rows"] = split->rows();
    j["splits"][name]["positives"] = split->labels.sum();
  }
  open_out(out / "dataset.json") << j.dump(2) << '\n';
  std::cout << data.name << ": " << data.splits.train.rows() + data.splits.validation.rows() + data.splits.test.rows()
            << " rows x " << data.splits.train.dim() << " features\n";
  return 0;
}

int cmd_train(const Common& c) {
  const PreparedData data = prepare_data(c.dataset, c.seed, c.cache_dir);
  const TrainedModel trained = train_model(data, parse_model_kind(c.model), c.seed);
  const fs::path out(c.out);
  fs::create_directories(out);
  const auto meta = training_metadata(data, trained);
  save_checkpoint(out / "model.ckpt", trained.model, meta);
  nlohmann::json j(meta);
  open_out(out / "training.json") << j.dump(2) << '\n';
  std::cout << "validation accuracy " << meta.at("validation_accuracy") << ", AUROC " << meta.at("validation_auroc")
            << '\n';
  return 0;
}

int cmd_sweep(const Common& c, const std::string& grid_name, const std::string& methods, const std::string& shard,
              bool curves) {
  const Loaded loaded = load_or_train(c);
  const auto& data = loaded.data;
  SweepGrid grid = grid_name == "image" || (grid_name == "default" && data.image_shape) ? image_grid()
                   : grid_name == "lime"                                             ? lime_tabular_grid()
                                                                                     : tabular_grid();
  if (!methods.empty()) grid = grid.only(split_list(methods));
  if (grid.configs.empty()) throw std::runtime_error("no configurations selected");

  const AttributionContext ctx =
      make_context(loaded.model, data.splits.train.features, data.splits.train.labels, c.seed, data.image_shape);
  SweepOptions options;
  options.model_id = model_id(c, data);
  options.seed = c.seed;
  options.max_samples = c.max_samples;
  options.cache_dir = fs::path(c.cache_dir) / "attributions";
  if (!shard.empty()) {
    const auto slash = shard.find('/');
    if (slash == std::string::npos) throw std::runtime_error("--shard expects i/n");
    options.shard_index = std::stoi(shard.substr(0, slash));
    options.shard_count = std::stoi(shard.substr(slash + 1));
  }
  const fs::path out(c.out);
  fs::create_directories(out);
  std::ofstream curve_file;
  if (curves) {
    curve_file = open_out(out / "curves.tsv");
    write_curve_header(curve_file);
    options.curves = &curve_file;
  }

  const MetricsConfig metrics = metrics_from(c, data);
  const SweepResult result = run_sweep(ctx, data.splits.validation.features, grid, metrics, options);
  {
    auto f = open_out(out / "records.jsonl");
    write_records(f, result.records);
  }
  {
    auto f = open_out(out / "samples.tsv");
    write_sample_rows(f, result.rows, grid);
  }
  {
    auto f = open_out(out / "timings.tsv");
    f << "configs\trows\twall_seconds\tattribution_requests\tcache_hits\tcomputations\n"
      << grid.configs.size() << '\t' << result.rows.size() << '\t' << result.wall_seconds << '\t'
      << result.cache.requests << '\t' << result.cache.hits << '\t' << result.attribution_computations << '\n';
  }
  std::cout << grid.configs.size() << " configs, " << result.rows.size() << " sample rows, "
            << result.cache.hits << "/" << result.cache.requests << " cache hits\n";
  return 0;
}

int cmd_audit(const Common& c) {
  const Loaded loaded = load_or_train(c);
  const auto& model = loaded.model;
  const auto& val = loaded.data.splits.validation.features;
  const int d = model.input_dim();
  if (d > 12) throw std::runtime_error("audit enumerates 2^d subsets; the dataset has too many features");
  const Eigen::VectorXd zero = Eigen::VectorXd::Zero(d);
  const double tol = model.kind() == ModelKind::linear ? 1e-6 : 1e-3;
  const int n = c.max_samples > 0 ? std::min<int>(c.max_samples, static_cast<int>(val.rows()))
                                  : std::min<int>(20, static_cast<int>(val.rows()));
  auto f = open_out(fs::path(c.out) / "audit.tsv");
  f << "model\tmethod\tsample\tchecked_subsets\tmax_residual\ttolerance\tverdict\tpc_optimal\n";
  const AttributionContext ctx =
      make_context(model, loaded.data.splits.train.features, loaded.data.splits.train.labels, c.seed);
  int passed = 0, total = 0;
  for (int k = 0; k < n; ++k) {
    const Eigen::VectorXd x = val.row(k).transpose();
    const TargetClass target = predicted_class(model, x);
    const std::string id = "sample-" + std::to_string(k);
    const Attribution attrs[] = {
        integrated_gradients(model, x, target, zero, 64, true),
        gradient_attribution(model, x, target),
        deepliftshap(model, x, target, zero, true),
    };
    for (const auto& a : attrs) {
      const AuditReport report = sensitivity_n_audit(model, x, a.values, zero, target, tol, 12);
      const bool optimal = d <= 8 && pc_optimality_audit(model, x, a.values, zero, target, 1e-9).passed;
      f << audit_row(model_id(c, loaded.data), a.method, id, report) << '\t'
        << (d <= 8 ? (optimal ? "pass" : "fail") : "skipped") << '\n';
      passed += report.passed;
      ++total;
    }
  }
  std::cout << passed << "/" << total << " Sensitivity-N audits passed\n";
  return 0;
}

std::vector<MethodConfig> uncertainty_configs() {
  std::vector<MethodConfig> out;
  out.push_back({"gradient", {}});
  out.push_back({"guided_backprop", {}});
  for (bool multiply : {true, false}) {
    HyperParams hp;
    hp.set("baseline", "mean").set("multiply_by_inputs", multiply).set("n_steps", 64);
    out.push_back({"integrated_gradients", hp});
  }
  for (double sigma : {0.1, 0.5}) {
    HyperParams hp;
    hp.set("sigma", sigma).set("n_samples", 32);
    out.push_back({"smoothgrad", hp});
  }
  {
    HyperParams hp;
    hp.set("sigma", 0.5).set("n_samples", 32);
    out.push_back({"vargrad", hp});
  }
  for (bool multiply : {true, false}) {
    HyperParams hp;
    hp.set("expected_label", "random").set("multiply_by_inputs", multiply).set("n_baselines", 256);
    out.push_back({"deepliftshap", hp});
  }
  {
    HyperParams hp;
    hp.set("alpha", 0.01).set("sigma_k", 0.75).set("sigma_s", 0.5).set("n_samples", 256);
    out.push_back({"lime_tabular", hp});
  }
  return out;
}

int cmd_uncertainty(const Common& c, int repeats) {
  const Loaded loaded = load_or_train(c);
  const auto& model = loaded.model;
  const auto& val = loaded.data.splits.validation.features;
  const AttributionContext ctx =
      make_context(model, loaded.data.splits.train.features, loaded.data.splits.train.labels, c.seed);
  const int n = c.max_samples > 0 ? std::min<int>(c.max_samples, static_cast<int>(val.rows()))
                                  : std::min<int>(32, static_cast<int>(val.rows()));
  InfidelityConfig cfg;
  cfg.n_perturbations = 640;
  const std::vector<int> sizes = {20, 40, 80, 160, 320, 640};
  auto f = open_out(fs::path(c.out) / "uncertainty.tsv");
  f << "method\thyperparams\tsize\tmean\tstd\n";
  f.precision(10);
  for (const auto& config : uncertainty_configs()) {
    std::vector<std::vector<PerturbationPair>> pairs;
    for (int k = 0; k < n; ++k) {
      const Eigen::VectorXd x = val.row(k).transpose();
      const TargetClass target = predicted_class(model, x);
      const Attribution a = compute_attribution(ctx, config, x, target, static_cast<std::uint64_t>(k));
      Scorer scorer(model, target, parse_score_kind(c.score));
      pairs.push_back(
          infidelity(scorer, x, a.values, cfg, RandomStream(c.seed).child("infidelity").child(static_cast<std::uint64_t>(k)))
              .pairs);
    }
    const auto rows =
        pooled_infidelity_uncertainty(pairs, sizes, repeats, pairs_stream(pairs));
    for (const auto& r : rows)
      f << config.method << '\t' << config.hyperparams.canonical() << '\t' << r.size << '\t' << r.mean << '\t'
        << r.std << '\n';
  }
  std::cout << "wrote " << (fs::path(c.out) / "uncertainty.tsv").string() << '\n';
  return 0;
}

int cmd_bench(const Common& c, int perturbations) {
  const Loaded loaded = load_or_train(c);
  const auto& model = loaded.model;
  const auto& val = loaded.data.splits.validation.features;
  const int n = c.max_samples > 0 ? std::min<int>(c.max_samples, static_cast<int>(val.rows()))
                                  : std::min<int>(64, static_cast<int>(val.rows()));
  const Eigen::MatrixXd samples = val.topRows(n);
  Eigen::MatrixXd attributions(samples.cols(), n);
  for (int k = 0; k < n; ++k) {
    const Eigen::VectorXd x = samples.row(k).transpose();
    attributions.col(k) = gradient_attribution(model, x, predicted_class(model, x)).values;
  }
  const int steps = c.steps > 0 ? c.steps : std::min<int>(20, static_cast<int>(samples.cols()));
  InfidelityConfig cfg;
  cfg.n_perturbations = perturbations;
  if (loaded.data.image_shape) {
    cfg = InfidelityConfig::image_default(*loaded.data.image_shape);
    cfg.n_perturbations = perturbations;
  }
  const BenchmarkResult r = cost_benchmark(model, samples, attributions, steps, cfg, c.seed, parse_score_kind(c.score));
  auto f = open_out(fs::path(c.out) / "bench.tsv");
  f << "samples\tsteps\tguided_evaluations_per_sample\tinfidelity_evaluations_per_sample\tcount_ratio\t"
       "guided_seconds\tinfidelity_seconds\ttime_ratio\n"
    << n << '\t' << steps << '\t' << r.guided_counts.front() << '\t' << r.infidelity_counts.front() << '\t'
    << r.count_ratio << '\t' << r.guided_seconds << '\t' << r.infidelity_seconds << '\t' << r.time_ratio << '\n';
  std::cout << "evaluations per sample: guided " << r.guided_counts.front() << ", infidelity "
            << r.infidelity_counts.front() << " (ratio " << r.count_ratio << "); wall-clock ratio " << r.time_ratio
            << '\n';
  return 0;
}

int cmd_report(const std::vector<std::string>& inputs, const std::string& out) {
  std::vector<ResultRecord> records;
  for (const auto& path : inputs) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot read " + path);
    auto part = read_records(in);
    records.insert(records.end(), part.begin(), part.end());
  }
  const ReportSummary summary = emit_report(records, out);
  std::cout << "wrote " << summary.files.size() << " report files to " << out << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Attribution fidelity workbench: DPC, PC and Infidelity"};
  app.set_config("--config", "", "Key-value configuration file mirroring the flags");
  app.require_subcommand(1);

  Common common;
  auto* prepare = app.add_subcommand("prepare-data", "Clean, split and cache a dataset");
  add_common(prepare, common);
  auto* train = app.add_subcommand("train", "Train a model and write a checkpoint");
  add_common(train, common);

  auto* sweep = app.add_subcommand("sweep", "Run the attribution sweep and emit result records");
  add_common(sweep, common);
  add_metric_flags(sweep, common);
  std::string grid = "default", methods, shard;
  bool curves = false;
  sweep->add_option("--grid", grid, "default, tabular, lime or image")
      ->check(CLI::IsMember({"default", "tabular", "lime", "image"}))
      ->capture_default_str();
  sweep->add_option("--methods", methods, "Comma-separated method filter");
  sweep->add_option("--shard", shard, "Evaluate shard i of n, as i/n");
  sweep->add_flag("--curves", curves, "Write per-step curves");

  auto* audit = app.add_subcommand("audit", "Sensitivity-N and PC-optimality audits");
  add_common(audit, common);

  auto* uncertainty = app.add_subcommand("uncertainty", "Resampled Infidelity spread");
  add_common(uncertainty, common);
  add_metric_flags(uncertainty, common);
  int repeats = 64;
  uncertainty->add_option("--repeats", repeats, "Resampling repeats per size")->capture_default_str();

  auto* bench = app.add_subcommand("bench", "Model-evaluation counts and wall-clock of DPC vs Infidelity");
  add_common(bench, common);
  add_metric_flags(bench, common);
  int perturbations = 640;
  bench->add_option("--perturbations", perturbations, "Infidelity perturbations")->capture_default_str();

  auto* report = app.add_subcommand("report", "Tables and plots from result records");
  std::vector<std::string> inputs;
  std::string report_out = "dpc-report";
  report->add_option("--in", inputs, "records.jsonl files")->required();
  report->add_option("--out", report_out, "Output directory")->capture_default_str();
  report->configurable();

  CLI11_PARSE(app, argc, argv);
  try {
    if (*prepare) return cmd_prepare(common);
    if (*train) return cmd_train(common);
    if (*sweep) return cmd_sweep(common, grid, methods, shard, curves);
    if (*audit) return cmd_audit(common);
    if (*uncertainty) return cmd_uncertainty(common, repeats);
    if (*bench) return cmd_bench(common, perturbations);
    if (*report) return cmd_report(inputs, report_out);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
