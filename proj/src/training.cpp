#include "dpc/training.hpp"

#include <cmath>
#include <stdexcept>

#include "dpc/stats.hpp"

namespace dpc {
namespace {

struct MomentState {
  std::vector<Eigen::MatrixXd> m_w, v_w, vmax_w;
  std::vector<Eigen::VectorXd> m_b, v_b, vmax_b;

  explicit MomentState(const Model& model) {
    for (const auto& layer : model.layers()) {
      const auto zw = Eigen::MatrixXd::Zero(layer.weight.rows(), layer.weight.cols());
      const auto zb = Eigen::VectorXd::Zero(layer.bias.size());
      m_w.push_back(zw), v_w.push_back(zw), vmax_w.push_back(zw);
      m_b.push_back(zb), v_b.push_back(zb), vmax_b.push_back(zb);
    }
  }
};

template <typename Param, typename Grad>
void adamw_step(Param& param, const Grad& grad, Param& m, Param& v, Param& vmax,
                const TrainConfig& cfg, int step, bool decay) {
  const double bias1 = 1.0 - std::pow(cfg.beta1, step);
  const double bias2 = 1.0 - std::pow(cfg.beta2, step);
  if (decay) param *= (1.0 - cfg.learning_rate * cfg.weight_decay);
  m = cfg.beta1 * m + (1.0 - cfg.beta1) * grad;
  v = cfg.beta2 * v + (1.0 - cfg.beta2) * grad.cwiseProduct(grad);
  vmax = vmax.cwiseMax(v);
  const auto denom = (vmax.array() / bias2).sqrt() + cfg.epsilon;
  param.array() -= (cfg.learning_rate / bias1) * m.array() / denom;
}

double logistic_loss(const Eigen::RowVectorXd& logits, const Eigen::RowVectorXd& labels) {
  double total = 0.0;
  for (Eigen::Index j = 0; j < logits.size(); ++j) {
    const double z = logits[j];
    total += std::max(z, 0.0) - z * labels[j] + std::log1p(std::exp(-std::abs(z)));
  }
  return total / static_cast<double>(logits.size());
}

void check_split(const Eigen::MatrixXd& x, const Eigen::VectorXi& y, const char* name) {
  if (x.rows() != y.size()) throw std::invalid_argument(std::string(name) + ": label count mismatch");
  if (x.rows() == 0) throw std::invalid_argument(std::string(name) + ": empty split");
  if ((y.array() < 0).any() || (y.array() > 1).any())
    throw std::invalid_argument(std::string(name) + ": labels must be 0/1");
}

}  // namespace

double accuracy(const Model& model, const Eigen::MatrixXd& x, const Eigen::VectorXi& y) {
  const Eigen::RowVectorXd logits = forward_logits<double>(model, x.transpose());
  int correct = 0;
  for (Eigen::Index i = 0; i < y.size(); ++i) correct += ((logits[i] > 0.0) == (y[i] == 1));
  return static_cast<double>(correct) / static_cast<double>(y.size());
}

double auroc(const Model& model, const Eigen::MatrixXd& x, const Eigen::VectorXi& y) {
  const Eigen::RowVectorXd logits = forward_logits<double>(model, x.transpose());
  std::vector<double> scores(logits.data(), logits.data() + logits.size());
  std::vector<int> labels(y.data(), y.data() + y.size());
  return stats::auroc(scores, labels);
}

TrainedModel train_classifier(const Eigen::MatrixXd& train_x, const Eigen::VectorXi& train_y,
                              const Eigen::MatrixXd& val_x, const Eigen::VectorXi& val_y,
                              const ArchSpec& arch, const TrainConfig& cfg) {
  check_split(train_x, train_y, "train");
  check_split(val_x, val_y, "validation");
  if (train_x.cols() != val_x.cols()) throw std::invalid_argument("splits differ in feature dimension");
  if (!(cfg.learning_rate > 0.0) || cfg.epochs < 1 || cfg.batch_size < 1 || cfg.patience < 1)
    throw std::invalid_argument("invalid training configuration");

  const int n = static_cast<int>(train_x.rows());
  const int d = static_cast<int>(train_x.cols());
  const RandomStream root(cfg.seed);
  const std::vector<int> hidden = arch.kind == ModelKind::linear ? std::vector<int>{} : arch.hidden;
  Model model = make_network(d, hidden, root.child("init"));
  MomentState state(model);

  const Eigen::MatrixXd inputs = train_x.transpose();
  const Eigen::RowVectorXd targets = train_y.cast<double>().transpose();

  Model best = model;
  double best_auroc = -1.0;
  int best_epoch = 0;
  int stale = 0;
  int step = 0;
  int epoch = 0;

  for (epoch = 1; epoch <= cfg.epochs; ++epoch) {
    RandomCursor shuffle(root.child("epoch").child(static_cast<std::uint64_t>(epoch)));
    const std::vector<int> order = shuffle.sample_without_replacement(n, n);
    for (int start = 0; start < n; start += cfg.batch_size) {
      const int count = std::min(cfg.batch_size, n - start);
      Eigen::MatrixXd batch(d, count);
      Eigen::RowVectorXd labels(count);
      for (int j = 0; j < count; ++j) {
        batch.col(j) = inputs.col(order[static_cast<std::size_t>(start + j)]);
        labels[j] = targets[order[static_cast<std::size_t>(start + j)]];
      }
      if (cfg.augmentation_sigma > 0.0) {
        const RandomStream noise = root.child("noise").child(static_cast<std::uint64_t>(step));
        for (int j = 0; j < count; ++j)
          for (int i = 0; i < d; ++i)
            batch(i, j) += cfg.augmentation_sigma * noise.normal(static_cast<std::uint64_t>(j * d + i));
      }

      const auto pre = detail::forward_trace<double>(model, batch);
      const double loss = logistic_loss(pre.back(), labels);
      if (!std::isfinite(loss)) throw std::runtime_error("diverged");

      Eigen::MatrixXd delta(1, count);
      for (int j = 0; j < count; ++j) delta(0, j) = (logistic(pre.back()(0, j)) - labels[j]) / count;

      ++step;
      auto& layers = model.mutable_layers();
      for (std::size_t l = layers.size(); l-- > 0;) {
        const Eigen::MatrixXd act = l == 0 ? batch : Eigen::MatrixXd(pre[l - 1].cwiseMax(0.0));
        const Eigen::MatrixXd grad_w = delta * act.transpose();
        const Eigen::VectorXd grad_b = delta.rowwise().sum();
        if (l > 0) {
          Eigen::MatrixXd upstream = layers[l].weight.transpose() * delta;
          delta = (pre[l - 1].array() > 0.0).select(upstream, 0.0);
        }
        adamw_step(layers[l].weight, grad_w, state.m_w[l], state.v_w[l], state.vmax_w[l], cfg, step, true);
        adamw_step(layers[l].bias, grad_b, state.m_b[l], state.v_b[l], state.vmax_b[l], cfg, step, false);
      }
    }

    const double val_auroc = auroc(model, val_x, val_y);
    if (!std::isfinite(val_auroc)) throw std::runtime_error("diverged");
    if (val_auroc > best_auroc) {
      best_auroc = val_auroc;
      best = model;
      best_epoch = epoch;
      stale = 0;
    } else if (++stale >= cfg.patience) {
      break;
    }
  }

  TrainingSummary summary;
  summary.train_accuracy = accuracy(best, train_x, train_y);
  summary.validation_accuracy = accuracy(best, val_x, val_y);
  summary.train_auroc = auroc(best, train_x, train_y);
  summary.validation_auroc = auroc(best, val_x, val_y);
  summary.epochs_run = std::min(epoch, cfg.epochs);
  summary.best_epoch = best_epoch;
  return {std::move(best), summary, cfg};
}

}  // namespace dpc
