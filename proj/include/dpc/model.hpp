#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "dpc/numerics.hpp"

namespace dpc {

enum class ScoreKind { logit, probability };
enum class TargetClass { negative = 0, positive = 1 };
enum class ModelKind { linear, mlp };

constexpr int class_sign(TargetClass target) noexcept {
  return target == TargetClass::positive ? 1 : -1;
}

template <typename Scalar>
Scalar logistic(Scalar z) {
  if (z >= Scalar(0)) return Scalar(1) / (Scalar(1) + std::exp(-z));
  const Scalar e = std::exp(z);
  return e / (Scalar(1) + e);
}

template <typename Scalar>
struct DenseLayer {
  Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> weight;  // out x in
  Eigen::Matrix<Scalar, Eigen::Dynamic, 1> bias;
};

/// Binary classifier: affine layers with ReLU between them and one output
/// logit. A single layer is the linear model.
template <typename Scalar>
class Network {
 public:
  using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

  explicit Network(std::vector<DenseLayer<Scalar>> layers) : layers_(std::move(layers)) {
    if (layers_.empty()) throw std::invalid_argument("Network: no layers");
    for (std::size_t l = 0; l < layers_.size(); ++l) {
      const auto& layer = layers_[l];
      if (layer.bias.size() != layer.weight.rows())
        throw std::invalid_argument("Network: bias does not match layer width");
      if (l > 0 && layer.weight.cols() != layers_[l - 1].weight.rows())
        throw std::invalid_argument("Network: layer dimensions do not chain");
    }
    if (layers_.back().weight.rows() != 1)
      throw std::invalid_argument("Network: output dimension must be 1");
  }

  static Network linear(Vector weights, Scalar bias) {
    DenseLayer<Scalar> layer{weights.transpose(), Vector::Constant(1, bias)};
    return Network({std::move(layer)});
  }

  int input_dim() const noexcept { return static_cast<int>(layers_.front().weight.cols()); }
  std::size_t depth() const noexcept { return layers_.size(); }
  ModelKind kind() const noexcept { return layers_.size() == 1 ? ModelKind::linear : ModelKind::mlp; }
  const std::vector<DenseLayer<Scalar>>& layers() const noexcept { return layers_; }
  std::vector<DenseLayer<Scalar>>& mutable_layers() noexcept { return layers_; }

  std::vector<int> hidden_widths() const {
    std::vector<int> out;
    for (std::size_t l = 0; l + 1 < layers_.size(); ++l)
      out.push_back(static_cast<int>(layers_[l].weight.rows()));
    return out;
  }

  template <typename Other>
  Network<Other> cast() const {
    std::vector<DenseLayer<Other>> out;
    for (const auto& layer : layers_)
      out.push_back({layer.weight.template cast<Other>(), layer.bias.template cast<Other>()});
    return Network<Other>(std::move(out));
  }

 private:
  std::vector<DenseLayer<Scalar>> layers_;
};

using Model = Network<double>;

/// He-initialized network. `hidden` empty gives the linear model.
Model make_network(int input_dim, const std::vector<int>& hidden, const RandomStream& stream);

/// Content hash of shapes and weights; identifies a model in cache keys.
std::uint64_t model_hash(const Model& model);

/// Forward evaluations performed by one worker. Merging is a plain sum.
struct EvalCounter {
  std::uint64_t evaluations = 0;
  void merge(const EvalCounter& other) noexcept { evaluations += other.evaluations; }
};

namespace detail {

template <typename Scalar>
void check_input(const Network<Scalar>& net, Eigen::Index rows) {
  if (rows != net.input_dim()) throw std::invalid_argument("input dimension mismatch");
}

/// Pre-activations of every layer for a batch (columns are samples).
template <typename Scalar>
std::vector<typename Network<Scalar>::Matrix> forward_trace(
    const Network<Scalar>& net, const typename Network<Scalar>::Matrix& inputs) {
  using Matrix = typename Network<Scalar>::Matrix;
  std::vector<Matrix> pre;
  pre.reserve(net.depth());
  Matrix act = inputs;
  for (std::size_t l = 0; l < net.depth(); ++l) {
    const auto& layer = net.layers()[l];
    Matrix z = (layer.weight * act).colwise() + layer.bias;
    if (l + 1 < net.depth()) act = z.cwiseMax(Scalar(0));
    pre.push_back(std::move(z));
  }
  return pre;
}

template <typename Scalar>
Scalar score_from_logit(Scalar logit, TargetClass target, ScoreKind kind) {
  const Scalar signed_logit = Scalar(class_sign(target)) * logit;
  return kind == ScoreKind::logit ? signed_logit : logistic(signed_logit);
}

template <typename Scalar>
Scalar score_derivative(Scalar logit, TargetClass target, ScoreKind kind) {
  const Scalar s = Scalar(class_sign(target));
  if (kind == ScoreKind::logit) return s;
  const Scalar q = logistic(s * logit);
  return s * q * (Scalar(1) - q);
}

enum class ReluRule { plain, guided };

template <typename Scalar>
typename Network<Scalar>::Matrix backward(const Network<Scalar>& net,
                                          const typename Network<Scalar>::Matrix& inputs,
                                          TargetClass target, ScoreKind kind, ReluRule rule) {
  using Matrix = typename Network<Scalar>::Matrix;
  check_input(net, inputs.rows());
  const auto pre = forward_trace(net, inputs);
  Matrix delta(1, inputs.cols());
  for (Eigen::Index j = 0; j < inputs.cols(); ++j)
    delta(0, j) = score_derivative(pre.back()(0, j), target, kind);
  for (std::size_t l = net.depth(); l-- > 0;) {
    Matrix upstream = net.layers()[l].weight.transpose() * delta;
    if (l == 0) return upstream;
    const Matrix& g = pre[l - 1];
    if (rule == ReluRule::plain) {
      delta = (g.array() > Scalar(0)).select(upstream, Scalar(0));
    } else {
      delta = (g.array() > Scalar(0) && upstream.array() > Scalar(0)).select(upstream, Scalar(0));
    }
  }
  return {};
}

}  // namespace detail

/// Raw logits for a batch; columns are samples.
template <typename Scalar>
Eigen::Matrix<Scalar, 1, Eigen::Dynamic> forward_logits(
    const Network<Scalar>& net, const typename Network<Scalar>::Matrix& inputs) {
  detail::check_input(net, inputs.rows());
  return detail::forward_trace(net, inputs).back();
}

/// Class score s^y(x): the (signed) logit or its logistic probability.
/// Counts one evaluation when a counter is supplied.
template <typename Scalar>
Scalar forward_score(const Network<Scalar>& net, const typename Network<Scalar>::Vector& x,
                     TargetClass target, ScoreKind kind, EvalCounter* counter = nullptr) {
  detail::check_input(net, x.size());
  if (counter) ++counter->evaluations;
  const auto logit = forward_logits<Scalar>(net, x)(0);
  return detail::score_from_logit(logit, target, kind);
}

/// Batched class scores; counts one evaluation per column.
template <typename Scalar>
Eigen::Matrix<Scalar, Eigen::Dynamic, 1> forward_scores(
    const Network<Scalar>& net, const typename Network<Scalar>::Matrix& inputs,
    TargetClass target, ScoreKind kind, EvalCounter* counter = nullptr) {
  detail::check_input(net, inputs.rows());
  if (counter) counter->evaluations += static_cast<std::uint64_t>(inputs.cols());
  const auto logits = forward_logits<Scalar>(net, inputs);
  Eigen::Matrix<Scalar, Eigen::Dynamic, 1> out(inputs.cols());
  for (Eigen::Index j = 0; j < inputs.cols(); ++j)
    out[j] = detail::score_from_logit(logits(0, j), target, kind);
  return out;
}

/// Reverse-mode gradient of the class score; ReLU'(0) = 0.
template <typename Scalar>
typename Network<Scalar>::Vector gradient(const Network<Scalar>& net,
                                          const typename Network<Scalar>::Vector& x,
                                          TargetClass target, ScoreKind kind) {
  return detail::backward<Scalar>(net, x, target, kind, detail::ReluRule::plain).col(0);
}

/// Gradients for a batch of inputs (columns).
template <typename Scalar>
typename Network<Scalar>::Matrix gradients(const Network<Scalar>& net,
                                           const typename Network<Scalar>::Matrix& inputs,
                                           TargetClass target, ScoreKind kind) {
  return detail::backward<Scalar>(net, inputs, target, kind, detail::ReluRule::plain);
}

/// Guided backpropagation: ReLU nodes pass R * 1[g > 0] * 1[R > 0].
template <typename Scalar>
typename Network<Scalar>::Vector guided_backprop(const Network<Scalar>& net,
                                                 const typename Network<Scalar>::Vector& x,
                                                 TargetClass target, ScoreKind kind) {
  return detail::backward<Scalar>(net, x, target, kind, detail::ReluRule::guided).col(0);
}

/// DeepLift Rescale multipliers of x against each baseline column.
///
/// Each nonlinearity (the hidden ReLUs and, for probability scores, the
/// output logistic) uses delta-out / delta-in, falling back to the local
/// derivative when |delta-in| < 1e-9. The chain rule over these multipliers
/// gives sum_i (x_i - b_i) m_i = s(x) - s(b) exactly.
template <typename Scalar>
typename Network<Scalar>::Matrix deeplift_multipliers(
    const Network<Scalar>& net, const typename Network<Scalar>::Vector& x,
    const typename Network<Scalar>::Matrix& baselines, TargetClass target, ScoreKind kind) {
  using Matrix = typename Network<Scalar>::Matrix;
  constexpr Scalar kEqual = Scalar(1e-9);
  detail::check_input(net, x.size());
  detail::check_input(net, baselines.rows());
  const Eigen::Index m = baselines.cols();
  const auto pre_x = detail::forward_trace<Scalar>(net, x);
  const auto pre_b = detail::forward_trace<Scalar>(net, baselines);

  Matrix delta(1, m);
  const Scalar zx = pre_x.back()(0, 0);
  for (Eigen::Index j = 0; j < m; ++j) {
    const Scalar zb = pre_b.back()(0, j);
    if (kind == ScoreKind::logit || std::abs(zx - zb) < kEqual) {
      delta(0, j) = detail::score_derivative(zx, target, kind);
    } else {
      delta(0, j) = (detail::score_from_logit(zx, target, kind) -
                     detail::score_from_logit(zb, target, kind)) /
                    (zx - zb);
    }
  }
  for (std::size_t l = net.depth(); l-- > 0;) {
    Matrix upstream = net.layers()[l].weight.transpose() * delta;
    if (l == 0) return upstream;
    const auto& gx = pre_x[l - 1];
    const auto& gb = pre_b[l - 1];
    for (Eigen::Index j = 0; j < m; ++j) {
      for (Eigen::Index i = 0; i < upstream.rows(); ++i) {
        const Scalar dg = gx(i, 0) - gb(i, j);
        Scalar slope;
        if (std::abs(dg) < kEqual) {
          slope = gx(i, 0) > Scalar(0) ? Scalar(1) : Scalar(0);
        } else {
          slope = (std::max(gx(i, 0), Scalar(0)) - std::max(gb(i, j), Scalar(0))) / dg;
        }
        upstream(i, j) *= slope;
      }
    }
    delta = std::move(upstream);
  }
  return {};
}

/// DeepLift against one baseline. With `multiply_by_inputs` the result is
/// (x - b) * m; otherwise the multipliers m themselves.
template <typename Scalar>
typename Network<Scalar>::Vector deeplift_contributions(const Network<Scalar>& net,
                                                        const typename Network<Scalar>::Vector& x,
                                                        const typename Network<Scalar>::Vector& baseline,
                                                        TargetClass target, ScoreKind kind,
                                                        bool multiply_by_inputs) {
  typename Network<Scalar>::Vector m =
      deeplift_multipliers<Scalar>(net, x, baseline, target, kind).col(0);
  if (multiply_by_inputs) return (x - baseline).cwiseProduct(m);
  return m;
}

/// Central differences, 2d forward passes. Test oracle.
template <typename Scalar>
typename Network<Scalar>::Vector finite_difference_gradient(
    const Network<Scalar>& net, const typename Network<Scalar>::Vector& x, TargetClass target,
    ScoreKind kind, Scalar h) {
  if (!(h > Scalar(0))) throw std::invalid_argument("finite_difference_gradient: h must be > 0");
  detail::check_input(net, x.size());
  const Eigen::Index d = x.size();
  typename Network<Scalar>::Matrix probes(d, 2 * d);
  for (Eigen::Index i = 0; i < d; ++i) {
    probes.col(2 * i) = x;
    probes.col(2 * i + 1) = x;
    probes(i, 2 * i) += h;
    probes(i, 2 * i + 1) -= h;
  }
  const auto scores = forward_scores<Scalar>(net, probes, target, kind);
  typename Network<Scalar>::Vector out(d);
  for (Eigen::Index i = 0; i < d; ++i) out[i] = (scores[2 * i] - scores[2 * i + 1]) / (Scalar(2) * h);
  return out;
}

/// A model bound to a class and score kind, counting every evaluation.
/// This is the only scoring path the metrics use.
class Scorer {
 public:
  Scorer(const Model& model, TargetClass target, ScoreKind kind)
      : model_(&model), target_(target), kind_(kind) {}

  double operator()(const Eigen::VectorXd& x) {
    return forward_score<double>(*model_, x, target_, kind_, &counter_);
  }
  Eigen::VectorXd batch(const Eigen::MatrixXd& inputs) {
    return forward_scores<double>(*model_, inputs, target_, kind_, &counter_);
  }

  const Model& model() const noexcept { return *model_; }
  TargetClass target() const noexcept { return target_; }
  ScoreKind kind() const noexcept { return kind_; }
  const EvalCounter& counter() const noexcept { return counter_; }
  std::uint64_t evaluations() const noexcept { return counter_.evaluations; }

 private:
  const Model* model_;
  TargetClass target_;
  ScoreKind kind_;
  EvalCounter counter_;
};

std::string to_string(ScoreKind kind);
ScoreKind parse_score_kind(const std::string& text);

}  // namespace dpc
