#pragma once

#include <cstdint>
#include <stdexcept>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

namespace dpc {

/// Three-valued sign used by every direction-aware metric: +1, -1, or 0 for
/// an exact zero.
template <typename Scalar>
constexpr int sign_of(Scalar value) noexcept {
  return (Scalar(0) < value) - (value < Scalar(0));
}

/// 64-bit finalizer (splitmix64). Bijective, so distinct inputs never collide.
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// FNV-1a over a byte range; stable label and content hashing.
std::uint64_t fnv1a(std::string_view bytes,
                    std::uint64_t basis = 0xcbf29ce484222325ULL) noexcept;

/// Counter-based random stream addressed by (seed, path).
///
/// Values are pure functions of the key and a draw counter, so a worker can
/// reproduce any draw without sharing state with other workers. A stream is
/// an immutable value; `child` derives a sub-stream for a labelled branch of
/// the path (sample id, method id, draw index, ...).
class RandomStream {
 public:
  explicit RandomStream(std::uint64_t seed) noexcept;

  RandomStream child(std::uint64_t label) const;
  RandomStream child(std::string_view label) const;

  std::uint64_t seed() const noexcept { return seed_; }
  std::uint64_t key() const noexcept { return key_; }
  const std::vector<std::uint64_t>& path() const noexcept { return path_; }

  std::uint64_t bits(std::uint64_t counter) const noexcept;
  /// Uniform on the open interval (0, 1).
  double uniform(std::uint64_t counter) const noexcept;
  /// Standard normal; consumes counters 2c and 2c+1.
  double normal(std::uint64_t counter) const noexcept;

 private:
  std::uint64_t seed_;
  std::uint64_t key_;
  std::vector<std::uint64_t> path_;
};

/// Sequential reader over a RandomStream. Cheap to create; not shared.
class RandomCursor {
 public:
  explicit RandomCursor(RandomStream stream, std::uint64_t start = 0)
      : stream_(std::move(stream)), next_(start) {}

  std::uint64_t bits() noexcept { return stream_.bits(next_++); }
  double uniform() noexcept { return stream_.uniform(next_++); }
  double normal() noexcept { return stream_.normal(next_++); }
  /// Uniform integer in [0, bound). Unbiased (rejection on the low word).
  std::uint64_t below(std::uint64_t bound);
  /// `count` distinct indices from [0, population), in draw order.
  std::vector<int> sample_without_replacement(int population, int count);

 private:
  RandomStream stream_;
  std::uint64_t next_;
};

/// i.i.d. N(0, sigma^2) vector of length `dim`, reproducible from the stream.
Eigen::VectorXd gaussian_vector(const RandomStream& stream, int dim, double sigma);

template <typename Scalar>
struct RidgeFit {
  Eigen::Matrix<Scalar, Eigen::Dynamic, 1> weights;
  Scalar intercept{};
};

/// Weighted ridge regression with an unpenalized intercept.
///
/// Minimizes sum_j w_j (y_j - b - x_j^T beta)^2 + alpha ||beta||^2 by
/// weighted centering followed by the normal equations.
/// With alpha = 0 a rank-deficient design throws "ill-posed fit"; a
/// full-rank but numerically singular system gets a 1e-12 diagonal jitter.
template <typename Scalar>
RidgeFit<Scalar> ridge_fit(
    const Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>& designs,
    const Eigen::Matrix<Scalar, Eigen::Dynamic, 1>& targets,
    const Eigen::Matrix<Scalar, Eigen::Dynamic, 1>& sample_weights, Scalar alpha) {
  using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

  const Eigen::Index n = designs.rows();
  const Eigen::Index p = designs.cols();
  if (n < 1 || p < 1) throw std::invalid_argument("ridge_fit: empty design");
  if (targets.size() != n || sample_weights.size() != n)
    throw std::invalid_argument("ridge_fit: dimension mismatch");
  if (!(alpha >= Scalar(0))) throw std::invalid_argument("ridge_fit: alpha must be >= 0");
  if ((sample_weights.array() < Scalar(0)).any())
    throw std::invalid_argument("ridge_fit: negative sample weight");
  const Scalar total = sample_weights.sum();
  if (!(total > Scalar(0))) throw std::invalid_argument("ridge_fit: no positive sample weight");

  // Weighted means are computed from normalized weights so that tiny kernel
  // values (e.g. exp(-300)) keep full relative precision.
  const Vector unit = sample_weights / total;
  const Eigen::Matrix<Scalar, 1, Eigen::Dynamic> x_mean = unit.transpose() * designs;
  const Scalar y_mean = unit.dot(targets);

  const Matrix centered = designs.rowwise() - x_mean;
  const Vector y_centered = targets.array() - y_mean;

  Matrix normal = centered.transpose() * sample_weights.asDiagonal() * centered;
  const Vector rhs = centered.transpose() * sample_weights.asDiagonal() * y_centered;

  if (alpha == Scalar(0)) {
    Eigen::ColPivHouseholderQR<Matrix> qr(normal);
    if (qr.rank() < p) throw std::runtime_error("ill-posed fit");
  }
  normal.diagonal().array() += alpha;

  Eigen::LDLT<Matrix> ldlt(normal);
  Vector beta;
  const bool ill_conditioned =
      ldlt.info() != Eigen::Success || !(ldlt.rcond() > Scalar(1e-15));
  if (ill_conditioned && alpha == Scalar(0)) {
    normal.diagonal().array() += Scalar(1e-12);
    ldlt.compute(normal);
  }
  if (ldlt.info() != Eigen::Success) throw std::runtime_error("ill-posed fit");
  beta = ldlt.solve(rhs);
  if (!beta.allFinite()) throw std::runtime_error("ill-posed fit");

  return {beta, y_mean - x_mean.dot(beta)};
}

}  // namespace dpc
