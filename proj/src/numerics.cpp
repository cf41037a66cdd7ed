#include "dpc/numerics.hpp"

#include <cmath>
#include <numbers>
#include <numeric>

namespace dpc {

std::uint64_t fnv1a(std::string_view bytes, std::uint64_t basis) noexcept {
  std::uint64_t h = basis;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

RandomStream::RandomStream(std::uint64_t seed) noexcept
    : seed_(seed), key_(mix64(seed ^ 0x5851f42d4c957f2dULL)) {}

RandomStream RandomStream::child(std::uint64_t label) const {
  RandomStream out = *this;
  out.key_ = mix64(key_ ^ mix64(label + 0x632be59bd9b4e019ULL));
  out.path_.push_back(label);
  return out;
}

RandomStream RandomStream::child(std::string_view label) const {
  return child(fnv1a(label));
}

std::uint64_t RandomStream::bits(std::uint64_t counter) const noexcept {
  return mix64(key_ + mix64(counter));
}

double RandomStream::uniform(std::uint64_t counter) const noexcept {
  return (static_cast<double>(bits(counter) >> 11) + 0.5) * 0x1.0p-53;
}

double RandomStream::normal(std::uint64_t counter) const noexcept {
  const double u1 = uniform(2 * counter);
  const double u2 = uniform(2 * counter + 1);
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

std::uint64_t RandomCursor::below(std::uint64_t bound) {
  if (bound == 0) throw std::invalid_argument("RandomCursor::below: bound must be positive");
  const std::uint64_t threshold = (0 - bound) % bound;
  for (;;) {
    const unsigned __int128 product =
        static_cast<unsigned __int128>(bits()) * static_cast<unsigned __int128>(bound);
    if (static_cast<std::uint64_t>(product) >= threshold)
      return static_cast<std::uint64_t>(product >> 64);
  }
}

std::vector<int> RandomCursor::sample_without_replacement(int population, int count) {
  if (count < 0 || count > population)
    throw std::invalid_argument("sample_without_replacement: count out of range");
  std::vector<int> pool(static_cast<std::size_t>(population));
  std::iota(pool.begin(), pool.end(), 0);
  for (int i = 0; i < count; ++i) {
    const auto j = i + static_cast<int>(below(static_cast<std::uint64_t>(population - i)));
    std::swap(pool[static_cast<std::size_t>(i)], pool[static_cast<std::size_t>(j)]);
  }
  pool.resize(static_cast<std::size_t>(count));
  return pool;
}

Eigen::VectorXd gaussian_vector(const RandomStream& stream, int dim, double sigma) {
  if (dim < 1) throw std::invalid_argument("gaussian_vector: dim must be positive");
  if (!(sigma > 0.0)) throw std::invalid_argument("gaussian_vector: sigma must be positive");
  Eigen::VectorXd out(dim);
  for (int i = 0; i < dim; ++i) out[i] = sigma * stream.normal(static_cast<std::uint64_t>(i));
  return out;
}

}  // namespace dpc
