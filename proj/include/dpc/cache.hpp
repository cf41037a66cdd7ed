#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>

#include <Eigen/Dense>

namespace dpc {

struct CacheKey {
  std::uint64_t model_hash = 0;
  std::string method;
  std::uint64_t hyperparams_hash = 0;
  std::string sample_id;
  std::uint64_t seed = 0;

  std::string canonical() const;
  std::uint64_t hash() const;
  /// 16 lowercase hex digits of `hash()`.
  std::string file_name() const;
};

struct CacheStats {
  std::uint64_t requests = 0;
  std::uint64_t hits = 0;
  std::uint64_t computations = 0;
  std::uint64_t corrupt = 0;
};

/// One file per key holding a length-prefixed vector and a checksum.
/// Writes go to a temporary file that is renamed into place.
class AttributionCache {
 public:
  explicit AttributionCache(std::filesystem::path directory);

  std::optional<Eigen::VectorXd> load(const CacheKey& key);
  void store(const CacheKey& key, const Eigen::VectorXd& values);

  /// Cached value when present and intact, otherwise `compute()` stored
  /// under the key. Corrupt entries are recomputed with a warning.
  Eigen::VectorXd get_or_compute(const CacheKey& key, const std::function<Eigen::VectorXd()>& compute);

  const CacheStats& stats() const noexcept { return stats_; }
  const std::filesystem::path& directory() const noexcept { return directory_; }

 private:
  std::filesystem::path directory_;
  CacheStats stats_;
};

}  // namespace dpc
