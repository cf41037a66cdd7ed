#include "dpc/cache.hpp"

#include <unistd.h>

#include <cstdio>
#include <cstring>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "dpc/numerics.hpp"

namespace dpc {
namespace {

constexpr char kMagic[8] = {'D', 'P', 'C', 'A', 'T', 'T', 'R', '1'};

std::string hex16(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

}  // namespace

std::string CacheKey::canonical() const {
  std::ostringstream out;
  out << "model=" << hex16(model_hash) << ";method=" << method << ";hp=" << hex16(hyperparams_hash)
      << ";sample=" << sample_id << ";seed=" << seed;
  return out.str();
}

std::uint64_t CacheKey::hash() const { return fnv1a(canonical()); }

std::string CacheKey::file_name() const { return hex16(hash()); }

AttributionCache::AttributionCache(std::filesystem::path directory) : directory_(std::move(directory)) {
  std::filesystem::create_directories(directory_);
}

std::optional<Eigen::VectorXd> AttributionCache::load(const CacheKey& key) {
  const auto path = directory_ / key.file_name();
  std::ifstream in(path, std::ios::binary);
  if (!in) return std::nullopt;
  std::ostringstream buffer;
  buffer << in.rdbuf();
  const std::string bytes = buffer.str();

  // magic | key hash | length | doubles | checksum
  constexpr std::size_t head = sizeof(kMagic) + 16;
  std::uint64_t stored_key = 0, length = 0, checksum = 0;
  bool ok = bytes.size() >= head + 8 && std::memcmp(bytes.data(), kMagic, sizeof(kMagic)) == 0;
  if (ok) {
    std::memcpy(&stored_key, bytes.data() + sizeof(kMagic), 8);
    std::memcpy(&length, bytes.data() + sizeof(kMagic) + 8, 8);
    ok = length < (1u << 28) && bytes.size() == head + 8 * length + 8;
  }
  if (ok) {
    std::memcpy(&checksum, bytes.data() + bytes.size() - 8, 8);
    ok = stored_key == key.hash() && checksum == fnv1a(std::string_view(bytes).substr(0, bytes.size() - 8));
  }
  if (!ok) {
    ++stats_.corrupt;
    std::cerr << "warning: corrupt cache entry " << path.string() << "; recomputing\n";
    return std::nullopt;
  }
  Eigen::VectorXd values(static_cast<Eigen::Index>(length));
  std::memcpy(values.data(), bytes.data() + head, 8 * length);
  return values;
}

void AttributionCache::store(const CacheKey& key, const Eigen::VectorXd& values) {
  std::string bytes(kMagic, sizeof(kMagic));
  const std::uint64_t key_hash = key.hash();
  const auto length = static_cast<std::uint64_t>(values.size());
  bytes.append(reinterpret_cast<const char*>(&key_hash), 8);
  bytes.append(reinterpret_cast<const char*>(&length), 8);
  bytes.append(reinterpret_cast<const char*>(values.data()), 8 * length);
  const std::uint64_t checksum = fnv1a(bytes);
  bytes.append(reinterpret_cast<const char*>(&checksum), 8);

  const auto path = directory_ / key.file_name();
  // Writers of the same key race only on the final rename, which is atomic.
  const auto writer = std::hash<std::thread::id>{}(std::this_thread::get_id()) ^ static_cast<std::size_t>(::getpid());
  const auto tmp = directory_ / (key.file_name() + ".tmp." + std::to_string(writer));
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw std::runtime_error("cannot write cache entry " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

Eigen::VectorXd AttributionCache::get_or_compute(const CacheKey& key,
                                                 const std::function<Eigen::VectorXd()>& compute) {
  ++stats_.requests;
  if (auto cached = load(key)) {
    ++stats_.hits;
    return *cached;
  }
  Eigen::VectorXd values = compute();
  ++stats_.computations;
  store(key, values);
  return values;
}

}  // namespace dpc
