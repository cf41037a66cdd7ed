#pragma once

#include <filesystem>
#include <map>
#include <string>

#include "dpc/model.hpp"

namespace dpc {

/// Text checkpoint, version 1:
///
///     dpc-checkpoint 1
///     layers <L>
///     meta <key> <value>          (zero or more, sorted by key)
///     meta-hash <16 hex digits>   (FNV-1a of the sorted "key=value\n" lines)
///     layer <out> <in>
///     <out rows of `in` weights, row-major, %.17g>
///     <one row of `out` biases>
///     ... repeated L times ...
///     end
///
/// %.17g round-trips every double, so save/load is bit-exact.
struct Checkpoint {
  Model model;
  std::map<std::string, std::string> metadata;
};

void save_checkpoint(const std::filesystem::path& path, const Model& model,
                     const std::map<std::string, std::string>& metadata = {});
Checkpoint load_checkpoint(const std::filesystem::path& path);

std::uint64_t metadata_hash(const std::map<std::string, std::string>& metadata);

}  // namespace dpc
