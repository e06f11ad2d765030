#pragma once

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <set>
#include <string>
#include <string_view>

#include "sap/types.hpp"

namespace sap {

/// Set of pruned heads for an L x H model. A layer listed as pruned always
/// has every one of its heads in the head set.
class PruneMask {
 public:
  PruneMask(int layers, int heads_per_layer);

  int layers() const { return layers_; }
  int heads_per_layer() const { return heads_; }
  std::size_t total_heads() const { return static_cast<std::size_t>(layers_) * heads_; }

  const std::set<HeadId>& pruned_heads() const { return pruned_heads_; }
  const std::set<int>& pruned_layers() const { return pruned_layers_; }

  bool contains(HeadId id) const { return pruned_heads_.count(id) != 0; }
  bool empty() const { return pruned_heads_.empty(); }
  std::size_t size() const { return pruned_heads_.size(); }
  std::size_t pruned_in_layer(int layer) const;
  double sparsity() const {
    return static_cast<double>(pruned_heads_.size()) / static_cast<double>(total_heads());
  }

  void prune(HeadId id);
  /// Prunes every head of the layer and records the layer as pruned.
  void prune_layer(int layer);
  /// Drops a head; a collapsed layer containing it is no longer listed as pruned.
  void restore(HeadId id);

  bool operator==(const PruneMask&) const = default;

 private:
  void check(HeadId id) const;

  int layers_;
  int heads_;
  std::set<HeadId> pruned_heads_;
  std::set<int> pruned_layers_;
};

/// Canonical JSON: keys heads_per_layer, layers, pruned_heads ([[l,h],...]
/// sorted), pruned_layers (sorted), two-space indent, trailing newline.
std::string write_mask(const PruneMask& mask);
void write_mask_file(const PruneMask& mask, const std::filesystem::path& path);

/// Throws Error(kMaskFormat) on malformed JSON, out-of-range indices, or a
/// pruned layer whose heads are not all listed.
PruneMask read_mask(std::string_view json_text);
PruneMask read_mask_file(const std::filesystem::path& path);

}  // namespace sap
