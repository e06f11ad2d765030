#pragma once

#include <cstddef>
#include <optional>
#include <vector>

#include "sap/mask.hpp"
#include "sap/ranker.hpp"

namespace sap {

/// Exactly one of ratio / target_sparsity drives selection.
struct PruneConfig {
  std::optional<double> ratio;            // R in (0, 1]
  std::optional<double> target_sparsity;  // in [0, 1)
  double layer_collapse_fraction = 1.0;   // in (0, 1]

  void validate() const;
};

struct PruneResult {
  PruneMask mask;
  /// Pruned heads in scan order: descending count, ties by (layer, head).
  std::vector<HeadId> order;
  /// R that produced the selection (the effective R for sparsity targeting).
  double ratio = 1.0;
  /// S * R.
  double cutoff = 0.0;
};

/// All heads in scan order: descending count, ties by ascending (layer, head).
std::vector<HeadId> rank_heads(const HeadScoreTable& table);

/// Prunes head (l,h) iff cnt(l,h) >= S * R. Throws kDegenerateCorpus when S
/// is zero and kInvalidArgument when R is outside (0, 1].
PruneResult prune_by_ratio(const HeadScoreTable& table, double ratio);

/// ceil(sparsity * total) with a small guard against representation error
/// (0.1 * 30 must give 3, not 4).
std::size_t heads_for_sparsity(double sparsity, std::size_t total_heads);

/// Prunes the heads_for_sparsity(...) heads with the highest counts and
/// reports the largest R at which prune_by_ratio selects at least that many.
PruneResult prune_to_sparsity(const HeadScoreTable& table, double target_sparsity);

/// Collapses every layer whose pruned-head count reaches ceil(fraction * H).
PruneMask collapse_layers(const PruneMask& mask, double fraction);

/// Ratio or sparsity selection followed by layer collapse.
PruneResult select_heads(const HeadScoreTable& table, const PruneConfig& config);

}  // namespace sap
