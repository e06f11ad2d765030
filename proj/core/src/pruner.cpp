#include "sap/pruner.hpp"

#include <algorithm>
#include <cmath>

#include "sap/errors.hpp"

namespace sap {

namespace {

constexpr double kCeilGuard = 1e-9;

void require_nonzero_total(const HeadScoreTable& table) {
  if (table.total_weight == 0) {
    throw Error(ErrorCode::kDegenerateCorpus, "total weighted occurrences S is zero");
  }
}

// Exact test of count >= total * ratio: the fma residual recovers the
// rounding error of the product.
bool selected(std::uint64_t count, std::uint64_t total, double ratio) {
  const double s = static_cast<double>(total);
  const double product = s * ratio;
  const double residual = std::fma(s, ratio, -product);
  return static_cast<double>(count) - product >= residual;
}

}  // namespace

void PruneConfig::validate() const {
  if (ratio.has_value() == target_sparsity.has_value()) {
    throw Error(ErrorCode::kInvalidArgument, "exactly one of ratio and target sparsity must be set");
  }
  if (ratio && !(*ratio > 0.0 && *ratio <= 1.0)) {
    throw Error(ErrorCode::kInvalidArgument, "ratio must be in (0, 1]");
  }
  if (target_sparsity && !(*target_sparsity >= 0.0 && *target_sparsity < 1.0)) {
    throw Error(ErrorCode::kInvalidArgument, "target sparsity must be in [0, 1)");
  }
  if (!(layer_collapse_fraction > 0.0 && layer_collapse_fraction <= 1.0)) {
    throw Error(ErrorCode::kInvalidArgument, "layer collapse fraction must be in (0, 1]");
  }
}

std::vector<HeadId> rank_heads(const HeadScoreTable& table) {
  std::vector<HeadId> heads;
  heads.reserve(table.counts.size());
  for (int l = 0; l < table.layers; ++l)
    for (int h = 0; h < table.heads_per_layer; ++h) heads.push_back({l, h});
  std::stable_sort(heads.begin(), heads.end(), [&](const HeadId& a, const HeadId& b) {
    return table.count(a.layer, a.head) > table.count(b.layer, b.head);
  });
  return heads;
}

PruneResult prune_by_ratio(const HeadScoreTable& table, double ratio) {
  if (!(ratio > 0.0 && ratio <= 1.0)) throw Error(ErrorCode::kInvalidArgument, "ratio must be in (0, 1]");
  require_nonzero_total(table);
  PruneResult result{PruneMask(table.layers, table.heads_per_layer), {}, ratio,
                     static_cast<double>(table.total_weight) * ratio};
  for (const HeadId& id : rank_heads(table)) {
    if (!selected(table.count(id.layer, id.head), table.total_weight, ratio)) break;
    result.mask.prune(id);
    result.order.push_back(id);
  }
  return result;
}

std::size_t heads_for_sparsity(double sparsity, std::size_t total_heads) {
  if (!(sparsity >= 0.0 && sparsity < 1.0)) {
    throw Error(ErrorCode::kInvalidArgument, "target sparsity must be in [0, 1)");
  }
  const double exact = sparsity * static_cast<double>(total_heads);
  const double m = std::ceil(exact - kCeilGuard);
  return static_cast<std::size_t>(std::max(0.0, m));
}

PruneResult prune_to_sparsity(const HeadScoreTable& table, double target_sparsity) {
  require_nonzero_total(table);
  const std::size_t m = heads_for_sparsity(target_sparsity, table.counts.size());
  PruneResult result{PruneMask(table.layers, table.heads_per_layer), {}, 1.0, 0.0};
  const auto ranked = rank_heads(table);
  for (std::size_t i = 0; i < m; ++i) {
    result.mask.prune(ranked[i]);
    result.order.push_back(ranked[i]);
  }
  if (m > 0) {
    // Largest R with S * R <= c_m; nudge down if the division rounded up.
    const std::uint64_t c_m = table.count(ranked[m - 1].layer, ranked[m - 1].head);
    // A zero count is reachable only in the limit R -> 0.
    double r = std::min(1.0, static_cast<double>(c_m) / static_cast<double>(table.total_weight));
    while (c_m > 0 && !selected(c_m, table.total_weight, r)) r = std::nextafter(r, 0.0);
    result.ratio = r;
  }
  result.cutoff = static_cast<double>(table.total_weight) * result.ratio;
  return result;
}

PruneMask collapse_layers(const PruneMask& mask, double fraction) {
  if (!(fraction > 0.0 && fraction <= 1.0)) {
    throw Error(ErrorCode::kInvalidArgument, "layer collapse fraction must be in (0, 1]");
  }
  const auto needed = static_cast<std::size_t>(
      std::max(1.0, std::ceil(fraction * mask.heads_per_layer() - kCeilGuard)));
  PruneMask out = mask;
  for (int l = 0; l < mask.layers(); ++l) {
    if (mask.pruned_in_layer(l) >= needed) out.prune_layer(l);
  }
  return out;
}

PruneResult select_heads(const HeadScoreTable& table, const PruneConfig& config) {
  config.validate();
  PruneResult result = config.ratio ? prune_by_ratio(table, *config.ratio)
                                    : prune_to_sparsity(table, *config.target_sparsity);
  result.mask = collapse_layers(result.mask, config.layer_collapse_fraction);
  return result;
}

}  // namespace sap
