#pragma once

// Small hand-built inputs shared by unit tests and the acceptance runner.

#include <string>
#include <vector>

#include "sap/attention.hpp"
#include "sap/depstats.hpp"
#include "sap/ranker.hpp"
#include "sap/sentence.hpp"

namespace sap::testing {

/// Word 1 is the root; word i+2 depends on word 1 with labels[i].
inline ParsedSentence star_sentence(const std::string& id, const std::vector<std::string>& labels) {
  ParsedSentence s;
  s.sentence_id = id;
  s.tokens.push_back(Token{1, "w1"});
  s.arcs.push_back(DepArc{0, 1, "root"});
  for (std::size_t i = 0; i < labels.size(); ++i) {
    const int idx = static_cast<int>(i) + 2;
    s.tokens.push_back(Token{idx, "w" + std::to_string(idx)});
    s.arcs.push_back(DepArc{1, idx, labels[i]});
  }
  return s;
}

/// Ranking over `types` labels "t01", "t02", ... with strictly decreasing
/// counts, so label i has rank i; `named` overrides the label at given ranks.
inline DepRanking ladder_ranking(int types, int k, const std::vector<std::pair<int, std::string>>& named = {}) {
  std::vector<LabelCount> counts;
  for (int r = 1; r <= types; ++r) {
    std::string label = (r < 10 ? "t0" : "t") + std::to_string(r);
    for (const auto& [rank, name] : named)
      if (rank == r) label = name;
    counts.push_back({label, static_cast<std::uint64_t>(1000 - r)});
  }
  return DepRanking(std::move(counts), k);
}

/// 1-layer table with the given counts laid out row-major over `heads` per layer.
inline HeadScoreTable table_of(int layers, int heads, std::uint64_t total, std::vector<std::uint64_t> counts) {
  HeadScoreTable t;
  t.layers = layers;
  t.heads_per_layer = heads;
  t.total_weight = total;
  t.counts = std::move(counts);
  t.counts.resize(static_cast<std::size_t>(layers) * heads, 0);
  return t;
}

/// Worked-example table: 12 x 12, S = 4644, three heads at 4371, 3704, 3529,
/// every other head below S * 0.75 = 3483 (one of them just below, at 3482).
inline HeadScoreTable worked_table() {
  std::vector<std::uint64_t> counts(144);
  for (std::size_t i = 0; i < counts.size(); ++i) counts[i] = (i * 977) % 3400;
  counts[0 * 12 + 1] = 4371;
  counts[3 * 12 + 7] = 3704;
  counts[9 * 12 + 10] = 3529;
  counts[5 * 12 + 5] = 3482;
  return table_of(12, 12, 4644, std::move(counts));
}

/// "More dolphins": word 1 is a dependent of word 2 with `label`. Head 0
/// attends uniformly; head 1 gives the pair 0.002 (dep->head) and 0.001 (head->dep).
inline CorpusEntry dolphins_entry(const std::string& label) {
  ParsedSentence s{"dolphins", {{1, "More"}, {2, "dolphins"}}, {{2, 1, label}, {0, 2, "root"}}};
  AttentionRecord r("dolphins", 1, 2, 2, {0.5f, 0.5f, 0.5f, 0.5f, 0.998f, 0.002f, 0.001f, 0.999f},
                    WordAlignment::identity(2));
  return {std::move(s), std::move(r)};
}

inline const std::vector<HeadId>& worked_heads() {
  static const std::vector<HeadId> kHeads = {{0, 1}, {3, 7}, {9, 10}};
  return kHeads;
}

}  // namespace sap::testing
