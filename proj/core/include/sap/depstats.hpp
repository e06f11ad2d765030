#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "sap/sentence.hpp"

namespace sap {

struct LabelCount {
  std::string label;
  std::uint64_t count = 0;

  bool operator==(const LabelCount&) const = default;
};

/// Dependency labels ranked by corpus frequency, with the rank-based weights:
/// ranks 1..k weigh k..1 (important types), ranks r > k weigh r - k
/// (penalty growing as types become rarer).
class DepRanking {
 public:
  /// Sorts by descending count, ties by label. Throws kInvalidArgument when
  /// k < 1 or k exceeds the number of distinct labels, or on duplicate labels.
  DepRanking(std::vector<LabelCount> counts, int k);

  int k() const { return k_; }
  std::size_t type_count() const { return ordered_.size(); }
  const std::vector<LabelCount>& ordered() const { return ordered_; }

  /// 1-based rank, or nullopt for labels absent from the ranking corpus.
  std::optional<int> rank_of(const std::string& label) const;

  /// Throws kUnknownLabel for labels that were never ranked.
  std::uint64_t weight_of(const std::string& label) const;

  /// Weight used while scoring: unranked labels count as rank T+1.
  std::uint64_t scoring_weight(const std::string& label) const;
  bool is_top_k(const std::string& label) const;

  static std::uint64_t weight_for_rank(int rank, int k);

  /// [{"count":..,"label":..,"rank":..,"top_k":..,"weight":..}, ...] plus k and type count.
  std::string to_json() const;

 private:
  int k_;
  std::vector<LabelCount> ordered_;
  std::map<std::string, int> rank_;
};

/// Occurrences of each label over non-root arcs.
std::map<std::string, std::uint64_t> count_labels(std::span<const ParsedSentence> corpus);

/// Throws kDegenerateCorpus on an empty corpus, kInvalidArgument when k is
/// out of range for the labels found.
DepRanking compute_ranking(std::span<const ParsedSentence> corpus, int k);

/// Sum of scoring weights over every non-root arc of the corpus.
std::uint64_t total_weighted_occurrences(std::span<const ParsedSentence> corpus,
                                         const DepRanking& ranking);

}  // namespace sap
