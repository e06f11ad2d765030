#include "sap/depstats.hpp"

#include <algorithm>

#include <nlohmann/json.hpp>

#include "sap/errors.hpp"

namespace sap {

DepRanking::DepRanking(std::vector<LabelCount> counts, int k) : k_(k), ordered_(std::move(counts)) {
  std::sort(ordered_.begin(), ordered_.end(), [](const LabelCount& a, const LabelCount& b) {
    return a.count != b.count ? a.count > b.count : a.label < b.label;
  });
  for (std::size_t i = 0; i < ordered_.size(); ++i) {
    if (!rank_.emplace(ordered_[i].label, static_cast<int>(i) + 1).second) {
      throw Error(ErrorCode::kInvalidArgument, "duplicate label '" + ordered_[i].label + "'");
    }
  }
  if (k < 1) throw Error(ErrorCode::kInvalidArgument, "k must be >= 1");
  if (static_cast<std::size_t>(k) > ordered_.size()) {
    throw Error(ErrorCode::kInvalidArgument,
                "k=" + std::to_string(k) + " exceeds the " + std::to_string(ordered_.size()) +
                    " dependency types in the corpus");
  }
}

std::optional<int> DepRanking::rank_of(const std::string& label) const {
  const auto it = rank_.find(label);
  if (it == rank_.end()) return std::nullopt;
  return it->second;
}

std::uint64_t DepRanking::weight_for_rank(int rank, int k) {
  if (rank < 1 || k < 1) throw Error(ErrorCode::kInvalidArgument, "rank and k must be >= 1");
  return rank <= k ? static_cast<std::uint64_t>(k - rank + 1) : static_cast<std::uint64_t>(rank - k);
}

std::uint64_t DepRanking::weight_of(const std::string& label) const {
  const auto rank = rank_of(label);
  if (!rank) throw Error(ErrorCode::kUnknownLabel, "label '" + label + "' is not ranked");
  return weight_for_rank(*rank, k_);
}

std::uint64_t DepRanking::scoring_weight(const std::string& label) const {
  const int rank = rank_of(label).value_or(static_cast<int>(ordered_.size()) + 1);
  return weight_for_rank(rank, k_);
}

bool DepRanking::is_top_k(const std::string& label) const {
  const auto rank = rank_of(label);
  return rank && *rank <= k_;
}

std::string DepRanking::to_json() const {
  nlohmann::json types = nlohmann::json::array();
  for (std::size_t i = 0; i < ordered_.size(); ++i) {
    const int rank = static_cast<int>(i) + 1;
    types.push_back({{"label", ordered_[i].label},
                     {"count", ordered_[i].count},
                     {"rank", rank},
                     {"top_k", rank <= k_},
                     {"weight", weight_for_rank(rank, k_)}});
  }
  nlohmann::json j;
  j["k"] = k_;
  j["type_count"] = ordered_.size();
  j["types"] = std::move(types);
  return j.dump(2) + "\n";
}

std::map<std::string, std::uint64_t> count_labels(std::span<const ParsedSentence> corpus) {
  std::map<std::string, std::uint64_t> counts;
  for (const ParsedSentence& s : corpus)
    for (const DepArc& arc : s.arcs)
      if (!arc.is_root()) ++counts[arc.label];
  return counts;
}

DepRanking compute_ranking(std::span<const ParsedSentence> corpus, int k) {
  if (corpus.empty()) throw Error(ErrorCode::kDegenerateCorpus, "empty corpus");
  const auto counts = count_labels(corpus);
  if (counts.empty()) throw Error(ErrorCode::kDegenerateCorpus, "corpus has no non-root arcs");
  std::vector<LabelCount> list;
  list.reserve(counts.size());
  for (const auto& [label, count] : counts) list.push_back({label, count});
  return DepRanking(std::move(list), k);
}

std::uint64_t total_weighted_occurrences(std::span<const ParsedSentence> corpus,
                                         const DepRanking& ranking) {
  std::uint64_t total = 0;
  for (const auto& [label, count] : count_labels(corpus)) total += count * ranking.scoring_weight(label);
  return total;
}

}  // namespace sap
