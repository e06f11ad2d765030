#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "sap/attention.hpp"
#include "sap/depstats.hpp"
#include "sap/sentence.hpp"

namespace sap {

/// Which word attends to which when reading an arc off an attention map.
enum class Direction {
  kDepToHead,  // query = dependent, key = head
  kHeadToDep,  // query = head, key = dependent
  kMax,        // larger of the two
};

Direction parse_direction(std::string_view text);
const char* to_string(Direction direction);

/// A parsed sentence together with the attention the model produced for it.
struct CorpusEntry {
  ParsedSentence sentence;
  AttentionRecord attention;
};

struct PairedCorpus {
  std::vector<CorpusEntry> entries;
  /// Sentence ids that had no attention record.
  std::vector<std::string> unpaired_sentences;
};

/// Joins sentences and records by sentence id. Records without a sentence,
/// duplicate ids, or misaligned pairs are errors; sentences without a record
/// are reported in unpaired_sentences.
PairedCorpus pair_corpus(std::vector<ParsedSentence> sentences,
                         std::vector<AttentionRecord> records);

/// Word-level attention from query word to key word (1-based): the mean over
/// the query word's token rows of the summed attention on the key word's tokens.
double word_attention(const AttentionRecord& record, int layer, int head, int query_word,
                      int key_word);

/// Throws kInvalidArgument for the root arc, which has no key word.
double arc_attention(const AttentionRecord& record, int layer, int head, const DepArc& arc,
                     Direction direction = Direction::kMax);

/// Global mean of word-level attention over every record, unmasked head and
/// ordered pair of distinct words. Records are visited in sentence-id order.
double compute_threshold(std::span<const CorpusEntry> corpus);

/// Weighted violation counters per head plus the normalizer they are judged against.
struct HeadScoreTable {
  int layers = 0;
  int heads_per_layer = 0;
  std::vector<std::uint64_t> counts;  // row-major [layer][head]
  std::uint64_t total_weight = 0;     // S
  double threshold = 0.0;             // theta

  std::uint64_t count(int layer, int head) const {
    return counts[static_cast<std::size_t>(layer) * heads_per_layer + head];
  }
  std::uint64_t& count(int layer, int head) {
    return counts[static_cast<std::size_t>(layer) * heads_per_layer + head];
  }

  std::string to_json() const;
  static HeadScoreTable from_json(std::string_view text);

  bool operator==(const HeadScoreTable&) const = default;
};

/// For every non-root arc and head: a top-k arc whose attention is below
/// theta, or a non-top-k arc whose attention is above theta, adds the label's
/// weight to that head's counter. Ties with theta add nothing.
///
/// Partial tables are merged by integer addition, so `threads` only affects speed.
HeadScoreTable score_heads(std::span<const CorpusEntry> corpus, const DepRanking& ranking,
                           double threshold, Direction direction = Direction::kMax,
                           unsigned threads = 1);

/// One JSON object per non-root arc with its attention under every head,
/// for plotting attention patterns outside this tool.
void write_arc_attention_dump(std::span<const CorpusEntry> corpus, const DepRanking& ranking,
                              Direction direction, std::ostream& out);

}  // namespace sap
