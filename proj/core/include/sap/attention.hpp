#pragma once

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "sap/sentence.hpp"
#include "sap/types.hpp"

namespace sap {

/// Half-open model-token range [begin, end).
struct Span {
  int begin = 0;
  int end = 0;

  int size() const { return end - begin; }
  bool operator==(const Span&) const = default;
};

/// spans[i] holds the model tokens of word i+1 of the paired sentence.
struct WordAlignment {
  std::vector<Span> spans;

  std::size_t word_count() const { return spans.size(); }
  /// word is 1-based.
  const Span& span_of(int word) const;

  /// Throws AttentionFormatError(kSpanInvalid) unless spans are non-empty,
  /// ascending, non-overlapping and inside [0, token_count).
  void validate(int token_count) const;

  static WordAlignment identity(int words, int offset = 0);

  bool operator==(const WordAlignment&) const = default;
};

inline constexpr double kRowSumTolerance = 1e-4;

/// L x H x n x n attention tensor for one sentence, stored [layer][head][query][key].
///
/// Heads listed as masked carry all-zero maps; every other query row is a
/// probability distribution (sum within kRowSumTolerance of 1).
class AttentionRecord {
 public:
  AttentionRecord(std::string sentence_id, int layers, int heads, int tokens,
                  std::vector<float> values, WordAlignment alignment,
                  std::vector<HeadId> masked_heads = {});

  const std::string& sentence_id() const { return sentence_id_; }
  int layers() const { return layers_; }
  int heads() const { return heads_; }
  int tokens() const { return tokens_; }
  const WordAlignment& alignment() const { return alignment_; }
  std::span<const float> values() const { return values_; }

  float at(int layer, int head, int query, int key) const {
    return values_[offset(layer, head) + static_cast<std::size_t>(query) * tokens_ + key];
  }
  /// Row-major n x n map of one head.
  std::span<const float> map(int layer, int head) const {
    return std::span<const float>(values_).subspan(
        offset(layer, head), static_cast<std::size_t>(tokens_) * tokens_);
  }

  bool is_masked(int layer, int head) const {
    return masked_[static_cast<std::size_t>(layer) * heads_ + head] != 0;
  }
  std::vector<HeadId> masked_heads() const;

  bool operator==(const AttentionRecord&) const = default;

 private:
  std::size_t offset(int layer, int head) const {
    return (static_cast<std::size_t>(layer) * heads_ + head) * tokens_ * tokens_;
  }
  void validate() const;

  std::string sentence_id_;
  int layers_ = 0;
  int heads_ = 0;
  int tokens_ = 0;
  std::vector<float> values_;
  WordAlignment alignment_;
  std::vector<char> masked_;
};

/// Throws AttentionFormatError(kSpanMismatch) when the record does not pair
/// with the sentence (different id or word count).
void check_alignment(const AttentionRecord& record, const ParsedSentence& sentence);

/// SAPATTN1 binary format:
///   "SAPATTN1" | u32 L | u32 H | u32 n | u32 header_len | header JSON |
///   L*H*n*n f32, all little-endian, [layer][head][query][key] row-major.
/// The header holds "sentence_id", "alignment" ([[begin,end],...]) and,
/// only when non-empty, "masked_heads" ([[layer,head],...]).
AttentionRecord read_attention(std::istream& in);
AttentionRecord read_attention_file(const std::filesystem::path& path);
void write_attention(const AttentionRecord& record, std::ostream& out);
void write_attention_file(const AttentionRecord& record, const std::filesystem::path& path);
std::string write_attention(const AttentionRecord& record);

inline constexpr const char* kAttentionExtension = ".sapattn";

/// Loads one file, or every *.sapattn file of a directory in name order.
std::vector<AttentionRecord> read_attention_path(const std::filesystem::path& path);

}  // namespace sap
