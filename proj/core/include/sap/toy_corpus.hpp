#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "sap/attention.hpp"
#include "sap/sentence.hpp"
#include "sap/toymodel.hpp"

namespace sap {

inline constexpr const char* kToyClsToken = "[CLS]";

/// Parsed sentences drawn from a small seeded template grammar that covers
/// 16 dependency labels. Ids are "toy-00001", "toy-00002", ...
std::vector<ParsedSentence> make_toy_treebank(std::size_t count, std::uint64_t seed);

/// Toy subword split: words longer than six characters become
/// {first four characters, "##" + rest}.
std::vector<std::string> toy_word_pieces(const std::string& word);

/// [CLS] followed by every piece of every lexicon word, sorted.
std::vector<std::string> toy_vocabulary();

struct ModelInput {
  std::vector<std::string> tokens;
  WordAlignment alignment;
};

/// [CLS] + word pieces, with each word aligned to its pieces.
ModelInput toy_model_input(const ParsedSentence& sentence);

/// Toy model shape used by `toy gen`.
ToyConfig toy_config(int layers, int heads, std::uint64_t seed);

/// Task whose label is "not" within two tokens of "dead".
ToyTaskSpec toy_task_spec(int size, std::uint64_t seed);

/// Dense forward pass over each sentence.
std::vector<AttentionRecord> toy_attention(const ToyModel& model,
                                           const std::vector<ParsedSentence>& sentences);

}  // namespace sap
