#pragma once

#include <string>
#include <vector>

namespace sap {

struct Token {
  int index = 0;  // 1-based
  std::string surface;

  bool operator==(const Token&) const = default;
};

/// Labeled head -> dependent arc. head_index 0 marks the root arc.
struct DepArc {
  int head_index = 0;
  int dep_index = 0;
  std::string label;

  bool is_root() const { return head_index == 0; }

  bool operator==(const DepArc&) const = default;
};

struct ParsedSentence {
  std::string sentence_id;
  std::vector<Token> tokens;
  std::vector<DepArc> arcs;

  std::size_t word_count() const { return tokens.size(); }

  bool operator==(const ParsedSentence&) const = default;
};

/// Throws ParseError (line 0) when any sentence invariant is violated:
/// tokens numbered 1..n with non-empty surfaces, arcs referring to existing
/// tokens, no self loops, lowercase non-empty labels, exactly one root arc.
void validate_sentence(const ParsedSentence& sentence);

}  // namespace sap
