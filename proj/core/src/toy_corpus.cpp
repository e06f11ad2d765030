#include "sap/toy_corpus.hpp"

#include <algorithm>
#include <array>
#include <cstdio>
#include <map>
#include <set>

#include "sap/rng.hpp"

namespace sap {

namespace {

struct TemplateArc {
  int head;  // 0 = root
  int dep;
  const char* label;
};

struct Template {
  std::vector<const char*> slots;
  std::vector<TemplateArc> arcs;
};

const std::vector<Template>& templates() {
  static const std::vector<Template> kTemplates = {
      // the small dolphins saw the boats near the beaches
      {{"DET", "ADJ", "NOUN", "VERB", "DET", "NOUN", "PREP", "DET", "NOUN"},
       {{3, 1, "det"}, {3, 2, "amod"}, {4, 3, "nsubj"}, {0, 4, "root"}, {6, 5, "det"},
        {4, 6, "dobj"}, {6, 7, "prep"}, {9, 8, "det"}, {7, 9, "pobj"}}},
      // they have often studied and counted .
      {{"PRON", "AUX", "ADV", "VERB", "CCONJ", "VERB", "PERIOD"},
       {{4, 1, "nsubj"}, {4, 2, "aux"}, {4, 3, "advmod"}, {0, 4, "root"}, {6, 5, "cc"},
        {4, 6, "conj"}, {4, 7, "punct"}}},
      // we washed on their coastal beaches .
      {{"PRON", "VERB", "PREP", "POSS", "ADJ", "NOUN", "PERIOD"},
       {{2, 1, "nsubj"}, {0, 2, "root"}, {2, 3, "prep"}, {6, 4, "poss"}, {6, 5, "amod"},
        {3, 6, "pobj"}, {2, 7, "punct"}}},
      // when i laughed , they did not track today
      {{"MARK", "PRON", "VERB", "COMMA", "PRON", "AUX", "NEG", "VERB", "ADV"},
       {{3, 1, "mark"}, {3, 2, "nsubj"}, {8, 3, "advcl"}, {8, 4, "punct"}, {8, 5, "nsubj"},
        {8, 6, "aux"}, {8, 7, "neg"}, {0, 8, "root"}, {8, 9, "advmod"}}},
      // marine beaked whales were washed in africa
      {{"ADJ", "ADJ", "NOUN", "AUX", "VERB", "PREP", "NOUN"},
       {{3, 1, "amod"}, {3, 2, "amod"}, {5, 3, "nsubj"}, {5, 4, "aux"}, {0, 5, "root"},
        {5, 6, "prep"}, {6, 7, "pobj"}}},
      // the turtle report tracked quickly
      {{"DET", "NOUN", "NOUN", "VERB", "ADV"},
       {{3, 1, "det"}, {3, 2, "compound"}, {4, 3, "nsubj"}, {0, 4, "root"}, {4, 5, "advmod"}}},
  };
  return kTemplates;
}

const std::map<std::string, std::vector<std::string>>& lexicon() {
  static const std::map<std::string, std::vector<std::string>> kLexicon = {
      {"DET", {"the", "a", "every", "this"}},
      {"ADJ", {"marine", "beaked", "small", "dead", "quick", "coastal"}},
      {"NOUN", {"dolphins", "turtles", "whales", "beaches", "africa", "scientists", "report", "boats"}},
      {"VERB", {"washed", "studied", "saw", "laughed", "counted", "tracked"}},
      {"PREP", {"on", "in", "near", "from"}},
      {"PRON", {"i", "they", "we", "she"}},
      {"AUX", {"have", "will", "did", "were"}},
      {"ADV", {"quickly", "today", "often"}},
      {"CCONJ", {"and", "but"}},
      {"NEG", {"not"}},
      {"MARK", {"when", "because", "while"}},
      {"POSS", {"their", "our", "its"}},
      {"COMMA", {","}},
      {"PERIOD", {"."}},
  };
  return kLexicon;
}

}  // namespace

std::vector<ParsedSentence> make_toy_treebank(std::size_t count, std::uint64_t seed) {
  CounterRng rng(seed, /*stream=*/2);
  std::vector<ParsedSentence> out;
  out.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    const Template& t = templates()[rng.below(templates().size())];
    ParsedSentence s;
    char id[32];
    std::snprintf(id, sizeof id, "toy-%05zu", i + 1);
    s.sentence_id = id;
    for (std::size_t slot = 0; slot < t.slots.size(); ++slot) {
      const auto& words = lexicon().at(t.slots[slot]);
      s.tokens.push_back(Token{static_cast<int>(slot) + 1, words[rng.below(words.size())]});
    }
    for (const TemplateArc& a : t.arcs) s.arcs.push_back(DepArc{a.head, a.dep, a.label});
    out.push_back(std::move(s));
  }
  return out;
}

std::vector<std::string> toy_word_pieces(const std::string& word) {
  if (word.size() <= 6) return {word};
  return {word.substr(0, 4), "##" + word.substr(4)};
}

std::vector<std::string> toy_vocabulary() {
  std::set<std::string> pieces{kToyClsToken};
  for (const auto& [pos, words] : lexicon())
    for (const auto& w : words)
      for (auto& p : toy_word_pieces(w)) pieces.insert(std::move(p));
  return {pieces.begin(), pieces.end()};
}

ModelInput toy_model_input(const ParsedSentence& sentence) {
  ModelInput in;
  in.tokens.push_back(kToyClsToken);
  for (const Token& t : sentence.tokens) {
    const int begin = static_cast<int>(in.tokens.size());
    for (auto& p : toy_word_pieces(t.surface)) in.tokens.push_back(std::move(p));
    in.alignment.spans.push_back(Span{begin, static_cast<int>(in.tokens.size())});
  }
  return in;
}

ToyConfig toy_config(int layers, int heads, std::uint64_t seed) {
  ToyConfig c;
  c.layers = layers;
  c.heads = heads;
  c.d_head = 4;
  c.max_positions = 64;
  c.vocab = toy_vocabulary();
  c.seed = seed;
  return c;
}

ToyTaskSpec toy_task_spec(int size, std::uint64_t seed) {
  ToyTaskSpec spec;
  for (auto& t : toy_vocabulary())
    if (t != kToyClsToken) spec.vocab.push_back(std::move(t));
  spec.trigger = "not";
  spec.target = "dead";
  spec.window = 2;
  spec.size = size;
  spec.min_length = 4;
  spec.max_length = 10;
  spec.seed = seed;
  return spec;
}

std::vector<AttentionRecord> toy_attention(const ToyModel& model,
                                           const std::vector<ParsedSentence>& sentences) {
  const PruneMask dense(model.config().layers, model.config().heads);
  std::vector<AttentionRecord> records;
  records.reserve(sentences.size());
  for (const ParsedSentence& s : sentences) {
    ModelInput in = toy_model_input(s);
    records.push_back(model.forward(in.tokens, dense, s.sentence_id, std::move(in.alignment)).attention);
  }
  return records;
}

}  // namespace sap
