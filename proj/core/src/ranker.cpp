#include "sap/ranker.hpp"

#include <algorithm>
#include <map>
#include <numeric>
#include <ostream>
#include <thread>

#include <nlohmann/json.hpp>

#include "sap/errors.hpp"

namespace sap {

Direction parse_direction(std::string_view text) {
  if (text == "dep2head") return Direction::kDepToHead;
  if (text == "head2dep") return Direction::kHeadToDep;
  if (text == "max") return Direction::kMax;
  throw Error(ErrorCode::kInvalidArgument,
              "unknown direction '" + std::string(text) + "' (expected dep2head, head2dep or max)");
}

const char* to_string(Direction direction) {
  switch (direction) {
    case Direction::kDepToHead: return "dep2head";
    case Direction::kHeadToDep: return "head2dep";
    case Direction::kMax: return "max";
  }
  return "max";
}

PairedCorpus pair_corpus(std::vector<ParsedSentence> sentences,
                         std::vector<AttentionRecord> records) {
  std::map<std::string, std::size_t> by_id;
  for (std::size_t i = 0; i < records.size(); ++i) {
    if (!by_id.emplace(records[i].sentence_id(), i).second) {
      throw Error(ErrorCode::kInvalidArgument,
                  "duplicate attention record for sentence '" + records[i].sentence_id() + "'");
    }
  }
  PairedCorpus paired;
  std::vector<bool> used(records.size(), false);
  for (ParsedSentence& s : sentences) {
    const auto it = by_id.find(s.sentence_id);
    if (it == by_id.end()) {
      paired.unpaired_sentences.push_back(s.sentence_id);
      continue;
    }
    if (used[it->second]) {
      throw Error(ErrorCode::kInvalidArgument, "duplicate sentence id '" + s.sentence_id + "'");
    }
    used[it->second] = true;
    check_alignment(records[it->second], s);
    paired.entries.push_back(CorpusEntry{std::move(s), std::move(records[it->second])});
  }
  for (std::size_t i = 0; i < records.size(); ++i) {
    if (!used[i]) {
      throw Error(ErrorCode::kInvalidArgument,
                  "attention record '" + records[i].sentence_id() + "' has no parsed sentence");
    }
  }
  return paired;
}

double word_attention(const AttentionRecord& record, int layer, int head, int query_word,
                      int key_word) {
  const Span& q = record.alignment().span_of(query_word);
  const Span& k = record.alignment().span_of(key_word);
  const auto map = record.map(layer, head);
  const std::size_t n = static_cast<std::size_t>(record.tokens());
  double total = 0.0;
  for (int r = q.begin; r < q.end; ++r) {
    double row = 0.0;
    for (int c = k.begin; c < k.end; ++c) row += map[static_cast<std::size_t>(r) * n + c];
    total += row;
  }
  return total / q.size();
}

double arc_attention(const AttentionRecord& record, int layer, int head, const DepArc& arc,
                     Direction direction) {
  if (arc.is_root()) throw Error(ErrorCode::kInvalidArgument, "root arc has no attention counterpart");
  switch (direction) {
    case Direction::kDepToHead:
      return word_attention(record, layer, head, arc.dep_index, arc.head_index);
    case Direction::kHeadToDep:
      return word_attention(record, layer, head, arc.head_index, arc.dep_index);
    case Direction::kMax:
      break;
  }
  return std::max(word_attention(record, layer, head, arc.dep_index, arc.head_index),
                  word_attention(record, layer, head, arc.head_index, arc.dep_index));
}

namespace {

std::vector<std::size_t> id_order(std::span<const CorpusEntry> corpus) {
  std::vector<std::size_t> order(corpus.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return corpus[a].sentence.sentence_id < corpus[b].sentence.sentence_id;
  });
  return order;
}

void check_shape(std::span<const CorpusEntry> corpus) {
  const AttentionRecord& first = corpus.front().attention;
  for (const CorpusEntry& e : corpus) {
    if (e.attention.layers() != first.layers() || e.attention.heads() != first.heads()) {
      throw Error(ErrorCode::kShapeMismatch,
                  "record '" + e.attention.sentence_id() + "' has shape " +
                      std::to_string(e.attention.layers()) + "x" + std::to_string(e.attention.heads()) +
                      ", expected " + std::to_string(first.layers()) + "x" + std::to_string(first.heads()));
    }
    check_alignment(e.attention, e.sentence);
  }
}

}  // namespace

double compute_threshold(std::span<const CorpusEntry> corpus) {
  if (corpus.empty()) throw Error(ErrorCode::kDegenerateCorpus, "empty corpus");
  double sum = 0.0;
  std::uint64_t count = 0;
  for (const std::size_t i : id_order(corpus)) {
    const AttentionRecord& rec = corpus[i].attention;
    const int words = static_cast<int>(rec.alignment().word_count());
    for (int l = 0; l < rec.layers(); ++l) {
      for (int h = 0; h < rec.heads(); ++h) {
        if (rec.is_masked(l, h)) continue;
        for (int q = 1; q <= words; ++q) {
          for (int k = 1; k <= words; ++k) {
            if (q == k) continue;
            sum += word_attention(rec, l, h, q, k);
            ++count;
          }
        }
      }
    }
  }
  if (count == 0) throw Error(ErrorCode::kDegenerateCorpus, "no word pairs to average attention over");
  return sum / static_cast<double>(count);
}

namespace {

void score_range(std::span<const CorpusEntry> corpus, const DepRanking& ranking, double threshold,
                 Direction direction, std::vector<std::uint64_t>& counts) {
  for (const CorpusEntry& e : corpus) {
    const AttentionRecord& rec = e.attention;
    for (const DepArc& arc : e.sentence.arcs) {
      if (arc.is_root()) continue;
      const bool top = ranking.is_top_k(arc.label);
      const std::uint64_t weight = ranking.scoring_weight(arc.label);
      for (int l = 0; l < rec.layers(); ++l) {
        for (int h = 0; h < rec.heads(); ++h) {
          // Masked heads read as zero attention here; only the threshold skips them.
          const double value = arc_attention(rec, l, h, arc, direction);
          if (top ? value < threshold : value > threshold) {
            counts[static_cast<std::size_t>(l) * rec.heads() + h] += weight;
          }
        }
      }
    }
  }
}

}  // namespace

HeadScoreTable score_heads(std::span<const CorpusEntry> corpus, const DepRanking& ranking,
                           double threshold, Direction direction, unsigned threads) {
  if (corpus.empty()) throw Error(ErrorCode::kDegenerateCorpus, "empty corpus");
  check_shape(corpus);
  HeadScoreTable table;
  table.layers = corpus.front().attention.layers();
  table.heads_per_layer = corpus.front().attention.heads();
  table.threshold = threshold;
  table.counts.assign(static_cast<std::size_t>(table.layers) * table.heads_per_layer, 0);

  std::vector<ParsedSentence> sentences;
  sentences.reserve(corpus.size());
  for (const CorpusEntry& e : corpus) sentences.push_back(e.sentence);
  table.total_weight = total_weighted_occurrences(sentences, ranking);

  const std::size_t workers = std::clamp<std::size_t>(threads, 1, corpus.size());
  if (workers == 1) {
    score_range(corpus, ranking, threshold, direction, table.counts);
    return table;
  }
  std::vector<std::vector<std::uint64_t>> partial(workers, std::vector<std::uint64_t>(table.counts.size(), 0));
  {
    std::vector<std::jthread> pool;
    const std::size_t chunk = (corpus.size() + workers - 1) / workers;
    for (std::size_t w = 0; w < workers; ++w) {
      const std::size_t begin = std::min(corpus.size(), w * chunk);
      const std::size_t end = std::min(corpus.size(), begin + chunk);
      pool.emplace_back([&, w, begin, end] {
        score_range(corpus.subspan(begin, end - begin), ranking, threshold, direction, partial[w]);
      });
    }
  }
  for (const auto& p : partial)
    for (std::size_t i = 0; i < p.size(); ++i) table.counts[i] += p[i];
  return table;
}

std::string HeadScoreTable::to_json() const {
  nlohmann::json j;
  j["layers"] = layers;
  j["heads_per_layer"] = heads_per_layer;
  j["total_weight"] = total_weight;
  j["threshold"] = threshold;
  j["counts"] = counts;
  return j.dump(2) + "\n";
}

HeadScoreTable HeadScoreTable::from_json(std::string_view text) {
  HeadScoreTable t;
  try {
    const auto j = nlohmann::json::parse(text);
    t.layers = j.at("layers").get<int>();
    t.heads_per_layer = j.at("heads_per_layer").get<int>();
    t.total_weight = j.at("total_weight").get<std::uint64_t>();
    t.threshold = j.at("threshold").get<double>();
    t.counts = j.at("counts").get<std::vector<std::uint64_t>>();
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kInvalidArgument, std::string("malformed score table: ") + e.what());
  }
  if (t.layers < 1 || t.heads_per_layer < 1 ||
      t.counts.size() != static_cast<std::size_t>(t.layers) * t.heads_per_layer) {
    throw Error(ErrorCode::kInvalidArgument, "score table counts do not match layers x heads_per_layer");
  }
  for (const std::uint64_t c : t.counts) {
    if (c > t.total_weight) throw Error(ErrorCode::kInvalidArgument, "score table count exceeds total_weight");
  }
  return t;
}

void write_arc_attention_dump(std::span<const CorpusEntry> corpus, const DepRanking& ranking,
                              Direction direction, std::ostream& out) {
  for (const std::size_t i : id_order(corpus)) {
    const CorpusEntry& e = corpus[i];
    const AttentionRecord& rec = e.attention;
    for (const DepArc& arc : e.sentence.arcs) {
      if (arc.is_root()) continue;
      nlohmann::json values = nlohmann::json::array();
      for (int l = 0; l < rec.layers(); ++l) {
        nlohmann::json row = nlohmann::json::array();
        for (int h = 0; h < rec.heads(); ++h) row.push_back(arc_attention(rec, l, h, arc, direction));
        values.push_back(std::move(row));
      }
      nlohmann::json line;
      line["sentence_id"] = e.sentence.sentence_id;
      line["head"] = arc.head_index;
      line["dep"] = arc.dep_index;
      line["label"] = arc.label;
      line["top_k"] = ranking.is_top_k(arc.label);
      line["weight"] = ranking.scoring_weight(arc.label);
      line["values"] = std::move(values);
      out << line.dump() << '\n';
    }
  }
}

}  // namespace sap
