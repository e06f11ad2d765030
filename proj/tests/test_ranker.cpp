#include <doctest.h>

#include <algorithm>
#include <sstream>

#include "sap/depstats.hpp"
#include "sap/errors.hpp"
#include "sap/ranker.hpp"
#include "support/brute_force.hpp"
#include "support/fixtures.hpp"
#include "support/generators.hpp"

using namespace sap;

using testing::dolphins_entry;

TEST_CASE("word attention: single-token words read the raw entry") {
  const AttentionRecord r("s", 1, 1, 2, {0.6f, 0.4f, 0.3f, 0.7f}, WordAlignment::identity(2));
  CHECK(word_attention(r, 0, 0, 1, 2) == static_cast<double>(0.4f));
  CHECK(word_attention(r, 0, 0, 2, 1) == static_cast<double>(0.3f));
}

TEST_CASE("word attention: rows {2,3} against column {5} average to 0.2") {
  std::vector<float> v(36, 0.0f);
  for (int q = 0; q < 6; ++q) v[static_cast<std::size_t>(q * 6 + q)] = 1.0f;
  v[2 * 6 + 2] = 0.9f;
  v[2 * 6 + 5] = 0.1f;
  v[3 * 6 + 3] = 0.7f;
  v[3 * 6 + 5] = 0.3f;
  const AttentionRecord r("s", 1, 1, 6, v, WordAlignment{{{0, 2}, {2, 4}, {4, 5}, {5, 6}}});
  CHECK(word_attention(r, 0, 0, 2, 4) == doctest::Approx(0.2).epsilon(1e-7));
  CHECK(word_attention(r, 0, 0, 2, 4) == testing::brute::grid_word_attention(r, 0, 0, 2, 4));
}

TEST_CASE("word attention matches a full grid scan on random records") {
  testing::Gen g(4);
  for (int trial = 0; trial < 200; ++trial) {
    const auto s = testing::random_sentence(g, "r", 4);
    const AttentionRecord r = testing::random_record(g, s, 2, 2, 12);
    for (int q = 1; q <= 4; ++q)
      for (int k = 1; k <= 4; ++k)
        CHECK(word_attention(r, 1, 1, q, k) == doctest::Approx(testing::brute::grid_word_attention(r, 1, 1, q, k)).epsilon(1e-12));
  }
}

TEST_CASE("arc directions") {
  const CorpusEntry e = dolphins_entry("amod");
  const DepArc& arc = e.sentence.arcs[0];
  CHECK(arc_attention(e.attention, 0, 1, arc, Direction::kDepToHead) == static_cast<double>(0.002f));
  CHECK(arc_attention(e.attention, 0, 1, arc, Direction::kHeadToDep) == static_cast<double>(0.001f));
  CHECK(arc_attention(e.attention, 0, 1, arc) == static_cast<double>(0.002f));
  CHECK(arc_attention(e.attention, 0, 0, arc, Direction::kDepToHead) ==
        arc_attention(e.attention, 0, 0, arc, Direction::kHeadToDep));
  CHECK_THROWS_AS(arc_attention(e.attention, 0, 0, e.sentence.arcs[1]), Error);
}

TEST_CASE("property: max direction dominates both") {
  testing::Gen g(8);
  for (int trial = 0; trial < 200; ++trial) {
    const auto s = testing::random_sentence(g, "p", g.uniform_int(2, 6));
    const AttentionRecord r = testing::random_record(g, s, 1, 2, 14);
    for (const auto& a : s.arcs) {
      if (a.is_root()) continue;
      const double m = arc_attention(r, 0, 1, a, Direction::kMax);
      CHECK(m >= arc_attention(r, 0, 1, a, Direction::kDepToHead));
      CHECK(m >= arc_attention(r, 0, 1, a, Direction::kHeadToDep));
    }
  }
}

TEST_CASE("direction names") {
  CHECK(parse_direction("dep2head") == Direction::kDepToHead);
  CHECK(parse_direction("head2dep") == Direction::kHeadToDep);
  CHECK(parse_direction("max") == Direction::kMax);
  CHECK(std::string(to_string(Direction::kHeadToDep)) == "head2dep");
  CHECK_THROWS_AS(parse_direction("both"), Error);
}

TEST_CASE("threshold: two off-diagonal values 0.4 and 0.3") {
  ParsedSentence s{"s", {{1, "a"}, {2, "b"}}, {{0, 1, "root"}, {1, 2, "x"}}};
  AttentionRecord r("s", 1, 1, 2, {0.6f, 0.4f, 0.3f, 0.7f}, WordAlignment::identity(2));
  const std::vector<CorpusEntry> corpus{{s, r}};
  CHECK(compute_threshold(corpus) == doctest::Approx(0.35).epsilon(1e-7));
}

TEST_CASE("threshold: uniform attention over four words") {
  const auto s = testing::star_sentence("u", {"a", "b", "c"});
  const AttentionRecord r("u", 2, 3, 4, std::vector<float>(2 * 3 * 16, 0.25f), WordAlignment::identity(4));
  const std::vector<CorpusEntry> corpus{{s, r}};
  CHECK(compute_threshold(corpus) == 0.25);
}

TEST_CASE("threshold skips masked heads and needs data") {
  const auto s = testing::star_sentence("m", {"a"});
  const AttentionRecord r("m", 1, 2, 2, {0.0f, 0.0f, 0.0f, 0.0f, 0.2f, 0.8f, 0.8f, 0.2f}, WordAlignment::identity(2),
                          {{0, 0}});
  const std::vector<CorpusEntry> corpus{{s, r}};
  CHECK(compute_threshold(corpus) == doctest::Approx(0.8).epsilon(1e-7));
  CHECK_THROWS_AS(compute_threshold(std::vector<CorpusEntry>{}), Error);
}

TEST_CASE("a top-5 amod pair at 0.002 below theta = 0.01 adds 2 to one head") {
  const DepRanking ranking = testing::ladder_ranking(30, 5, {{4, "amod"}, {29, "preconj"}});
  const std::vector<CorpusEntry> corpus{dolphins_entry("amod")};
  const HeadScoreTable t = score_heads(corpus, ranking, 0.01);
  CHECK(t.count(0, 0) == 0);
  CHECK(t.count(0, 1) == 2);
  CHECK(t.total_weight == 2);
  CHECK(t.threshold == 0.01);
}

TEST_CASE("a non-top-k preconj pair above theta adds 24") {
  const DepRanking ranking = testing::ladder_ranking(30, 5, {{4, "amod"}, {29, "preconj"}});
  const std::vector<CorpusEntry> corpus{dolphins_entry("preconj")};
  const HeadScoreTable t = score_heads(corpus, ranking, 0.01);
  CHECK(t.count(0, 0) == 24);
  CHECK(t.count(0, 1) == 0);
  CHECK(t.total_weight == 24);
}

TEST_CASE("ties with theta add nothing") {
  const DepRanking ranking = testing::ladder_ranking(30, 5, {{4, "amod"}, {29, "preconj"}});
  for (const char* label : {"amod", "preconj"}) {
    const std::vector<CorpusEntry> corpus{dolphins_entry(label)};
    CHECK(score_heads(corpus, ranking, static_cast<double>(0.5f)).count(0, 0) == 0);
  }
}

TEST_CASE("no violations leaves every counter at zero") {
  // Top-k arcs well attended, non-top-k arcs ignored.
  const DepRanking ranking({{"top", 10}, {"rare", 1}}, 1);
  ParsedSentence s{"z", {{1, "a"}, {2, "b"}, {3, "c"}}, {{0, 1, "root"}, {1, 2, "top"}, {2, 3, "rare"}}};
  const std::vector<float> map = {0.2f, 0.8f, 0.0f,  //
                                  0.8f, 0.2f, 0.0f,  //
                                  0.5f, 0.0f, 0.5f};
  std::vector<float> v;
  for (int h = 0; h < 3; ++h) v.insert(v.end(), map.begin(), map.end());
  const std::vector<CorpusEntry> corpus{{s, AttentionRecord("z", 1, 3, 3, v, WordAlignment::identity(3))}};
  const HeadScoreTable t = score_heads(corpus, ranking, 0.3);
  CHECK(std::all_of(t.counts.begin(), t.counts.end(), [](std::uint64_t c) { return c == 0; }));
  CHECK(t.total_weight == 2);
}

TEST_CASE("score_heads matches the per-arc brute force on random corpora") {
  testing::Gen g(77);
  for (int trial = 0; trial < 60; ++trial) {
    const auto shape = testing::random_shape(g);
    const auto corpus = testing::random_corpus(g, shape);
    const auto sentences = testing::sentences_of(corpus);
    const auto ranked = testing::brute::ranked_labels(sentences);
    if (ranked.empty()) continue;
    const int k = g.uniform_int(1, static_cast<int>(ranked.size()));
    const Direction dir = g.pick(std::vector<Direction>{Direction::kMax, Direction::kDepToHead, Direction::kHeadToDep});
    const DepRanking ranking = compute_ranking(sentences, k);
    const double theta = compute_threshold(corpus);
    CHECK(theta == doctest::Approx(testing::brute::threshold(corpus)).epsilon(1e-12));
    const HeadScoreTable t = score_heads(corpus, ranking, theta, dir);
    CHECK(t.counts == testing::brute::scores(corpus, ranked, k, theta, dir));
    CHECK(t.total_weight == testing::brute::total_weight(sentences, ranked, k));
    CHECK(score_heads(corpus, ranking, theta, dir, 4) == t);
  }
}

TEST_CASE("records of different shape are rejected") {
  const auto a = testing::star_sentence("a", {"x"});
  const auto b = testing::star_sentence("b", {"x"});
  const std::vector<CorpusEntry> corpus{
      {a, AttentionRecord("a", 1, 1, 2, {0.5f, 0.5f, 0.5f, 0.5f}, WordAlignment::identity(2))},
      {b, AttentionRecord("b", 1, 2, 2, std::vector<float>(8, 0.5f), WordAlignment::identity(2))}};
  const DepRanking ranking({{"x", 2}}, 1);
  try {
    score_heads(corpus, ranking, 0.5);
    FAIL("shape mismatch accepted");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kShapeMismatch);
  }
}

TEST_CASE("pairing sentences with records") {
  const auto a = testing::star_sentence("a", {"x"});
  const auto b = testing::star_sentence("b", {"x"});
  const AttentionRecord ra("a", 1, 1, 2, {0.5f, 0.5f, 0.5f, 0.5f}, WordAlignment::identity(2));
  const PairedCorpus paired = pair_corpus({a, b}, {ra});
  REQUIRE(paired.entries.size() == 1);
  CHECK(paired.entries[0].sentence.sentence_id == "a");
  CHECK(paired.unpaired_sentences == std::vector<std::string>{"b"});

  const AttentionRecord orphan("zz", 1, 1, 2, {0.5f, 0.5f, 0.5f, 0.5f}, WordAlignment::identity(2));
  CHECK_THROWS_AS(pair_corpus({a}, {orphan}), Error);
  CHECK_THROWS_AS(pair_corpus({a}, {ra, ra}), Error);
  const AttentionRecord wrong_words("a", 1, 1, 3, std::vector<float>(9, 1.0f / 3), WordAlignment::identity(3));
  CHECK_THROWS_AS(pair_corpus({a}, {wrong_words}), AttentionFormatError);
}

TEST_CASE("score table JSON round-trip and validation") {
  testing::Gen g(3);
  const HeadScoreTable t = testing::random_table(g, 3, 4);
  CHECK(HeadScoreTable::from_json(t.to_json()) == t);
  HeadScoreTable bad = t;
  bad.counts[0] = bad.total_weight + 1;
  CHECK_THROWS_AS(HeadScoreTable::from_json(bad.to_json()), Error);
  CHECK_THROWS_AS(HeadScoreTable::from_json("{}"), Error);
}

TEST_CASE("arc dump has one line per non-root arc") {
  const DepRanking ranking = testing::ladder_ranking(30, 5, {{4, "amod"}});
  const std::vector<CorpusEntry> corpus{dolphins_entry("amod")};
  std::ostringstream out;
  write_arc_attention_dump(corpus, ranking, Direction::kMax, out);
  const std::string text = out.str();
  CHECK(std::count(text.begin(), text.end(), '\n') == 1);
  CHECK(text.find("\"label\":\"amod\"") != std::string::npos);
  CHECK(text.find("\"weight\":2") != std::string::npos);
}
