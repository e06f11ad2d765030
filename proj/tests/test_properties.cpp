#include <doctest.h>

#include <algorithm>
#include <sstream>

#include "sap/attention.hpp"
#include "sap/conllu.hpp"
#include "sap/depstats.hpp"
#include "sap/mask.hpp"
#include "sap/pruner.hpp"
#include "sap/ranker.hpp"
#include "support/generators.hpp"

using namespace sap;

namespace {
constexpr int kCases = 1000;
}

TEST_CASE("pruned sets shrink as R grows") {
  testing::Gen g(1001);
  for (int i = 0; i < kCases; ++i) {
    const HeadScoreTable t = testing::random_table(g, g.uniform_int(1, 6), g.uniform_int(1, 6));
    double r1 = std::max(1e-6, g.uniform01());
    double r2 = std::max(1e-6, g.uniform01());
    if (r1 > r2) std::swap(r1, r2);
    const auto small = prune_by_ratio(t, r2).mask.pruned_heads();
    const auto large = prune_by_ratio(t, r1).mask.pruned_heads();
    CHECK(std::includes(large.begin(), large.end(), small.begin(), small.end()));
  }
}

TEST_CASE("counters never exceed S; tables ignore sentence order and thread count") {
  testing::Gen g(1002);
  for (int i = 0; i < kCases; ++i) {
    auto corpus = testing::random_corpus(g, testing::random_shape(g));
    const auto sentences = testing::sentences_of(corpus);
    const int types = static_cast<int>(count_labels(sentences).size());
    const DepRanking ranking = compute_ranking(sentences, g.uniform_int(1, types));
    const double theta = compute_threshold(corpus);
    const HeadScoreTable t = score_heads(corpus, ranking, theta);
    CHECK(theta >= 0.0);
    CHECK(theta <= 1.0);
    for (std::uint64_t c : t.counts) CHECK(c <= t.total_weight);

    std::shuffle(corpus.begin(), corpus.end(), g.engine());
    const double theta2 = compute_threshold(corpus);
    CHECK(theta2 == theta);
    CHECK(score_heads(corpus, ranking, theta2, Direction::kMax, 3) == t);
  }
}

TEST_CASE("raising theta never lowers counters when every label is top-k") {
  testing::Gen g(1003);
  for (int i = 0; i < kCases; ++i) {
    const auto corpus = testing::random_corpus(g, testing::random_shape(g));
    const auto sentences = testing::sentences_of(corpus);
    const DepRanking ranking = compute_ranking(sentences, static_cast<int>(count_labels(sentences).size()));
    double lo = g.uniform01(), hi = g.uniform01();
    if (lo > hi) std::swap(lo, hi);
    const auto a = score_heads(corpus, ranking, lo);
    const auto b = score_heads(corpus, ranking, hi);
    for (std::size_t j = 0; j < a.counts.size(); ++j) CHECK(a.counts[j] <= b.counts[j]);
  }
}

TEST_CASE("attention, mask and CoNLL-U round-trips") {
  testing::Gen g(1004);
  for (int i = 0; i < kCases; ++i) {
    const auto s = testing::random_sentence(g, "rt" + std::to_string(i), g.uniform_int(1, 10));
    std::vector<HeadId> masked;
    const int layers = g.uniform_int(1, 3), heads = g.uniform_int(1, 3);
    if (g.coin(0.3)) masked.push_back({g.uniform_int(0, layers - 1), g.uniform_int(0, heads - 1)});
    const AttentionRecord r = testing::random_record(g, s, layers, heads, 16, masked);
    std::istringstream in(write_attention(r));
    CHECK(read_attention(in) == r);

    const PruneMask m = testing::random_mask(g, g.uniform_int(1, 12), g.uniform_int(1, 12));
    CHECK(read_mask(write_mask(m)) == m);

    const auto back = read_conllu(write_conllu(std::vector<ParsedSentence>{s}));
    REQUIRE(back.size() == 1);
    CHECK(back[0].arcs == s.arcs);
    CHECK(back[0].sentence_id == s.sentence_id);
  }
}

TEST_CASE("collapse is idempotent and only adds heads") {
  testing::Gen g(1005);
  for (int i = 0; i < kCases; ++i) {
    const PruneMask m = testing::random_mask(g, g.uniform_int(1, 8), g.uniform_int(1, 12));
    const double f = std::max(0.01, g.uniform01());
    const PruneMask once = collapse_layers(m, f);
    CHECK(collapse_layers(once, f) == once);
    for (const HeadId& h : m.pruned_heads()) CHECK(once.contains(h));
    for (int l : once.pruned_layers()) CHECK(once.pruned_in_layer(l) == static_cast<std::size_t>(m.heads_per_layer()));
  }
}

TEST_CASE("sparsity targeting returns exactly ceil(s * L * H) heads") {
  testing::Gen g(1006);
  for (int i = 0; i < kCases; ++i) {
    const HeadScoreTable t = testing::random_table(g, g.uniform_int(1, 12), g.uniform_int(1, 12));
    const int total = t.layers * t.heads_per_layer;
    const int m = g.uniform_int(0, total - 1);
    const double s = static_cast<double>(m) / total;
    const PruneResult r = prune_to_sparsity(t, s);
    CHECK(r.mask.size() == static_cast<std::size_t>(m));
  }
}
