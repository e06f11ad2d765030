#include <benchmark/benchmark.h>

#include <map>

#include "sap/depstats.hpp"
#include "sap/pruner.hpp"
#include "sap/ranker.hpp"
#include "sap/toy_corpus.hpp"
#include "sap/toymodel.hpp"

namespace {

struct ToyCorpus {
  std::vector<sap::ParsedSentence> sentences;
  std::vector<sap::CorpusEntry> entries;
};

const ToyCorpus& corpus(int layers, int heads) {
  static std::map<std::pair<int, int>, ToyCorpus> cache;
  auto& c = cache[{layers, heads}];
  if (c.entries.empty()) {
    const sap::ToyModel model(sap::toy_config(layers, heads, 42));
    c.sentences = sap::make_toy_treebank(200, 42);
    c.entries = sap::pair_corpus(c.sentences, sap::toy_attention(model, c.sentences)).entries;
  }
  return c;
}

void BM_ScoreHeads(benchmark::State& state) {
  const auto& c = corpus(4, 4);
  const auto ranking = sap::compute_ranking(c.sentences, 5);
  const double theta = sap::compute_threshold(c.entries);
  for (auto _ : state) {
    benchmark::DoNotOptimize(
        sap::score_heads(c.entries, ranking, theta, sap::Direction::kMax, static_cast<unsigned>(state.range(0))));
  }
}
BENCHMARK(BM_ScoreHeads)->Arg(1)->Arg(4);

void BM_Threshold(benchmark::State& state) {
  const auto& c = corpus(4, 4);
  for (auto _ : state) benchmark::DoNotOptimize(sap::compute_threshold(c.entries));
}
BENCHMARK(BM_Threshold);

void BM_PruneToSparsity(benchmark::State& state) {
  sap::HeadScoreTable t;
  t.layers = 12;
  t.heads_per_layer = 12;
  t.total_weight = 100000;
  for (int i = 0; i < 144; ++i) t.counts.push_back(static_cast<std::uint64_t>(i * 7919 % 100000));
  for (auto _ : state) benchmark::DoNotOptimize(sap::prune_to_sparsity(t, 0.5));
}
BENCHMARK(BM_PruneToSparsity);

void BM_ToyForward(benchmark::State& state) {
  const sap::ToyModel model(sap::toy_config(2, 4, 42));
  const auto sentences = sap::make_toy_treebank(1, 7);
  const auto input = sap::toy_model_input(sentences.front());
  const sap::PruneMask mask(2, 4);
  for (auto _ : state) benchmark::DoNotOptimize(model.forward(input.tokens, mask, "b", input.alignment));
}
BENCHMARK(BM_ToyForward);

}  // namespace

BENCHMARK_MAIN();
