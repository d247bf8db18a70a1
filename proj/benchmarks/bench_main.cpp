#include <benchmark/benchmark.h>

#include <string>
#include <vector>

#include "bisent/bdrnn.hpp"
#include "bisent/corpus.hpp"
#include "bisent/metrics.hpp"
#include "bisent/preprocess.hpp"
#include "bisent/random.hpp"
#include "bisent/vocabulary.hpp"

using namespace bisent;

namespace {

Hyperparams bench_shape(std::uint64_t hidden) {
  Hyperparams hp;
  hp.vocab_size = 2000;
  hp.embed_dim = 100;
  hp.hidden_dim = hidden;
  return hp;
}

EncodedSequence sequence(std::size_t len) {
  Rng rng(3);
  EncodedSequence seq;
  for (std::size_t i = 0; i < len; ++i) seq.token_ids.push_back(static_cast<int>(2 + rng.index(1998)));
  seq.length = len;
  return seq;
}

void BM_Forward(benchmark::State& state) {
  const auto hp = bench_shape(static_cast<std::uint64_t>(state.range(0)));
  const auto model = BdrnnModel::initialize(hp);
  const auto seq = sequence(20);
  for (auto _ : state) benchmark::DoNotOptimize(forward(model, seq).probs);
}
BENCHMARK(BM_Forward)->Arg(32)->Arg(128);

void BM_ForwardBackward(benchmark::State& state) {
  const auto hp = bench_shape(static_cast<std::uint64_t>(state.range(0)));
  const auto model = BdrnnModel::initialize(hp);
  const auto seq = sequence(20);
  auto acc = zero_gradients(hp);
  for (auto _ : state) {
    const auto fr = forward(model, seq);
    accumulate_gradients(model, fr.cache, 4, acc);
  }
}
BENCHMARK(BM_ForwardBackward)->Arg(32)->Arg(128);

void BM_Preprocess(benchmark::State& state) {
  auto cfg = default_synth_config();
  cfg.num_posts = 1000;
  const auto corpus = synth_corpus(cfg, 1);
  for (auto _ : state) benchmark::DoNotOptimize(preprocess_corpus(corpus, {}));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(corpus.posts.size()));
}
BENCHMARK(BM_Preprocess);

void BM_Evaluate(benchmark::State& state) {
  Rng rng(5);
  std::vector<SentimentClass> g, p;
  for (int i = 0; i < 10000; ++i) {
    g.push_back(class_from_index(rng.index(7)));
    p.push_back(class_from_index(rng.index(7)));
  }
  for (auto _ : state) benchmark::DoNotOptimize(evaluate(g, p).kappa);
}
BENCHMARK(BM_Evaluate);

}  // namespace

BENCHMARK_MAIN();
