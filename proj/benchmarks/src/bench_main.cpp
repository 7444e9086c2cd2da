// SPDX-License-Identifier: Apache-2.0
#include <benchmark/benchmark.h>

#include "failseq/datagen.hpp"
#include "failseq/extraction.hpp"
#include "failseq/rulemine.hpp"
#include "failseq/training.hpp"

using namespace failseq;

namespace {

Dataset sample(std::size_t n) {
  GenConfig g;
  g.num_sequences = n;
  return generate(g);
}

void BM_PredictProba(benchmark::State& state) {
  HyperParams hp;
  hp.lstm_type = static_cast<LstmType>(state.range(0));
  Rng rng(1);
  const ModelParams p = init_params(hp, 20, rng);
  const Dataset ds = sample(256);
  std::size_t i = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(predict_proba(ds.sessions[i++ % ds.size()].events, p));
  }
  state.SetItemsProcessed(state.iterations());
}
BENCHMARK(BM_PredictProba)->Arg(static_cast<int>(LstmType::standard))->Arg(static_cast<int>(LstmType::bidirectional));

void BM_BackwardBatch(benchmark::State& state) {
  HyperParams hp;
  Rng rng(1);
  const ModelParams p = init_params(hp, 20, rng);
  const Dataset ds = sample(512);
  const auto threads = static_cast<std::size_t>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(backward(ds.sessions, p, hp, 3, threads));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(ds.size()));
}
BENCHMARK(BM_BackwardBatch)->Arg(1)->Arg(4)->UseRealTime();

void BM_ExtractOracle(benchmark::State& state) {
  const Dataset ds = sample(256);
  const Predictor oracle = oracle_predictor(*ds.provenance);
  const ExtractConfig cfg;
  std::size_t i = 0;
  for (auto _ : state) benchmark::DoNotOptimize(extract(ds.sessions[i++ % ds.size()].events, oracle, cfg));
  state.SetItemsProcessed(state.iterations());
}
BENCHMARK(BM_ExtractOracle);

void BM_MineRules(benchmark::State& state) {
  const Dataset ds = sample(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(mine_rules(ds));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_MineRules)->Arg(3000)->Arg(30000)->Unit(benchmark::kMillisecond);

}  // namespace
BENCHMARK_MAIN();
