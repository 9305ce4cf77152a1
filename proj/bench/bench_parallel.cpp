// Serial reference vs OpenMP kernels: whole trials and batched decoding.

#include <benchmark/benchmark.h>

#include "railtalk/eval.hpp"

using namespace railtalk;

namespace {

const Resources& resources() {
  static const auto r = Resources::load(RAILTALK_BENCH_DATA_DIR);
  return *r;
}

TrialConfig trial_config(std::size_t seeds) {
  TrialConfig c;
  c.scenarios = load_scenarios(std::string(RAILTALK_BENCH_DATA_DIR) + "/scenarios.tsv");
  c.personas = {Persona::cooperative, Persona::oov_prone};
  NoiseConfig n;
  n.p_sub = 0.2;
  c.conditions = {{"p_sub=0.20", n, {}, true}};
  for (std::uint64_t s = 1; s <= seeds; ++s) c.seeds.push_back(s);
  return c;
}

std::vector<ConfusionNetwork> networks(std::size_t count) {
  const auto& r = resources();
  const auto corpus = generate_training_corpus(r.lexicon, r.strategy.session_date, count / 6 + 1, 77);
  NoiseConfig n;
  n.p_sub = 0.3;
  n.p_ins = 0.05;
  std::vector<ConfusionNetwork> out;
  for (std::size_t i = 0; i < count; ++i) {
    std::vector<std::string> words;
    for (const auto& t : corpus[i % corpus.size()].tokens) words.push_back(t.text);
    out.push_back(corrupt(words, n, i, *r.confuser));
  }
  return out;
}

void BM_TrialSerial(benchmark::State& state) {
  const auto config = trial_config(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(run_trial_serial(resources(), config));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(config.dialogues()));
}

void BM_TrialParallel(benchmark::State& state) {
  const auto config = trial_config(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(run_trial_parallel(resources(), config));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(config.dialogues()));
}

void BM_DecodeSerial(benchmark::State& state) {
  const auto cns = networks(static_cast<std::size_t>(state.range(0)));
  DecodeOptions opt;
  for (auto _ : state) benchmark::DoNotOptimize(decode_batch_serial(cns, resources().family.global(), opt));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}

void BM_DecodeParallel(benchmark::State& state) {
  const auto cns = networks(static_cast<std::size_t>(state.range(0)));
  DecodeOptions opt;
  for (auto _ : state) benchmark::DoNotOptimize(decode_batch_parallel(cns, resources().family.global(), opt, 0));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}

}  // namespace

BENCHMARK(BM_TrialSerial)->Arg(2)->Arg(8)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_TrialParallel)->Arg(2)->Arg(8)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_DecodeSerial)->Arg(1000)->Arg(10000)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_DecodeParallel)->Arg(1000)->Arg(10000)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
