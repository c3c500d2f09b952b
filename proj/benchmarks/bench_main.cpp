#include <benchmark/benchmark.h>

#include "phrasespec/decoder.hpp"
#include "phrasespec/harness.hpp"
#include "phrasespec/theory.hpp"

namespace {

using namespace phrasespec;

const harness::ExperimentSetup& planted_setup() {
  static const harness::ExperimentSetup setup = [] {
    harness::ExperimentConfig cfg;
    cfg.seed = 7;
    return harness::prepare_experiment(cfg);
  }();
  return setup;
}

void BM_Decode(benchmark::State& state) {
  const auto& setup = planted_setup();
  const auto mode = static_cast<DecodeMode>(state.range(0));
  VerifyConfig cfg;
  cfg.mode = mode;
  cfg.window_size = static_cast<std::size_t>(state.range(1));
  const PhraseLibrary* lib = mode == DecodeMode::kSjdPv ? &setup.library : nullptr;
  std::uint64_t seed = 0;
  std::uint64_t nfe = 0;
  for (auto _ : state) {
    Rng rng(seed++);
    const auto result = decode(*setup.target, lib, cfg, 256, rng);
    nfe += result.metrics.nfe;
    benchmark::DoNotOptimize(result.tokens.data());
  }
  state.counters["nfe"] = benchmark::Counter(static_cast<double>(nfe),
                                             benchmark::Counter::kAvgIterations);
  state.SetItemsProcessed(state.iterations() * 256);
}
BENCHMARK(BM_Decode)
    ->ArgsProduct({{static_cast<int>(DecodeMode::kJacobi), static_cast<int>(DecodeMode::kSjd),
                    static_cast<int>(DecodeMode::kSjdPv)},
                   {4, 16}});

void BM_BuildLibrary(benchmark::State& state) {
  const auto& setup = planted_setup();
  for (auto _ : state) {
    auto lib = build_library(setup.corpus, setup.target->vocab_size(),
                             static_cast<std::size_t>(state.range(0)));
    benchmark::DoNotOptimize(lib.size());
  }
}
BENCHMARK(BM_BuildLibrary)->Arg(64)->Arg(256)->Unit(benchmark::kMillisecond);

void BM_AlphaPhraseExact(benchmark::State& state) {
  Rng rng(3);
  const auto inst = theory::random_instance(8, static_cast<std::size_t>(state.range(0)), 0.1,
                                            10.0, rng);
  for (auto _ : state) benchmark::DoNotOptimize(theory::alpha_phr_exact(inst.p, inst.q));
}
BENCHMARK(BM_AlphaPhraseExact)->DenseRange(1, 5);

}  // namespace

BENCHMARK_MAIN();
