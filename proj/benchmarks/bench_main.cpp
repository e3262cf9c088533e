#include <benchmark/benchmark.h>

#include <random>
#include <string>
#include <vector>

#include "proxkit/proxemics.hpp"
#include "proxkit/reliability.hpp"
#include "proxkit/stats.hpp"
#include "proxkit/synth.hpp"

namespace {

using namespace proxkit;

ZoneSequence random_sequence(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  ZoneSequence seq;
  seq.track_id = "t1";
  Zone cur = Zone::Personal;
  for (std::size_t i = 0; i < n; ++i) {
    if (rng() % 5 == 0) cur = static_cast<Zone>(rng() % kZoneCount);
    seq.zones.push_back(cur);
  }
  return seq;
}

void BM_ComputeMetrics(benchmark::State& state) {
  const auto seq = random_sequence(static_cast<std::size_t>(state.range(0)), 1);
  for (auto _ : state) benchmark::DoNotOptimize(compute_metrics(seq));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_ComputeMetrics)->RangeMultiplier(8)->Range(64, 32768);

void BM_SmoothBlips(benchmark::State& state) {
  const auto seq = random_sequence(static_cast<std::size_t>(state.range(0)), 2);
  for (auto _ : state) benchmark::DoNotOptimize(smooth_blips(seq));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_SmoothBlips)->RangeMultiplier(8)->Range(64, 32768);

void BM_Kappa(benchmark::State& state) {
  std::mt19937_64 rng(3);
  PairedLabels pairs;
  for (std::int64_t i = 0; i < state.range(0); ++i) {
    pairs.pairs.emplace_back(static_cast<Zone>(rng() % 4), static_cast<Zone>(rng() % 4));
  }
  for (auto _ : state) benchmark::DoNotOptimize(reliability_report(pairs));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_Kappa)->RangeMultiplier(10)->Range(100, 100000);

void BM_Correlate(benchmark::State& state) {
  std::mt19937_64 rng(4);
  std::normal_distribution<double> noise;
  std::vector<double> x, y;
  for (std::int64_t i = 0; i < state.range(0); ++i) {
    x.push_back(noise(rng));
    y.push_back(x.back() + noise(rng));
  }
  for (auto _ : state) benchmark::DoNotOptimize(stats::correlate(x, y));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_Correlate)->RangeMultiplier(10)->Range(100, 100000);

void BM_GenerateSession(benchmark::State& state) {
  const GeneratorConfig config;
  int i = 0;
  for (auto _ : state) benchmark::DoNotOptimize(generate_session(config, corpus_session_id(++i)));
}
BENCHMARK(BM_GenerateSession);

void BM_SessionMetrics(benchmark::State& state) {
  const GeneratorConfig config;
  const auto session = generate_session(config, "s0001");
  for (auto _ : state) {
    benchmark::DoNotOptimize(session_metrics(session.annotation, {config.coder_id, 1}));
  }
}
BENCHMARK(BM_SessionMetrics);

}  // namespace

BENCHMARK_MAIN();
