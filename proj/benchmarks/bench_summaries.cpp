#include <benchmark/benchmark.h>

#include "preagg/bench.hpp"
#include "preagg/coop.hpp"
#include "preagg/pps.hpp"
#include "preagg/baselines.hpp"

using namespace preagg;

namespace {

SegmentStore interval_store(std::int64_t n, std::int64_t segments, QueryKind kind) {
  SyntheticSpec spec;
  spec.kind = kind == QueryKind::frequency ? SyntheticSpec::Kind::zipf
                                           : SyntheticSpec::Kind::uniform;
  spec.n = n;
  spec.universe = 20000;
  spec.seed = 1;
  return make_synthetic_interval_store(spec, segments, kind, segments);
}

void BM_CoopFreqConstruction(benchmark::State& state) {
  SegmentStore store = interval_store(200000, 128, QueryKind::frequency);
  CoopConfig config;
  config.summary_size = state.range(0);
  config.max_interval = 128;
  config.max_segment_weight = 2.0 * static_cast<double>(store.segments[0].total_weight());
  for (auto _ : state) {
    FreqErrorTracker tracker(128);
    for (const auto& seg : store.segments) {
      benchmark::DoNotOptimize(coop_freq_summarize(seg, config, tracker));
    }
  }
  state.SetItemsProcessed(state.iterations() * 200000);
}
BENCHMARK(BM_CoopFreqConstruction)->Arg(16)->Arg(64)->Arg(256);

void BM_CoopQuantConstruction(benchmark::State& state) {
  SegmentStore store = interval_store(200000, 128, QueryKind::rank);
  CoopConfig config;
  config.summary_size = state.range(0);
  config.max_interval = 128;
  config.max_segment_weight = 2.0 * static_cast<double>(store.segments[0].total_weight());
  for (auto _ : state) {
    RankErrorTracker tracker(128);
    for (const auto& seg : store.segments) {
      benchmark::DoNotOptimize(coop_quant_summarize(seg, config, tracker));
    }
  }
  state.SetItemsProcessed(state.iterations() * 200000);
}
BENCHMARK(BM_CoopQuantConstruction)->Arg(16)->Arg(64);

void BM_PpsConstruction(benchmark::State& state) {
  SegmentStore store = interval_store(200000, 128, QueryKind::frequency);
  std::uint64_t trial = 0;
  for (auto _ : state) {
    for (std::size_t i = 0; i < store.size(); ++i) {
      Rng rng(derive_seed(trial, i));
      benchmark::DoNotOptimize(pps_summarize(store.segments[i], state.range(0), 0.0, rng));
    }
    ++trial;
  }
  state.SetItemsProcessed(state.iterations() * 200000);
}
BENCHMARK(BM_PpsConstruction)->Arg(16)->Arg(64)->Arg(256);

void BM_TruncationConstruction(benchmark::State& state) {
  SegmentStore store = interval_store(200000, 128, QueryKind::frequency);
  for (auto _ : state) {
    for (const auto& seg : store.segments) {
      benchmark::DoNotOptimize(truncation_summarize(seg, state.range(0), QueryKind::frequency));
    }
  }
  state.SetItemsProcessed(state.iterations() * 200000);
}
BENCHMARK(BM_TruncationConstruction)->Arg(64);

void BM_CalcT(benchmark::State& state) {
  SegmentStore store = interval_store(200000, 128, QueryKind::frequency);
  for (auto _ : state) {
    for (const auto& seg : store.segments) {
      benchmark::DoNotOptimize(calc_t(seg, state.range(0)));
    }
  }
}
BENCHMARK(BM_CalcT)->Arg(64);

}  // namespace
