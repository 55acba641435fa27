#include <benchmark/benchmark.h>

#include "preagg/bench.hpp"
#include "preagg/query.hpp"

using namespace preagg;

namespace {

struct QueryFixture {
  SegmentStore store;
  SummaryStore summaries;
  std::vector<Value> probes;

  QueryFixture() {
    SyntheticSpec spec;
    spec.kind = SyntheticSpec::Kind::zipf;
    spec.n = 500000;
    spec.universe = 50000;
    spec.seed = 2;
    store = make_synthetic_interval_store(spec, 512, QueryKind::frequency, 512);
    summaries = build_interval_summaries(store, "coop", 64, 3);
    probes = probe_set(store, QueryKind::frequency, 200, 4);
  }
};

QueryFixture& fixture() {
  static QueryFixture f;
  return f;
}

void BM_PointEstimate(benchmark::State& state) {
  auto& f = fixture();
  const std::int64_t k = state.range(0);
  IntervalPlan plan = decompose_interval(0, k * f.store.config.time_resolution,
                                         f.store.config.time_resolution, 512);
  std::size_t p = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(
        point_estimate(plan, f.summaries, QueryKind::frequency, f.probes[p]));
    p = (p + 1) % f.probes.size();
  }
}
BENCHMARK(BM_PointEstimate)->Arg(16)->Arg(128)->Arg(512);

void BM_AccumulateSpaceSaving(benchmark::State& state) {
  auto& f = fixture();
  IntervalPlan plan = decompose_interval(0, 256 * f.store.config.time_resolution,
                                         f.store.config.time_resolution, 512);
  std::uint64_t seed = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(
        accumulate(plan, f.summaries, AccumulatorKind::spacesaving, state.range(0), ++seed));
  }
}
BENCHMARK(BM_AccumulateSpaceSaving)->Arg(1000)->Arg(100000);

void BM_AccumulateStreamingPps(benchmark::State& state) {
  auto& f = fixture();
  IntervalPlan plan = decompose_interval(0, 256 * f.store.config.time_resolution,
                                         f.store.config.time_resolution, 512);
  std::uint64_t seed = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(
        accumulate(plan, f.summaries, AccumulatorKind::pps, state.range(0), ++seed));
  }
}
BENCHMARK(BM_AccumulateStreamingPps)->Arg(1000)->Arg(100000);

}  // namespace

BENCHMARK_MAIN();
