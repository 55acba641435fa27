#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "preagg/coop.hpp"
#include "preagg/cube_opt.hpp"
#include "preagg/ingest.hpp"
#include "preagg/store_io.hpp"

namespace preagg {

// ---------------------------------------------------------------------------
// Synthetic data

struct SyntheticSpec {
  enum class Kind { zipf, uniform };
  Kind kind = Kind::zipf;
  std::int64_t n = 1000000;
  double zipf_param = 1.1;        // Pr(rank j) ~ j^-param
  std::int64_t universe = 100000; // zipf value universe size
  int n_dims = 0;                 // > 0 generates categorical dimensions
  std::int64_t dim_cardinality = 10;
  double dim_zipf = 1.1;
  std::uint64_t seed = 0;
};

/// Deterministic record stream: values per the spec's distribution, time =
/// record index, dimensions (when present) drawn from a per-dimension zipf.
std::vector<Record> gen_synthetic(const SyntheticSpec& spec);

/// Normalized probability mass of the given 1-based zipf rank.
double zipf_mass(std::int64_t rank, double param, std::int64_t universe);

void write_synthetic_csv(const SyntheticSpec& spec, const std::string& path);

/// In-memory convenience builders used by the benchmark suites.
SegmentStore make_synthetic_interval_store(const SyntheticSpec& spec, std::int64_t n_segments,
                                           QueryKind kind, std::int64_t max_interval);
SegmentStore make_synthetic_cube_store(const SyntheticSpec& spec, QueryKind kind,
                                       const std::vector<std::string>& dim_names);

// ---------------------------------------------------------------------------
// Probes and error measurement

/// Frequency probes: up to `count` distinct values sampled uniformly from the
/// dataset's distinct values. Rank probes: `count` equally spaced quantile
/// positions of the global value distribution (deduplicated).
std::vector<Value> probe_set(const SegmentStore& store, QueryKind kind, int count,
                             std::uint64_t seed);

/// Worst-case relative error over the probe set: max |estimate - truth| / |Q|
/// with |Q| taken from the ground-truth store.
double measure_interval_error(const SegmentStore& truth, const SummaryStore& estimates,
                              std::int64_t first_segment, std::int64_t last_segment,
                              QueryKind kind, const std::vector<Value>& probes);
double measure_cube_error(const SegmentStore& truth, const SummaryStore& estimates,
                          const std::vector<std::int64_t>& segment_ids, QueryKind kind,
                          const std::vector<Value>& probes);

struct ErrorReport {
  std::string dataset;
  std::string method;
  std::string query_type;    // frequency | rank
  std::string k_or_filters;  // interval length or filter-count bucket
  double mean_err = 0.0;
  double std_err = 0.0;
  std::int64_t trials = 0;
  std::uint64_t seed = 0;
  double ms = 0.0;
};

void write_reports_csv(const std::string& path, const std::vector<ErrorReport>& rows,
                       const std::vector<std::string>& meta = {});

// ---------------------------------------------------------------------------
// Interval-mode machinery

/// Builds per-segment summaries for one method name: coop | pps | truncation
/// | usample | exact. Cooperative construction threads the prefix tracker
/// through consecutive segments, resetting every k_T.
SummaryStore build_interval_summaries(const SegmentStore& store, const std::string& method,
                                      std::int64_t s, std::uint64_t seed,
                                      double slack = 1.0, HMode h_mode = HMode::calct,
                                      double n_max = 0.0);

struct IntervalSweepConfig {
  std::string dataset_name = "synthetic";
  std::vector<std::string> methods;  // coop, pps, truncation, usample, cms, hierarchy[:b], exact
  std::int64_t summary_size = 64;
  std::vector<std::int64_t> interval_lengths;  // default 1,2,4,...,k_T/2
  int trials = 100;
  int probe_count = 200;
  std::uint64_t seed = 0;
};

std::vector<ErrorReport> run_interval_sweep(const SegmentStore& store,
                                            const IntervalSweepConfig& config);

// ---------------------------------------------------------------------------
// Cube benchmark

struct CubeBenchConfig {
  std::string dataset_name = "synthetic-cube";
  // sb, sb:-size, sb:-bias, sb:-pps, sb:work1, sb:work2, pps, usample,
  // truncation, usample-prop, strat, exact
  std::vector<std::string> methods;
  std::int64_t total_space = 50000;
  std::int64_t s_min = 1;
  WorkloadSpec eval_workload;   // queries scored in the report
  WorkloadSpec build_workload;  // workload handed to the optimizer
  int probe_count = 200;
  std::uint64_t seed = 0;
};

struct CubeBenchOutput {
  std::vector<ErrorReport> rows;                // overall + per-filter-count
  std::map<std::string, double> overall_mean;   // method -> workload mean error
};

CubeBenchOutput run_cube_bench(const SegmentStore& store, const CubeBenchConfig& config);

// ---------------------------------------------------------------------------
// Accumulator sweep

struct AccumulatorSweepConfig {
  std::string dataset_name = "synthetic";
  std::string method = "coop";
  std::int64_t summary_size = 64;
  std::int64_t interval_length = 512;
  std::vector<std::int64_t> accumulator_sizes = {100, 1000, 10000, 100000};
  int trials = 100;
  int probe_count = 200;
  std::uint64_t seed = 0;
};

struct AccumulatorSweepRow {
  std::int64_t accumulator_size = 0;
  double summary_error = 0.0;       // mean relative error of exact accumulation
  double accumulator_error = 0.0;   // mean extra error from the bounded accumulator
  double ms = 0.0;
};

std::vector<AccumulatorSweepRow> run_accumulator_sweep(const SegmentStore& store,
                                                       const AccumulatorSweepConfig& config);

// ---------------------------------------------------------------------------
// Adversarial lower-bound stream

using SummarizerFn = std::function<Summary(const Segment&)>;

struct AdversaryResult {
  double max_undercount = 0.0;
  std::int64_t segments_fed = 0;
  std::int64_t values_used = 0;
};

/// Adaptive stream forcing accumulated undercount >= h_target against any
/// size-s counter strategy: phases of segments holding 2s values each,
/// always drawn from the values the summaries have stored least.
AdversaryResult run_adversarial(const SummarizerFn& summarize, std::int64_t s,
                                std::int64_t h_target);

}  // namespace preagg
