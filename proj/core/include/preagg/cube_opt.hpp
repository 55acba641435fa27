#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "preagg/ingest.hpp"
#include "preagg/store_io.hpp"

namespace preagg {

/// Probabilistic cube workload: every dimension is included as an equality
/// filter independently with probability p (per-dimension overrides allowed),
/// and a filtered dimension picks a value uniformly from its observed values.
struct WorkloadSpec {
  double dim_probability = 0.2;           // p
  std::map<std::string, double> per_dim;  // optional per-dimension overrides
  std::int64_t samples = 10000;           // N
  std::uint64_t seed = 0;

  void validate() const;
};

WorkloadSpec load_workload_spec(const std::string& path);
void save_workload_spec(const WorkloadSpec& spec, const std::string& path);

using CubeFilters = std::vector<std::pair<std::size_t, Value>>;  // (dim index, value id)

struct SampledQuery {
  CubeFilters filters;
  std::vector<std::int64_t> segments;
  std::int64_t total_weight = 0;   // |Q_z|
  std::int64_t multiplicity = 0;   // draws that produced this query
};

struct WorkloadSample {
  std::vector<SampledQuery> queries;
  std::int64_t requested = 0;  // N
  std::int64_t dropped = 0;    // draws that matched nothing after retries

  double probability(const SampledQuery& q) const {
    return static_cast<double>(q.multiplicity) / static_cast<double>(requested);
  }
};

/// Monte Carlo sample of N queries with multiplicities; queries matching no
/// segment are redrawn a bounded number of times, then dropped.
WorkloadSample sample_workload(const WorkloadSpec& spec, const SegmentStore& store);

/// Per-segment allocation scores alpha_i = n_i^2 * sum over sampled queries
/// containing the segment of q_z / |Q_z|^2. Untouched segments score 0.
std::vector<double> allocation_scores(const SegmentStore& store, const WorkloadSample& sample);

/// Shared budget rounding: real allocations proportional to `weights`,
/// clamped to at least s_min with iterative renormalization of the rest.
std::vector<double> allocate_real_budget(const std::vector<double>& weights,
                                         std::int64_t total_space, std::int64_t s_min);

/// Integer version: largest-remainder rounding, preserving the exact total.
std::vector<std::int64_t> allocate_integer_budget(const std::vector<double>& weights,
                                                  std::int64_t total_space, std::int64_t s_min);

/// Summary sizes s_i proportional to alpha_i^(1/3), scaled to the budget.
std::vector<std::int64_t> allocate_sizes(const std::vector<double>& scores,
                                         std::int64_t total_space, std::int64_t s_min);

/// STRAT-style sizes for uniform-sample summaries: s_i proportional to
/// alpha_i^(1/2) (sample variance scales as n^2/s rather than n^2/s^2).
std::vector<std::int64_t> strat_allocate(const std::vector<double>& scores,
                                         std::int64_t total_space, std::int64_t s_min);

/// n[b] = sum over values of (count - b)+; convex, piecewise linear,
/// non-increasing in b.
double effective_weight(const Segment& segment, double b);

/// Whole-cube bias objective J(b) = (sum b_i)^2 + sum n_i[b_i]^2 / (4 s_i^2).
/// Segments with s_i <= 0 contribute no variance term and keep b_i = 0.
double bias_objective(const SegmentStore& store, const std::vector<std::int64_t>& sizes,
                      const std::vector<double>& biases);

struct BiasResult {
  std::vector<double> biases;
  double objective = 0.0;
  bool converged = false;
  int iterations = 0;
};

/// Projected gradient descent on J over b >= 0, initialized at b = 0.
/// Quantile-mode stores get all-zero biases (the variance trade does not
/// apply to rank estimates).
BiasResult optimize_biases(const SegmentStore& store, const std::vector<std::int64_t>& sizes);

struct CubeBuildOptions {
  enum class Alloc { equal, optimized, proportional, strat };
  enum class Sampler { pps, usample, truncation };

  Alloc alloc = Alloc::optimized;
  Sampler sampler = Sampler::pps;
  bool bias = true;
  WorkloadSpec workload;
  std::int64_t total_space = 0;
  std::int64_t s_min = 1;
  std::uint64_t seed = 0;
};

/// Full cube pipeline: workload sample -> sizes -> biases -> per-segment
/// summaries. The returned store records scores, sizes and biases.
SummaryStore build_cube(const SegmentStore& store, const CubeBuildOptions& options);

}  // namespace preagg
