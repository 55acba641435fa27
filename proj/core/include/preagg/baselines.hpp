#pragma once

#include <cstdint>
#include <vector>

#include "preagg/ingest.hpp"
#include "preagg/model.hpp"
#include "preagg/rng.hpp"

namespace preagg {

/// Optimal single-segment summary: exact counts for the top-s values
/// (frequency) or s equally spaced values by cumulative weight, each with
/// proxy weight |D|/s (rank).
Summary truncation_summarize(const Segment& segment, std::int64_t s, QueryKind kind);

/// Uniform random sample of min(s, |D|) records without replacement, each
/// carrying weight |D|/min(s, |D|) so the stored weight matches the segment.
Summary usample_summarize(const Segment& segment, std::int64_t s, Rng& rng);

/// Count-Min sketch with width x depth counters and per-row multiply-shift
/// hashing seeded from one global seed. Point queries never underestimate.
class CountMinSketch {
 public:
  CountMinSketch(std::int64_t width, std::int64_t depth, std::uint64_t seed);

  void update(Value x, std::int64_t count);
  std::int64_t query(Value x) const;
  std::int64_t total() const { return total_; }
  std::int64_t width() const { return width_; }
  std::int64_t depth() const { return depth_; }

 private:
  std::size_t cell(std::size_t row, Value x) const;

  std::int64_t width_;
  std::int64_t depth_;
  std::int64_t total_ = 0;
  std::vector<std::uint64_t> row_mul_;
  std::vector<std::uint64_t> row_add_;
  std::vector<std::int64_t> counters_;  // depth x width
};

/// One Count-Min sketch per segment; the interval-query baseline for
/// tabular (non value-storing) summaries.
struct CmsStore {
  std::int64_t width = 0;
  std::int64_t depth = 5;
  std::vector<CountMinSketch> sketches;
};

CmsStore cms_store_build(const SegmentStore& store, std::int64_t width, std::int64_t depth,
                         std::uint64_t seed);

/// Layered truncation summaries over aligned power-of-b blocks. Layer i
/// summarizes blocks of b^i segments with size b^i * s0, where
/// s0 = s / ceil(log_b k_T) keeps the total space equal to per-segment
/// summaries of size s.
struct HierarchyStore {
  std::int64_t base = 2;
  std::int64_t n_segments = 0;
  QueryKind kind = QueryKind::frequency;
  double layer0_size = 0.0;  // s0
  std::vector<std::vector<Summary>> layers;

  std::size_t n_layers() const { return layers.size(); }
  std::int64_t total_entries() const;
};

HierarchyStore hierarchy_build(const SegmentStore& store, std::int64_t s, std::int64_t base);

struct HierarchyBlock {
  std::int64_t layer = 0;
  std::int64_t block = 0;
};

/// Exact disjoint cover of [first, last] (store-local segment indices) by
/// aligned base^i blocks, at most base * ceil(log_base k) of them.
std::vector<HierarchyBlock> hierarchy_plan(const HierarchyStore& store, std::int64_t first,
                                           std::int64_t last);

double hierarchy_estimate(const HierarchyStore& store, std::int64_t first, std::int64_t last,
                          QueryKind kind, Value x);

/// Cube baseline allocations. Proportional: s_i ~ n_i. STRAT-style: sizes
/// minimizing the workload-average variance of uniform-sample count
/// estimates, which puts s_i ~ sqrt(alpha_i).
std::vector<std::int64_t> prop_allocate(const std::vector<std::int64_t>& segment_weights,
                                        std::int64_t total_space, std::int64_t s_min);

}  // namespace preagg
