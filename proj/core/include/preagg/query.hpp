#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <string>
#include <unordered_map>
#include <vector>

#include "preagg/model.hpp"
#include "preagg/rng.hpp"
#include "preagg/store_io.hpp"

namespace preagg {

/// Signed combination of prefix intervals. Prefix t covers the segments
/// k_T*floor(t/k_T) .. t (store-local indices).
struct PrefixTerm {
  std::int64_t prefix = 0;
  int coefficient = 1;  // +1 or -1
};

struct IntervalPlan {
  std::vector<PrefixTerm> terms;
  std::int64_t first_segment = 0;  // query covers [first_segment, last_segment]
  std::int64_t last_segment = 0;
};

/// Decomposes an aligned time interval [t0, t1) into at most three signed
/// prefix terms. t0 and t1 must be multiples of the time resolution and the
/// interval at most max_interval segments long.
IntervalPlan decompose_interval(std::int64_t t0, std::int64_t t1,
                                std::int64_t time_resolution, std::int64_t max_interval,
                                std::int64_t base_index = 0);

/// Expands a plan into per-segment net coefficients over [0, n_segments);
/// a sound plan yields 1 inside the query range and 0 outside.
std::vector<int> plan_coefficients(const IntervalPlan& plan, std::int64_t n_segments,
                                   std::int64_t max_interval);

/// Scalar estimate: sum over the plan of coefficient * g_S(x), evaluating
/// each prefix over its constituent per-segment summaries.
double point_estimate(const IntervalPlan& plan, const SummaryStore& store,
                      QueryKind kind, Value x);

/// Cube estimate: plain sum over the matched segment summaries.
double point_estimate(const std::vector<std::int64_t>& segment_ids,
                      const SummaryStore& store, QueryKind kind, Value x);

// ---------------------------------------------------------------------------
// Accumulators: large bounded structures that merge proxy weights at query
// time for quantile / heavy-hitter reads.

enum class AccumulatorKind { exact, spacesaving, pps };
AccumulatorKind accumulator_kind_from_string(const std::string& s);
std::string to_string(AccumulatorKind k);

class Accumulator {
 public:
  virtual ~Accumulator() = default;
  virtual void add(Value value, double weight) = 0;
  virtual double total_weight() const = 0;
  virtual double frequency(Value x) const = 0;
  virtual double rank(Value x) const = 0;
  /// Stored (value, weight) pairs sorted by value; built lazily at first read.
  virtual const std::vector<std::pair<Value, double>>& sorted_entries() const = 0;
  virtual std::size_t stored() const = 0;
};

std::unique_ptr<Accumulator> make_accumulator(AccumulatorKind kind, std::int64_t capacity,
                                              std::uint64_t seed);

/// Unbounded exact mapping; zero accumulator error.
class ExactAccumulator final : public Accumulator {
 public:
  void add(Value value, double weight) override;
  double total_weight() const override { return total_; }
  double frequency(Value x) const override;
  double rank(Value x) const override;
  const std::vector<std::pair<Value, double>>& sorted_entries() const override;
  std::size_t stored() const override { return weights_.size(); }

 private:
  std::unordered_map<Value, double> weights_;
  double total_ = 0.0;
  mutable std::vector<std::pair<Value, double>> sorted_;
  mutable std::vector<double> cumulative_;
  mutable bool dirty_ = true;
};

/// Weighted SpaceSaving sketch with capacity counters; per-item error is at
/// most total_weight / capacity.
class SpaceSavingAccumulator final : public Accumulator {
 public:
  explicit SpaceSavingAccumulator(std::int64_t capacity);

  void add(Value value, double weight) override;
  double total_weight() const override { return total_; }
  double frequency(Value x) const override;
  double rank(Value x) const override;
  const std::vector<std::pair<Value, double>>& sorted_entries() const override;
  std::size_t stored() const override { return counters_.size(); }
  double max_overestimate() const { return max_evicted_; }

 private:
  struct Counter {
    double count = 0.0;
    double error = 0.0;
  };
  void settle(Value value, double weight);

  std::int64_t capacity_;
  double total_ = 0.0;
  double max_evicted_ = 0.0;
  std::unordered_map<Value, Counter> counters_;
  // lazy min-heap over (count, value); stale entries skipped on pop
  struct HeapEntry {
    double count;
    Value value;
    bool operator>(const HeapEntry& o) const {
      if (count != o.count) return count > o.count;
      return value > o.value;
    }
  };
  std::vector<HeapEntry> heap_;
  mutable std::vector<std::pair<Value, double>> sorted_;
  mutable std::vector<double> cumulative_;
  mutable bool dirty_ = true;
};

/// Fixed-size weighted reservoir (streaming PPS): items above the running
/// threshold keep exact weights, the rest share the threshold as their proxy
/// weight; one item is evicted per overflow through the same pairwise
/// probability transform used at summary construction.
class StreamingPpsAccumulator final : public Accumulator {
 public:
  StreamingPpsAccumulator(std::int64_t capacity, std::uint64_t seed);

  void add(Value value, double weight) override;
  double total_weight() const override { return total_; }
  double frequency(Value x) const override;
  double rank(Value x) const override;
  const std::vector<std::pair<Value, double>>& sorted_entries() const override;
  std::size_t stored() const override { return large_.size() + small_.size(); }
  double threshold() const { return tau_; }

 private:
  void reduce_one();

  std::int64_t capacity_;
  double total_ = 0.0;
  double tau_ = 0.0;
  std::vector<std::pair<Value, double>> large_;  // exact-weight items, unordered
  std::vector<Value> small_;                     // items with shared weight tau_
  Rng rng_;
  mutable std::vector<std::pair<Value, double>> sorted_;
  mutable std::vector<double> cumulative_;
  mutable bool dirty_ = true;
};

/// Two-sided accumulator: negative-coefficient prefix contributions go into
/// a second accumulator and are subtracted at read time, since the bounded
/// sketches do not support deletion.
struct SignedAccumulator {
  std::unique_ptr<Accumulator> positive;
  std::unique_ptr<Accumulator> negative;  // null when the plan has no negative terms

  double total_weight() const;
  double frequency(Value x) const;
  double rank(Value x) const;
};

SignedAccumulator accumulate(const IntervalPlan& plan, const SummaryStore& store,
                             AccumulatorKind kind, std::int64_t capacity,
                             std::uint64_t seed = 0);
SignedAccumulator accumulate(const std::vector<std::int64_t>& segment_ids,
                             const SummaryStore& store, AccumulatorKind kind,
                             std::int64_t capacity, std::uint64_t seed = 0);

/// Smallest stored value whose accumulated rank reaches q * total weight.
Value quantile(const SignedAccumulator& acc, double q);

/// Top-k stored values by net accumulated weight, descending, ties by id.
std::vector<std::pair<Value, double>> heavy_hitters(const SignedAccumulator& acc,
                                                    std::int64_t top_k);

/// Cube segment selection: every segment whose key matches all equality
/// filters (dimension index -> value id).
std::vector<std::int64_t> select_cube_segments(
    const std::vector<std::pair<std::size_t, Value>>& filters,
    const std::vector<SegmentKey>& keys);

}  // namespace preagg
