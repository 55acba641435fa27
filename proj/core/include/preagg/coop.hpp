#pragma once

#include <cstdint>
#include <queue>
#include <unordered_map>
#include <vector>

#include "preagg/model.hpp"

namespace preagg {

enum class HMode {
  naive,  // h = |D|/s
  calct,  // h from the minimal-threshold computation (frequency summaries)
};

struct CoopConfig {
  std::int64_t summary_size = 64;   // s
  double slack = 1.0;               // r >= 1; local error budget is r*h
  std::int64_t max_interval = 1;    // k_T; the prefix reset period
  double max_segment_weight = 1.0;  // n_max
  HMode h_mode = HMode::calct;

  /// Cost-function scale for the quantile loss: s / (sqrt(k_T) * n_max).
  double quant_cost_scale() const;

  void validate() const;
};

/// Running signed frequency error per value within the current k_T block.
/// This is the shared state that couples consecutive summaries: a value
/// undercounted by earlier summaries accumulates positive error here and
/// becomes a compensation candidate for later summaries.
class FreqErrorTracker {
 public:
  explicit FreqErrorTracker(std::int64_t max_interval);

  /// Applies one (segment, summary) step: error += exact count - estimate,
  /// per value, then advances the block position (resetting on wrap).
  void advance(const Segment& segment, const Summary& summary);

  double error(Value x) const;
  double max_abs_error() const;
  /// Sum over tracked values of exp(alpha * error). Values never seen
  /// contribute phi(0)=1 each and are not included here.
  double loss(double alpha) const;
  std::int64_t block_position() const { return position_; }
  std::size_t universe_size() const { return errors_.size(); }
  void reset();

 private:
  friend Summary coop_freq_summarize(const Segment&, const CoopConfig&, FreqErrorTracker&);

  void add(Value x, double delta);
  void step_position();

  struct HeapEntry {
    double error;
    Value value;
    // max-heap on error; ties prefer the smallest value id
    bool operator<(const HeapEntry& other) const {
      if (error != other.error) return error < other.error;
      return value > other.value;
    }
  };

  std::int64_t max_interval_;
  std::int64_t position_ = 0;
  std::unordered_map<Value, double> errors_;
  std::priority_queue<HeapEntry> heap_;  // lazy; entries validated on pop
};

/// Running signed rank error, tracked at every value seen in the current
/// block. Rank error is a step function that changes only at observed
/// values, so a newly seen value inherits the error of its predecessor.
class RankErrorTracker {
 public:
  explicit RankErrorTracker(std::int64_t max_interval);

  void advance(const Segment& segment, const Summary& summary);

  /// Inserts the segment's values into the tracked universe (inheriting the
  /// predecessor's error) without changing any error. Idempotent.
  void ensure_values(const Segment& segment);

  double error(Value x) const;  // error at the largest tracked value <= x
  double max_abs_error() const;
  /// log of (sum over tracked values of cosh(alpha * error)), computed with
  /// a shared exponent shift so large alpha*error cannot overflow.
  double log_loss(double alpha) const;
  std::int64_t block_position() const { return position_; }
  std::size_t universe_size() const { return values_.size(); }
  void reset();

 private:
  friend Summary coop_quant_summarize(const Segment&, const CoopConfig&, RankErrorTracker&);

  void add_ranks(const Segment& segment);
  void step_position();

  std::int64_t max_interval_;
  std::int64_t position_ = 0;
  std::vector<Value> values_;  // sorted
  std::vector<double> errors_;
};

/// One sorted chunk of a segment: (value, weight-overlap) pairs. A value
/// whose weight straddles a chunk boundary appears in both chunks with the
/// overlapping portion of its weight.
using SortedChunk = std::vector<std::pair<Value, double>>;

/// Splits the segment, in value order, into s chunks of total weight |D|/s
/// each (fractional boundaries split a value's weight across chunks).
std::vector<SortedChunk> partition_sorted_chunks(const Segment& segment, std::int64_t s);

/// Frequency summary that stores segment-local heavy hitters exactly and
/// spends the remaining slots compensating the values with the largest
/// accumulated positive error, bounded per entry by slack*h.
Summary coop_freq_summarize(const Segment& segment, const CoopConfig& config,
                            FreqErrorTracker& tracker);

/// Quantile summary that picks one representative per equal-weight sorted
/// chunk, minimizing a cosh discrepancy loss over the accumulated errors.
Summary coop_quant_summarize(const Segment& segment, const CoopConfig& config,
                             RankErrorTracker& tracker);

}  // namespace preagg
