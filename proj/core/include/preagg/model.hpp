#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "preagg/value.hpp"

namespace preagg {

/// The two supported query functions: total count of records with a value,
/// and total count of records with values less than or equal to a value.
enum class QueryKind { frequency, rank };

QueryKind query_kind_from_string(const std::string& s);
std::string to_string(QueryKind k);

/// Exact value -> count mapping for one atomic data partition. Immutable
/// after construction; the ground truth for all error measurement.
class Segment {
 public:
  Segment() = default;

  /// Builds from (value, count) pairs; duplicates are merged, zero counts
  /// dropped, negative counts rejected.
  static Segment from_counts(std::vector<std::pair<Value, std::int64_t>> counts);
  static Segment from_values(const std::vector<Value>& values);

  const std::vector<std::pair<Value, std::int64_t>>& entries() const { return entries_; }
  std::int64_t total_weight() const { return total_weight_; }
  std::size_t distinct() const { return entries_.size(); }
  bool empty() const { return entries_.empty(); }

  /// Exact count of x, or 0 when absent.
  std::int64_t frequency(Value x) const;
  /// Exact count of records with value <= x.
  std::int64_t rank(Value x) const;

  bool operator==(const Segment& other) const { return entries_ == other.entries_; }

 private:
  std::vector<std::pair<Value, std::int64_t>> entries_;  // sorted by value
  std::vector<std::int64_t> cumulative_;                 // inclusive prefix counts
  std::int64_t total_weight_ = 0;
};

enum class SummaryMethod {
  exact,
  coop_freq,
  coop_quant,
  pps,
  truncation,
  usample,
};

SummaryMethod summary_method_from_string(const std::string& s);
std::string to_string(SummaryMethod m);

/// Compact (value, proxy weight) list standing in for a segment. Weights are
/// doubles: bias re-addition and PPS proxy weights are fractional.
struct Summary {
  std::vector<std::pair<Value, double>> entries;  // sorted by value
  std::int64_t size_budget = 0;
  SummaryMethod method = SummaryMethod::exact;
  double threshold = 0.0;  // h, when the method defines one
  double bias = 0.0;       // b, PPS only

  /// Sum of weights of entries matching x exactly.
  double frequency(Value x) const;
  /// Sum of weights of entries with value <= x.
  double rank(Value x) const;
  double total_weight() const;

  void sort_entries();

  bool operator==(const Summary& other) const = default;
};

/// Exact identity summary (stores the whole segment). The zero-error control
/// used to show the query engine adds no error of its own.
Summary exact_summarize(const Segment& segment);

double eval(const Summary& s, QueryKind kind, Value x);
std::int64_t eval(const Segment& s, QueryKind kind, Value x);

}  // namespace preagg
