#include "preagg/coop.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <unordered_set>

#include "preagg/pps.hpp"

namespace preagg {

double CoopConfig::quant_cost_scale() const {
  return static_cast<double>(summary_size) /
         (std::sqrt(static_cast<double>(max_interval)) * max_segment_weight);
}

void CoopConfig::validate() const {
  if (summary_size < 0) throw std::invalid_argument("summary_size must be >= 0");
  if (slack < 1.0) throw std::invalid_argument("slack must be >= 1");
  if (max_interval < 1) throw std::invalid_argument("max_interval must be >= 1");
  if (max_segment_weight <= 0.0) {
    throw std::invalid_argument("max_segment_weight must be > 0");
  }
}

// ---------------------------------------------------------------------------
// FreqErrorTracker

FreqErrorTracker::FreqErrorTracker(std::int64_t max_interval)
    : max_interval_(max_interval) {
  if (max_interval < 1) throw std::invalid_argument("max_interval must be >= 1");
}

void FreqErrorTracker::add(Value x, double delta) {
  double& e = errors_[x];
  e += delta;
  heap_.push({e, x});
}

void FreqErrorTracker::step_position() {
  ++position_;
  if (position_ >= max_interval_) reset();
}

void FreqErrorTracker::reset() {
  position_ = 0;
  errors_.clear();
  heap_ = {};
}

void FreqErrorTracker::advance(const Segment& segment, const Summary& summary) {
  for (const auto& [v, c] : segment.entries()) add(v, static_cast<double>(c));
  for (const auto& [v, w] : summary.entries) add(v, -w);
  step_position();
}

double FreqErrorTracker::error(Value x) const {
  auto it = errors_.find(x);
  return it == errors_.end() ? 0.0 : it->second;
}

double FreqErrorTracker::max_abs_error() const {
  double m = 0.0;
  for (const auto& [v, e] : errors_) m = std::max(m, std::abs(e));
  return m;
}

double FreqErrorTracker::loss(double alpha) const {
  double total = 0.0;
  for (const auto& [v, e] : errors_) total += std::exp(alpha * e);
  return total;
}

Summary coop_freq_summarize(const Segment& segment, const CoopConfig& config,
                            FreqErrorTracker& tracker) {
  config.validate();
  const std::int64_t s = config.summary_size;
  Summary out;
  out.method = SummaryMethod::coop_freq;
  out.size_budget = s;

  // prefix error absorbs this segment's exact counts first
  for (const auto& [v, c] : segment.entries()) {
    tracker.add(v, static_cast<double>(c));
  }

  double h = 0.0;
  if (!segment.empty() && s > 0) {
    h = config.h_mode == HMode::calct
            ? calc_t(segment, s)
            : static_cast<double>(segment.total_weight()) / static_cast<double>(s);
  }
  out.threshold = h;

  std::vector<std::pair<Value, std::int64_t>> heavy;
  std::unordered_set<Value> chosen;
  if (s > 0 && !segment.empty()) {
    // h = 0 happens when the threshold loop peels every value: they are all
    // heavy and fit within s-1 slots
    for (const auto& [v, c] : segment.entries()) {
      if (static_cast<double>(c) >= h) {
        heavy.emplace_back(v, c);
        out.entries.emplace_back(v, static_cast<double>(c));
        chosen.insert(v);
      }
    }

    const double cap = config.slack * h;
    std::vector<FreqErrorTracker::HeapEntry> deferred;
    while (cap > 0.0 && static_cast<std::int64_t>(out.entries.size()) < s &&
           !tracker.heap_.empty()) {
      FreqErrorTracker::HeapEntry top = tracker.heap_.top();
      auto it = tracker.errors_.find(top.value);
      if (it == tracker.errors_.end() || it->second != top.error) {
        tracker.heap_.pop();  // stale
        continue;
      }
      if (top.error <= 0.0) break;  // no accumulated undercount left
      tracker.heap_.pop();
      if (chosen.count(top.value)) {
        // already stored exactly this round; keep it visible for later segments
        deferred.push_back(top);
        continue;
      }
      double give = std::min(cap, top.error);
      out.entries.emplace_back(top.value, give);
      chosen.insert(top.value);
      tracker.add(top.value, -give);
    }
    for (const auto& e : deferred) tracker.heap_.push(e);
  }

  // heavy hitters are stored exactly, so their prefix error is unchanged
  for (const auto& [v, c] : heavy) tracker.add(v, -static_cast<double>(c));

  tracker.step_position();
  out.sort_entries();
  return out;
}

// ---------------------------------------------------------------------------
// RankErrorTracker

RankErrorTracker::RankErrorTracker(std::int64_t max_interval)
    : max_interval_(max_interval) {
  if (max_interval < 1) throw std::invalid_argument("max_interval must be >= 1");
}

void RankErrorTracker::step_position() {
  ++position_;
  if (position_ >= max_interval_) reset();
}

void RankErrorTracker::reset() {
  position_ = 0;
  values_.clear();
  errors_.clear();
}

void RankErrorTracker::ensure_values(const Segment& segment) {
  const auto& entries = segment.entries();
  if (entries.empty()) return;

  std::vector<Value> merged_v;
  std::vector<double> merged_e;
  merged_v.reserve(values_.size() + entries.size());
  merged_e.reserve(values_.size() + entries.size());

  std::size_t i = 0, j = 0;
  double prev_err = 0.0;  // rank error below the smallest tracked value is 0
  while (i < values_.size() || j < entries.size()) {
    if (j == entries.size() ||
        (i < values_.size() && values_[i] <= entries[j].first)) {
      if (j < entries.size() && values_[i] == entries[j].first) ++j;
      merged_v.push_back(values_[i]);
      merged_e.push_back(errors_[i]);
      prev_err = errors_[i];
      ++i;
    } else {
      merged_v.push_back(entries[j].first);
      merged_e.push_back(prev_err);  // step function: inherit predecessor
      ++j;
    }
  }
  values_ = std::move(merged_v);
  errors_ = std::move(merged_e);
}

void RankErrorTracker::add_ranks(const Segment& segment) {
  const auto& entries = segment.entries();
  std::size_t j = 0;
  std::int64_t cum = 0;
  for (std::size_t i = 0; i < values_.size(); ++i) {
    while (j < entries.size() && entries[j].first <= values_[i]) {
      cum += entries[j].second;
      ++j;
    }
    errors_[i] += static_cast<double>(cum);
  }
}

void RankErrorTracker::advance(const Segment& segment, const Summary& summary) {
  ensure_values(segment);
  if (!summary.entries.empty()) {
    std::vector<std::pair<Value, std::int64_t>> vals;
    vals.reserve(summary.entries.size());
    for (const auto& [v, w] : summary.entries) vals.emplace_back(v, 1);
    ensure_values(Segment::from_counts(std::move(vals)));
  }
  add_ranks(segment);
  std::size_t j = 0;
  double cum = 0.0;
  for (std::size_t i = 0; i < values_.size(); ++i) {
    while (j < summary.entries.size() && summary.entries[j].first <= values_[i]) {
      cum += summary.entries[j].second;
      ++j;
    }
    errors_[i] -= cum;
  }
  step_position();
}

double RankErrorTracker::error(Value x) const {
  auto it = std::upper_bound(values_.begin(), values_.end(), x);
  if (it == values_.begin()) return 0.0;
  return errors_[static_cast<std::size_t>(it - values_.begin()) - 1];
}

double RankErrorTracker::max_abs_error() const {
  double m = 0.0;
  for (double e : errors_) m = std::max(m, std::abs(e));
  return m;
}

double RankErrorTracker::log_loss(double alpha) const {
  if (errors_.empty()) return -std::numeric_limits<double>::infinity();
  double shift = 0.0;
  for (double e : errors_) shift = std::max(shift, std::abs(alpha * e));
  double sum = 0.0;
  for (double e : errors_) {
    sum += std::exp(alpha * e - shift) + std::exp(-alpha * e - shift);
  }
  return shift + std::log(0.5 * sum);
}

std::vector<SortedChunk> partition_sorted_chunks(const Segment& segment, std::int64_t s) {
  if (s < 1) throw std::invalid_argument("chunk partition requires s >= 1");
  std::vector<SortedChunk> chunks;
  if (segment.empty()) return chunks;
  chunks.resize(static_cast<std::size_t>(s));

  const double total = static_cast<double>(segment.total_weight());
  const double dust = total * 1e-12;
  std::int64_t j = 1;  // current chunk, 1-based
  double cum = 0.0;
  for (const auto& [v, c] : segment.entries()) {
    double lo = cum;
    const double hi = cum + static_cast<double>(c);
    while (true) {
      double boundary = j == s ? total : total * static_cast<double>(j) / static_cast<double>(s);
      double take_hi = std::min(hi, boundary);
      if (take_hi - lo > dust) {
        chunks[static_cast<std::size_t>(j - 1)].emplace_back(v, take_hi - lo);
      }
      if (hi > boundary && j < s) {
        lo = boundary;
        ++j;
        continue;
      }
      break;
    }
    cum = hi;
  }
  return chunks;
}

Summary coop_quant_summarize(const Segment& segment, const CoopConfig& config,
                             RankErrorTracker& tracker) {
  config.validate();
  const std::int64_t s = config.summary_size;
  Summary out;
  out.method = SummaryMethod::coop_quant;
  out.size_budget = s;
  if (segment.empty() || s == 0) {
    tracker.step_position();
    return out;
  }
  const double h = static_cast<double>(segment.total_weight()) / static_cast<double>(s);
  out.threshold = h;

  tracker.ensure_values(segment);
  tracker.add_ranks(segment);

  const double alpha = config.quant_cost_scale();
  const auto chunks = partition_sorted_chunks(segment, s);
  const std::size_t m = tracker.values_.size();

  // Exponential prefix aggregates with a shared shift; all loss comparisons
  // happen up to one positive scale factor, which keeps the computation in
  // range for any alpha * error.
  double shift = 0.0;
  for (double e : tracker.errors_) shift = std::max(shift, std::abs(alpha * e));
  std::vector<double> pos(m + 1, 0.0), neg(m + 1, 0.0);
  for (std::size_t i = 0; i < m; ++i) {
    double ae = alpha * tracker.errors_[i];
    pos[i + 1] = pos[i] + std::exp(ae - shift);
    neg[i + 1] = neg[i] + std::exp(-ae - shift);
  }

  std::vector<std::size_t> selected_idx;
  selected_idx.reserve(chunks.size());
  for (std::size_t ci = 0; ci < chunks.size(); ++ci) {
    if (chunks[ci].empty()) continue;
    // Selections below this chunk have already shifted the suffix by ci*h.
    // Splitting at a candidate z moves [idx(z), m) to an extra -h; anything
    // below the previous selection is identical for all candidates, so the
    // argmin only needs the two boundary coefficients.
    const double c_lo = static_cast<double>(ci) * alpha * h;
    const double c_hi = c_lo + alpha * h;
    const double a = std::exp(-c_lo) - std::exp(-c_hi);
    const double b = std::exp(c_lo) - std::exp(c_hi);
    // cosh is even, so candidates that only flip an error's sign tie in the
    // true loss; scores within float resolution keep the smaller value id
    const double tie_eps = 1e-12 * (a * pos[m] - b * neg[m]);

    double best_score = std::numeric_limits<double>::infinity();
    Value best_value = chunks[ci].front().first;
    std::size_t best_idx = 0;
    for (const auto& cand : chunks[ci]) {
      Value v = cand.first;
      auto it = std::lower_bound(tracker.values_.begin(), tracker.values_.end(), v);
      std::size_t iz = static_cast<std::size_t>(it - tracker.values_.begin());
      double score = a * pos[iz] + b * neg[iz];
      if (score < best_score - tie_eps) {
        best_score = score;
        best_value = v;
        best_idx = iz;
      }
    }
    out.entries.emplace_back(best_value, h);
    selected_idx.push_back(best_idx);
  }

  // materialize the suffix subtractions for all selections
  std::size_t si = 0;
  double offset = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    while (si < selected_idx.size() && selected_idx[si] <= i) {
      offset += h;
      ++si;
    }
    tracker.errors_[i] -= offset;
  }

  tracker.step_position();
  out.sort_entries();
  // merge duplicate representatives (a value can straddle two chunks)
  std::vector<std::pair<Value, double>> merged;
  merged.reserve(out.entries.size());
  for (const auto& [v, w] : out.entries) {
    if (!merged.empty() && merged.back().first == v) {
      merged.back().second += w;
    } else {
      merged.emplace_back(v, w);
    }
  }
  out.entries = std::move(merged);
  return out;
}

}  // namespace preagg
