#include "preagg/query.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "preagg/pps.hpp"

namespace preagg {

namespace {

void check_rank_ordered(const SummaryStore& store, QueryKind kind) {
  if (kind == QueryKind::rank && store.config.value_kind == ValueKind::categorical) {
    throw std::domain_error("rank queries require an ordered value domain");
  }
}

}  // namespace

IntervalPlan decompose_interval(std::int64_t t0, std::int64_t t1,
                                std::int64_t time_resolution, std::int64_t max_interval,
                                std::int64_t base_index) {
  if (time_resolution <= 0) throw std::invalid_argument("time resolution must be > 0");
  if (t0 % time_resolution != 0 || t1 % time_resolution != 0) {
    throw std::invalid_argument("interval bounds must be aligned to the time resolution");
  }
  if (t0 >= t1) throw std::invalid_argument("empty interval");
  std::int64_t length = (t1 - t0) / time_resolution;
  std::int64_t first = t0 / time_resolution - base_index;
  std::int64_t last = first + length - 1;
  if (first < 0) throw std::out_of_range("interval starts before the store");
  // any interval of up to k_T segments crosses at most one prefix-block
  // boundary; anything touching three blocks has no three-term plan
  if (last / max_interval - first / max_interval > 1) {
    throw std::invalid_argument("interval longer than the maximum interval length");
  }

  IntervalPlan plan;
  plan.first_segment = first;
  plan.last_segment = last;
  std::int64_t first_block = first / max_interval * max_interval;
  std::int64_t last_block = last / max_interval * max_interval;
  if (first_block == last_block) {
    plan.terms.push_back({last, +1});
    if (first > first_block) plan.terms.push_back({first - 1, -1});
  } else {
    // the interval crosses exactly one block boundary
    plan.terms.push_back({first_block + max_interval - 1, +1});
    if (first > first_block) plan.terms.push_back({first - 1, -1});
    plan.terms.push_back({last, +1});
  }
  return plan;
}

std::vector<int> plan_coefficients(const IntervalPlan& plan, std::int64_t n_segments,
                                   std::int64_t max_interval) {
  std::vector<int> coeffs(static_cast<std::size_t>(n_segments), 0);
  for (const auto& term : plan.terms) {
    if (term.prefix < 0 || term.prefix >= n_segments) {
      throw std::out_of_range("plan references a segment outside the store");
    }
    std::int64_t start = term.prefix / max_interval * max_interval;
    for (std::int64_t i = start; i <= term.prefix; ++i) {
      coeffs[static_cast<std::size_t>(i)] += term.coefficient;
    }
  }
  return coeffs;
}

double point_estimate(const IntervalPlan& plan, const SummaryStore& store,
                      QueryKind kind, Value x) {
  check_rank_ordered(store, kind);
  const std::int64_t n = static_cast<std::int64_t>(store.summaries.size());
  const std::int64_t k_t = store.config.max_interval;
  double total = 0.0;
  for (const auto& term : plan.terms) {
    if (term.prefix < 0 || term.prefix >= n) {
      throw std::out_of_range("missing summary for plan prefix");
    }
    std::int64_t start = term.prefix / k_t * k_t;
    double prefix_sum = 0.0;
    for (std::int64_t i = start; i <= term.prefix; ++i) {
      prefix_sum += eval(store.summaries[static_cast<std::size_t>(i)], kind, x);
    }
    total += term.coefficient * prefix_sum;
  }
  return total;
}

double point_estimate(const std::vector<std::int64_t>& segment_ids,
                      const SummaryStore& store, QueryKind kind, Value x) {
  check_rank_ordered(store, kind);
  double total = 0.0;
  for (std::int64_t id : segment_ids) {
    if (id < 0 || id >= static_cast<std::int64_t>(store.summaries.size())) {
      throw std::out_of_range("missing summary for segment");
    }
    total += eval(store.summaries[static_cast<std::size_t>(id)], kind, x);
  }
  return total;
}

AccumulatorKind accumulator_kind_from_string(const std::string& s) {
  if (s == "exact") return AccumulatorKind::exact;
  if (s == "spacesaving") return AccumulatorKind::spacesaving;
  if (s == "pps") return AccumulatorKind::pps;
  throw std::invalid_argument("unknown accumulator kind: " + s);
}

std::string to_string(AccumulatorKind k) {
  switch (k) {
    case AccumulatorKind::exact: return "exact";
    case AccumulatorKind::spacesaving: return "spacesaving";
    case AccumulatorKind::pps: return "pps";
  }
  throw std::logic_error("bad AccumulatorKind");
}

std::unique_ptr<Accumulator> make_accumulator(AccumulatorKind kind, std::int64_t capacity,
                                              std::uint64_t seed) {
  switch (kind) {
    case AccumulatorKind::exact: return std::make_unique<ExactAccumulator>();
    case AccumulatorKind::spacesaving:
      return std::make_unique<SpaceSavingAccumulator>(capacity);
    case AccumulatorKind::pps:
      return std::make_unique<StreamingPpsAccumulator>(capacity, seed);
  }
  throw std::logic_error("bad AccumulatorKind");
}

// ---------------------------------------------------------------------------
// ExactAccumulator

void ExactAccumulator::add(Value value, double weight) {
  weights_[value] += weight;
  total_ += weight;
  dirty_ = true;
}

double ExactAccumulator::frequency(Value x) const {
  auto it = weights_.find(x);
  return it == weights_.end() ? 0.0 : it->second;
}

const std::vector<std::pair<Value, double>>& ExactAccumulator::sorted_entries() const {
  if (dirty_) {
    sorted_.assign(weights_.begin(), weights_.end());
    std::sort(sorted_.begin(), sorted_.end());
    cumulative_.resize(sorted_.size());
    double run = 0.0;
    for (std::size_t i = 0; i < sorted_.size(); ++i) {
      run += sorted_[i].second;
      cumulative_[i] = run;
    }
    dirty_ = false;
  }
  return sorted_;
}

double ExactAccumulator::rank(Value x) const {
  const auto& entries = sorted_entries();
  auto it = std::upper_bound(entries.begin(), entries.end(), x,
                             [](Value v, const auto& e) { return v < e.first; });
  if (it == entries.begin()) return 0.0;
  return cumulative_[static_cast<std::size_t>(it - entries.begin()) - 1];
}

// ---------------------------------------------------------------------------
// SpaceSavingAccumulator

SpaceSavingAccumulator::SpaceSavingAccumulator(std::int64_t capacity)
    : capacity_(capacity) {
  if (capacity < 1) throw std::invalid_argument("accumulator capacity must be >= 1");
}

void SpaceSavingAccumulator::add(Value value, double weight) {
  if (weight < 0.0) {
    throw std::invalid_argument("SpaceSaving accumulator does not support deletion");
  }
  if (weight == 0.0) return;
  total_ += weight;
  dirty_ = true;
  settle(value, weight);
}

void SpaceSavingAccumulator::settle(Value value, double weight) {
  auto cmp = [](const HeapEntry& a, const HeapEntry& b) { return a > b; };
  auto it = counters_.find(value);
  if (it != counters_.end()) {
    it->second.count += weight;
    heap_.push_back({it->second.count, value});
    std::push_heap(heap_.begin(), heap_.end(), cmp);
    return;
  }
  if (static_cast<std::int64_t>(counters_.size()) < capacity_) {
    counters_[value] = {weight, 0.0};
    heap_.push_back({weight, value});
    std::push_heap(heap_.begin(), heap_.end(), cmp);
    return;
  }
  // evict the current minimum; the newcomer inherits its count as error
  while (true) {
    const HeapEntry& top = heap_.front();
    auto cit = counters_.find(top.value);
    if (cit == counters_.end() || cit->second.count != top.count) {
      std::pop_heap(heap_.begin(), heap_.end(), cmp);
      heap_.pop_back();
      continue;
    }
    double min_count = top.count;
    Value victim = top.value;
    std::pop_heap(heap_.begin(), heap_.end(), cmp);
    heap_.pop_back();
    counters_.erase(victim);
    max_evicted_ = std::max(max_evicted_, min_count);
    counters_[value] = {min_count + weight, min_count};
    heap_.push_back({min_count + weight, value});
    std::push_heap(heap_.begin(), heap_.end(), cmp);
    break;
  }
}

double SpaceSavingAccumulator::frequency(Value x) const {
  auto it = counters_.find(x);
  return it == counters_.end() ? 0.0 : it->second.count;
}

const std::vector<std::pair<Value, double>>& SpaceSavingAccumulator::sorted_entries() const {
  if (dirty_) {
    sorted_.clear();
    sorted_.reserve(counters_.size());
    for (const auto& [v, c] : counters_) sorted_.emplace_back(v, c.count);
    std::sort(sorted_.begin(), sorted_.end());
    cumulative_.resize(sorted_.size());
    double run = 0.0;
    for (std::size_t i = 0; i < sorted_.size(); ++i) {
      run += sorted_[i].second;
      cumulative_[i] = run;
    }
    dirty_ = false;
  }
  return sorted_;
}

double SpaceSavingAccumulator::rank(Value x) const {
  const auto& entries = sorted_entries();
  auto it = std::upper_bound(entries.begin(), entries.end(), x,
                             [](Value v, const auto& e) { return v < e.first; });
  if (it == entries.begin()) return 0.0;
  return cumulative_[static_cast<std::size_t>(it - entries.begin()) - 1];
}

// ---------------------------------------------------------------------------
// StreamingPpsAccumulator

StreamingPpsAccumulator::StreamingPpsAccumulator(std::int64_t capacity, std::uint64_t seed)
    : capacity_(capacity), rng_(seed) {
  if (capacity < 2) throw std::invalid_argument("pps accumulator capacity must be >= 2");
}

namespace {
// min-heap ordering on (weight, value) pairs stored as (value, weight)
inline bool large_after(const std::pair<Value, double>& a, const std::pair<Value, double>& b) {
  if (a.second != b.second) return a.second > b.second;
  return a.first > b.first;
}
}  // namespace

void StreamingPpsAccumulator::add(Value value, double weight) {
  if (weight < 0.0) {
    throw std::invalid_argument("pps accumulator does not support deletion");
  }
  if (weight == 0.0) return;
  total_ += weight;
  dirty_ = true;
  large_.emplace_back(value, weight);
  std::push_heap(large_.begin(), large_.end(), large_after);
  if (static_cast<std::int64_t>(stored()) > capacity_) reduce_one();
}

void StreamingPpsAccumulator::reduce_one() {
  // Threshold set in ascending weight order: all current smalls join (the
  // threshold never decreases), then larges join while their weight stays
  // below the running threshold csum / (cnt - 1).
  std::vector<std::pair<Value, double>> pulled;  // demoted larges, ascending
  double csum = tau_ * static_cast<double>(small_.size());
  std::size_t cnt = small_.size();
  while (!large_.empty()) {
    double w = large_.front().second;
    if (cnt >= 2 && w > csum / static_cast<double>(cnt - 1)) break;
    pulled.push_back(large_.front());
    csum += w;
    ++cnt;
    std::pop_heap(large_.begin(), large_.end(), large_after);
    large_.pop_back();
  }
  const double new_tau = csum / static_cast<double>(cnt - 1);

  // Exactly one threshold-set item is dropped. A pair-aggregation chain over
  // the inclusion probabilities w/tau' zeroes item i with probability
  // 1 - w_i/tau' (its expectation is preserved and all survivors pin to 1),
  // so the eviction reduces to one categorical draw over those masses.
  const double small_evict_p = 1.0 - tau_ / new_tau;
  const double small_mass = small_evict_p * static_cast<double>(small_.size());
  double r = rng_.next_double();
  std::size_t evicted_pull = pulled.size();  // sentinel: a small gets evicted
  if (!small_.empty() && r < small_mass) {
    std::size_t idx = std::min(small_.size() - 1, static_cast<std::size_t>(r / small_evict_p));
    small_[idx] = small_.back();
    small_.pop_back();
  } else {
    r -= small_mass;
    bool done = false;
    for (std::size_t j = 0; j < pulled.size(); ++j) {
      double p = 1.0 - pulled[j].second / new_tau;
      if (r < p) {
        evicted_pull = j;
        done = true;
        break;
      }
      r -= p;
    }
    if (!done) {
      // the masses sum to 1 exactly; float dust lands on the last candidate
      if (!pulled.empty()) {
        evicted_pull = pulled.size() - 1;
      } else {
        small_.pop_back();
      }
    }
  }
  for (std::size_t j = 0; j < pulled.size(); ++j) {
    if (j == evicted_pull) continue;
    small_.push_back(pulled[j].first);
  }
  tau_ = new_tau;
}

double StreamingPpsAccumulator::frequency(Value x) const {
  const auto& entries = sorted_entries();
  double sum = 0.0;
  auto lo = std::lower_bound(entries.begin(), entries.end(), x,
                             [](const auto& e, Value v) { return e.first < v; });
  for (auto it = lo; it != entries.end() && it->first == x; ++it) sum += it->second;
  return sum;
}

const std::vector<std::pair<Value, double>>& StreamingPpsAccumulator::sorted_entries() const {
  if (dirty_) {
    sorted_.clear();
    sorted_.reserve(stored());
    for (const auto& [v, w] : large_) sorted_.emplace_back(v, w);
    for (Value v : small_) sorted_.emplace_back(v, tau_);
    std::sort(sorted_.begin(), sorted_.end());
    cumulative_.resize(sorted_.size());
    double run = 0.0;
    for (std::size_t i = 0; i < sorted_.size(); ++i) {
      run += sorted_[i].second;
      cumulative_[i] = run;
    }
    dirty_ = false;
  }
  return sorted_;
}

double StreamingPpsAccumulator::rank(Value x) const {
  const auto& entries = sorted_entries();
  auto it = std::upper_bound(entries.begin(), entries.end(), x,
                             [](Value v, const auto& e) { return v < e.first; });
  if (it == entries.begin()) return 0.0;
  return cumulative_[static_cast<std::size_t>(it - entries.begin()) - 1];
}

// ---------------------------------------------------------------------------
// SignedAccumulator and the accumulate entry points

double SignedAccumulator::total_weight() const {
  double t = positive ? positive->total_weight() : 0.0;
  if (negative) t -= negative->total_weight();
  return t;
}

double SignedAccumulator::frequency(Value x) const {
  double f = positive ? positive->frequency(x) : 0.0;
  if (negative) f -= negative->frequency(x);
  return f;
}

double SignedAccumulator::rank(Value x) const {
  double r = positive ? positive->rank(x) : 0.0;
  if (negative) r -= negative->rank(x);
  return r;
}

namespace {

SignedAccumulator accumulate_terms(
    const std::vector<std::pair<std::int64_t, int>>& signed_segments,
    const SummaryStore& store, AccumulatorKind kind, std::int64_t capacity,
    std::uint64_t seed) {
  SignedAccumulator acc;
  acc.positive = make_accumulator(kind, capacity, derive_seed(seed, 1));
  bool any_negative = false;
  for (const auto& [id, coeff] : signed_segments) {
    if (coeff < 0) any_negative = true;
  }
  if (any_negative) acc.negative = make_accumulator(kind, capacity, derive_seed(seed, 2));

  for (const auto& [id, coeff] : signed_segments) {
    if (id < 0 || id >= static_cast<std::int64_t>(store.summaries.size())) {
      throw std::out_of_range("missing summary for segment");
    }
    Accumulator& target = coeff >= 0 ? *acc.positive : *acc.negative;
    for (const auto& [v, w] : store.summaries[static_cast<std::size_t>(id)].entries) {
      target.add(v, w);
    }
  }
  return acc;
}

}  // namespace

SignedAccumulator accumulate(const IntervalPlan& plan, const SummaryStore& store,
                             AccumulatorKind kind, std::int64_t capacity,
                             std::uint64_t seed) {
  const std::int64_t k_t = store.config.max_interval;
  std::vector<std::pair<std::int64_t, int>> signed_segments;
  for (const auto& term : plan.terms) {
    std::int64_t start = term.prefix / k_t * k_t;
    for (std::int64_t i = start; i <= term.prefix; ++i) {
      signed_segments.emplace_back(i, term.coefficient);
    }
  }
  return accumulate_terms(signed_segments, store, kind, capacity, seed);
}

SignedAccumulator accumulate(const std::vector<std::int64_t>& segment_ids,
                             const SummaryStore& store, AccumulatorKind kind,
                             std::int64_t capacity, std::uint64_t seed) {
  std::vector<std::pair<std::int64_t, int>> signed_segments;
  signed_segments.reserve(segment_ids.size());
  for (std::int64_t id : segment_ids) signed_segments.emplace_back(id, +1);
  return accumulate_terms(signed_segments, store, kind, capacity, seed);
}

Value quantile(const SignedAccumulator& acc, double q) {
  if (q < 0.0 || q > 1.0) throw std::invalid_argument("quantile position must be in [0, 1]");
  const auto& pos = acc.positive->sorted_entries();
  static const std::vector<std::pair<Value, double>> kEmpty;
  const auto& neg = acc.negative ? acc.negative->sorted_entries() : kEmpty;
  if (pos.empty() && neg.empty()) throw std::runtime_error("empty accumulator");

  const double target = q * acc.total_weight();
  double cum = 0.0;
  std::size_t i = 0, j = 0;
  Value last = 0;
  bool have_last = false;
  while (i < pos.size() || j < neg.size()) {
    Value v;
    if (j == neg.size() || (i < pos.size() && pos[i].first <= neg[j].first)) {
      v = pos[i].first;
    } else {
      v = neg[j].first;
    }
    while (i < pos.size() && pos[i].first == v) cum += pos[i++].second;
    while (j < neg.size() && neg[j].first == v) cum -= neg[j++].second;
    last = v;
    have_last = true;
    if (cum >= target) return v;
  }
  if (!have_last) throw std::runtime_error("empty accumulator");
  return last;  // q at (or within rounding of) the full weight
}

std::vector<std::pair<Value, double>> heavy_hitters(const SignedAccumulator& acc,
                                                    std::int64_t top_k) {
  if (top_k < 1) throw std::invalid_argument("top_k must be >= 1");
  std::map<Value, double> net;
  for (const auto& [v, w] : acc.positive->sorted_entries()) net[v] += w;
  if (acc.negative) {
    for (const auto& [v, w] : acc.negative->sorted_entries()) net[v] -= w;
  }
  std::vector<std::pair<Value, double>> items(net.begin(), net.end());
  std::sort(items.begin(), items.end(), [](const auto& a, const auto& b) {
    if (a.second != b.second) return a.second > b.second;
    return a.first < b.first;
  });
  if (static_cast<std::int64_t>(items.size()) > top_k) {
    items.resize(static_cast<std::size_t>(top_k));
  }
  return items;
}

std::vector<std::int64_t> select_cube_segments(
    const std::vector<std::pair<std::size_t, Value>>& filters,
    const std::vector<SegmentKey>& keys) {
  std::vector<std::int64_t> out;
  for (std::size_t i = 0; i < keys.size(); ++i) {
    bool match = true;
    for (const auto& [dim, value] : filters) {
      if (dim >= keys[i].size()) throw std::out_of_range("unknown dimension index");
      if (keys[i][dim] != value) {
        match = false;
        break;
      }
    }
    if (match) out.push_back(static_cast<std::int64_t>(i));
  }
  return out;
}

}  // namespace preagg
