#include "preagg/model.hpp"

#include <algorithm>
#include <stdexcept>

namespace preagg {

QueryKind query_kind_from_string(const std::string& s) {
  if (s == "frequency") return QueryKind::frequency;
  if (s == "rank") return QueryKind::rank;
  throw std::invalid_argument("unknown query kind: " + s);
}

std::string to_string(QueryKind k) {
  return k == QueryKind::frequency ? "frequency" : "rank";
}

SummaryMethod summary_method_from_string(const std::string& s) {
  if (s == "exact") return SummaryMethod::exact;
  if (s == "coop-freq") return SummaryMethod::coop_freq;
  if (s == "coop-quant") return SummaryMethod::coop_quant;
  if (s == "pps") return SummaryMethod::pps;
  if (s == "truncation") return SummaryMethod::truncation;
  if (s == "usample") return SummaryMethod::usample;
  throw std::invalid_argument("unknown summary method: " + s);
}

std::string to_string(SummaryMethod m) {
  switch (m) {
    case SummaryMethod::exact: return "exact";
    case SummaryMethod::coop_freq: return "coop-freq";
    case SummaryMethod::coop_quant: return "coop-quant";
    case SummaryMethod::pps: return "pps";
    case SummaryMethod::truncation: return "truncation";
    case SummaryMethod::usample: return "usample";
  }
  throw std::logic_error("bad SummaryMethod");
}

Segment Segment::from_counts(std::vector<std::pair<Value, std::int64_t>> counts) {
  std::sort(counts.begin(), counts.end());
  Segment seg;
  seg.entries_.reserve(counts.size());
  for (const auto& [v, c] : counts) {
    if (c < 0) throw std::invalid_argument("negative count in segment");
    if (c == 0) continue;
    if (!seg.entries_.empty() && seg.entries_.back().first == v) {
      seg.entries_.back().second += c;
    } else {
      seg.entries_.emplace_back(v, c);
    }
  }
  seg.cumulative_.reserve(seg.entries_.size());
  std::int64_t running = 0;
  for (const auto& [v, c] : seg.entries_) {
    running += c;
    seg.cumulative_.push_back(running);
  }
  seg.total_weight_ = running;
  return seg;
}

Segment Segment::from_values(const std::vector<Value>& values) {
  std::vector<std::pair<Value, std::int64_t>> counts;
  counts.reserve(values.size());
  for (Value v : values) counts.emplace_back(v, 1);
  return from_counts(std::move(counts));
}

std::int64_t Segment::frequency(Value x) const {
  auto it = std::lower_bound(entries_.begin(), entries_.end(), x,
                             [](const auto& e, Value v) { return e.first < v; });
  if (it == entries_.end() || it->first != x) return 0;
  return it->second;
}

std::int64_t Segment::rank(Value x) const {
  auto it = std::upper_bound(entries_.begin(), entries_.end(), x,
                             [](Value v, const auto& e) { return v < e.first; });
  if (it == entries_.begin()) return 0;
  return cumulative_[static_cast<std::size_t>(it - entries_.begin()) - 1];
}

double Summary::frequency(Value x) const {
  auto lo = std::lower_bound(entries.begin(), entries.end(), x,
                             [](const auto& e, Value v) { return e.first < v; });
  double total = 0.0;
  for (auto it = lo; it != entries.end() && it->first == x; ++it) total += it->second;
  return total;
}

double Summary::rank(Value x) const {
  double total = 0.0;
  for (const auto& [v, w] : entries) {
    if (v > x) break;
    total += w;
  }
  return total;
}

double Summary::total_weight() const {
  double total = 0.0;
  for (const auto& [v, w] : entries) total += w;
  return total;
}

void Summary::sort_entries() {
  std::sort(entries.begin(), entries.end());
}

Summary exact_summarize(const Segment& segment) {
  Summary s;
  s.method = SummaryMethod::exact;
  s.size_budget = static_cast<std::int64_t>(segment.distinct());
  s.entries.reserve(segment.distinct());
  for (const auto& [v, c] : segment.entries()) {
    s.entries.emplace_back(v, static_cast<double>(c));
  }
  return s;
}

double eval(const Summary& s, QueryKind kind, Value x) {
  return kind == QueryKind::frequency ? s.frequency(x) : s.rank(x);
}

std::int64_t eval(const Segment& s, QueryKind kind, Value x) {
  return kind == QueryKind::frequency ? s.frequency(x) : s.rank(x);
}

}  // namespace preagg
