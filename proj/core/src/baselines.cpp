#include "preagg/baselines.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <unordered_set>

#include "preagg/cube_opt.hpp"

namespace preagg {

Summary truncation_summarize(const Segment& segment, std::int64_t s, QueryKind kind) {
  if (s < 1) throw std::invalid_argument("truncation requires s >= 1");
  Summary out;
  out.method = SummaryMethod::truncation;
  out.size_budget = s;
  if (segment.empty()) return out;
  out.threshold = static_cast<double>(segment.total_weight()) / static_cast<double>(s);

  if (kind == QueryKind::frequency) {
    std::vector<std::pair<Value, std::int64_t>> entries = segment.entries();
    std::sort(entries.begin(), entries.end(), [](const auto& a, const auto& b) {
      if (a.second != b.second) return a.second > b.second;
      return a.first < b.first;
    });
    if (static_cast<std::int64_t>(entries.size()) > s) {
      entries.resize(static_cast<std::size_t>(s));
    }
    for (const auto& [v, c] : entries) {
      out.entries.emplace_back(v, static_cast<double>(c));
    }
    out.sort_entries();
    return out;
  }

  // rank: representatives at cumulative weights h, 2h, ..., sh = |D|
  const double total = static_cast<double>(segment.total_weight());
  const double h = total / static_cast<double>(s);
  const auto& entries = segment.entries();
  std::size_t idx = 0;
  std::int64_t cum = entries.empty() ? 0 : entries[0].second;
  for (std::int64_t i = 1; i <= s; ++i) {
    double target = i == s ? total : h * static_cast<double>(i);
    while (static_cast<double>(cum) < target && idx + 1 < entries.size()) {
      ++idx;
      cum += entries[idx].second;
    }
    Value rep = entries[idx].first;
    if (!out.entries.empty() && out.entries.back().first == rep) {
      out.entries.back().second += h;
    } else {
      out.entries.emplace_back(rep, h);
    }
  }
  return out;
}

Summary usample_summarize(const Segment& segment, std::int64_t s, Rng& rng) {
  if (s < 1) throw std::invalid_argument("usample requires s >= 1");
  Summary out;
  out.method = SummaryMethod::usample;
  out.size_budget = s;
  if (segment.empty()) return out;

  const std::int64_t n = segment.total_weight();
  const std::int64_t draw = std::min(s, n);
  const double weight = static_cast<double>(n) / static_cast<double>(draw);

  // Floyd's algorithm: `draw` distinct record positions in [0, n)
  std::unordered_set<std::int64_t> positions;
  positions.reserve(static_cast<std::size_t>(draw) * 2);
  for (std::int64_t j = n - draw; j < n; ++j) {
    std::int64_t t = static_cast<std::int64_t>(rng.next_below(static_cast<std::uint64_t>(j + 1)));
    if (!positions.insert(t).second) positions.insert(j);
  }

  // map record positions to values through the cumulative counts
  std::vector<std::int64_t> sorted_positions(positions.begin(), positions.end());
  std::sort(sorted_positions.begin(), sorted_positions.end());
  const auto& entries = segment.entries();
  std::size_t idx = 0;
  std::int64_t cum = entries[0].second;
  for (std::int64_t pos : sorted_positions) {
    while (pos >= cum) {
      ++idx;
      cum += entries[idx].second;
    }
    Value v = entries[idx].first;
    if (!out.entries.empty() && out.entries.back().first == v) {
      out.entries.back().second += weight;
    } else {
      out.entries.emplace_back(v, weight);
    }
  }
  return out;
}

CountMinSketch::CountMinSketch(std::int64_t width, std::int64_t depth, std::uint64_t seed)
    : width_(width), depth_(depth) {
  if (width < 1 || depth < 1) throw std::invalid_argument("cms requires width, depth >= 1");
  std::uint64_t state = seed;
  row_mul_.reserve(static_cast<std::size_t>(depth));
  row_add_.reserve(static_cast<std::size_t>(depth));
  for (std::int64_t r = 0; r < depth; ++r) {
    row_mul_.push_back(splitmix64(state) | 1ULL);  // odd multiplier
    row_add_.push_back(splitmix64(state));
  }
  counters_.assign(static_cast<std::size_t>(width * depth), 0);
}

std::size_t CountMinSketch::cell(std::size_t row, Value x) const {
  std::uint64_t mixed = row_mul_[row] * static_cast<std::uint64_t>(x) + row_add_[row];
  std::uint64_t col = static_cast<std::uint64_t>(
      (static_cast<unsigned __int128>(mixed) * static_cast<std::uint64_t>(width_)) >> 64);
  return row * static_cast<std::size_t>(width_) + static_cast<std::size_t>(col);
}

void CountMinSketch::update(Value x, std::int64_t count) {
  if (count < 0) throw std::invalid_argument("cms counts must be non-negative");
  total_ += count;
  for (std::int64_t r = 0; r < depth_; ++r) {
    counters_[cell(static_cast<std::size_t>(r), x)] += count;
  }
}

std::int64_t CountMinSketch::query(Value x) const {
  std::int64_t best = std::numeric_limits<std::int64_t>::max();
  for (std::int64_t r = 0; r < depth_; ++r) {
    best = std::min(best, counters_[cell(static_cast<std::size_t>(r), x)]);
  }
  return best;
}

CmsStore cms_store_build(const SegmentStore& store, std::int64_t width, std::int64_t depth,
                         std::uint64_t seed) {
  CmsStore out;
  out.width = width;
  out.depth = depth;
  out.sketches.reserve(store.size());
  for (std::size_t i = 0; i < store.size(); ++i) {
    // One family of row hashes across segments keeps sketches mergeable.
    CountMinSketch sketch(width, depth, seed);
    for (const auto& [v, c] : store.segments[i].entries()) sketch.update(v, c);
    out.sketches.push_back(std::move(sketch));
  }
  return out;
}

std::int64_t HierarchyStore::total_entries() const {
  std::int64_t total = 0;
  for (const auto& layer : layers) {
    for (const auto& s : layer) total += static_cast<std::int64_t>(s.entries.size());
  }
  return total;
}

HierarchyStore hierarchy_build(const SegmentStore& store, std::int64_t s, std::int64_t base) {
  if (base < 2) throw std::invalid_argument("hierarchy base must be >= 2");
  HierarchyStore out;
  out.base = base;
  out.n_segments = static_cast<std::int64_t>(store.size());
  out.kind = store.config.query_kind;

  const std::int64_t k_t = store.config.max_interval;
  std::int64_t n_layers = 1;
  std::int64_t span = base;
  while (span < k_t) {
    span *= base;
    ++n_layers;
  }
  out.layer0_size = static_cast<double>(s) / static_cast<double>(n_layers);

  std::int64_t block = 1;
  for (std::int64_t layer = 0; layer < n_layers; ++layer) {
    std::int64_t layer_size = std::max<std::int64_t>(
        1, std::llround(out.layer0_size * static_cast<double>(block)));
    std::vector<Summary> summaries;
    std::int64_t n_blocks = (out.n_segments + block - 1) / block;
    summaries.reserve(static_cast<std::size_t>(n_blocks));
    for (std::int64_t b = 0; b < n_blocks; ++b) {
      std::int64_t lo = b * block;
      std::int64_t hi = std::min(out.n_segments, lo + block);
      std::vector<std::pair<Value, std::int64_t>> merged;
      for (std::int64_t i = lo; i < hi; ++i) {
        const auto& entries = store.segments[static_cast<std::size_t>(i)].entries();
        merged.insert(merged.end(), entries.begin(), entries.end());
      }
      summaries.push_back(
          truncation_summarize(Segment::from_counts(std::move(merged)), layer_size, out.kind));
    }
    out.layers.push_back(std::move(summaries));
    block *= base;
  }
  return out;
}

std::vector<HierarchyBlock> hierarchy_plan(const HierarchyStore& store, std::int64_t first,
                                           std::int64_t last) {
  if (first < 0 || last < first || last >= store.n_segments) {
    throw std::out_of_range("hierarchy plan outside the store");
  }
  std::vector<HierarchyBlock> blocks;
  std::int64_t pos = first;
  const std::int64_t end = last + 1;
  while (pos < end) {
    // largest aligned block that starts at pos and fits
    std::int64_t layer = 0;
    std::int64_t span = 1;
    while (layer + 1 < static_cast<std::int64_t>(store.n_layers())) {
      std::int64_t next_span = span * store.base;
      if (pos % next_span != 0 || pos + next_span > end) break;
      span = next_span;
      ++layer;
    }
    blocks.push_back({layer, pos / span});
    pos += span;
  }
  return blocks;
}

double hierarchy_estimate(const HierarchyStore& store, std::int64_t first, std::int64_t last,
                          QueryKind kind, Value x) {
  double total = 0.0;
  for (const auto& b : hierarchy_plan(store, first, last)) {
    total += eval(store.layers[static_cast<std::size_t>(b.layer)][static_cast<std::size_t>(b.block)],
                  kind, x);
  }
  return total;
}

std::vector<std::int64_t> prop_allocate(const std::vector<std::int64_t>& segment_weights,
                                        std::int64_t total_space, std::int64_t s_min) {
  std::vector<double> weights(segment_weights.size());
  for (std::size_t i = 0; i < segment_weights.size(); ++i) {
    weights[i] = static_cast<double>(segment_weights[i]);
  }
  return allocate_integer_budget(weights, total_space, s_min);
}

}  // namespace preagg
