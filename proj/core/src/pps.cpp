#include "preagg/pps.hpp"

#include <algorithm>
#include <cmath>
#include <queue>
#include <stdexcept>

namespace preagg {

namespace {

// Shared CalcT loop over already-reduced weights. Heavy hitters are peeled
// strictly above the running threshold, at most s-1 of them.
double calc_threshold(const std::vector<double>& weights, std::int64_t s) {
  double remaining = 0.0;
  for (double w : weights) remaining += w;
  double h = remaining / static_cast<double>(s);

  struct Entry {
    double weight;
    std::int64_t index;
    bool operator<(const Entry& other) const {
      if (weight != other.weight) return weight < other.weight;
      return index > other.index;
    }
  };
  std::priority_queue<Entry> heap;
  for (std::size_t i = 0; i < weights.size(); ++i) {
    heap.push({weights[i], static_cast<std::int64_t>(i)});
  }
  std::int64_t n_heavy = 0;
  while (!heap.empty() && n_heavy < s - 1 && heap.top().weight > h) {
    remaining -= heap.top().weight;
    heap.pop();
    ++n_heavy;
    h = remaining / static_cast<double>(s - n_heavy);
  }
  return h;
}

}  // namespace

double calc_t(const Segment& segment, std::int64_t s) {
  if (s < 1) throw std::invalid_argument("calc_t requires s >= 1");
  std::vector<double> weights;
  weights.reserve(segment.distinct());
  for (const auto& [v, c] : segment.entries()) {
    weights.push_back(static_cast<double>(c));
  }
  return calc_threshold(weights, s);
}

void pair_agg(double& p_i, double& p_j, Rng& rng) {
  double sum = p_i + p_j;
  if (sum < 1.0) {
    if (rng.next_double() < p_i / sum) {
      p_i = sum;
      p_j = 0.0;
    } else {
      p_j = sum;
      p_i = 0.0;
    }
  } else {
    if (rng.next_double() < (1.0 - p_j) / (2.0 - sum)) {
      p_i = 1.0;
      p_j = sum - 1.0;
    } else {
      p_i = sum - 1.0;
      p_j = 1.0;
    }
  }
}

PpsPlan pps_plan(const Segment& segment, std::int64_t s, double bias) {
  if (s < 1) throw std::invalid_argument("pps requires s >= 1");
  if (bias < 0.0) throw std::invalid_argument("bias must be >= 0");
  PpsPlan plan;
  plan.bias = bias;

  // Values with count <= b are dropped deterministically; the rest keep
  // their reduced weight (count - b)+.
  std::vector<Value> values;
  std::vector<double> weights;
  values.reserve(segment.distinct());
  weights.reserve(segment.distinct());
  for (const auto& [v, c] : segment.entries()) {
    double w = static_cast<double>(c) - bias;
    if (w <= 0.0) continue;
    values.push_back(v);
    weights.push_back(w);
  }
  if (values.empty()) return plan;

  double h = calc_threshold(weights, s);
  plan.threshold = h;
  plan.probabilities.reserve(values.size());
  for (std::size_t i = 0; i < values.size(); ++i) {
    double p = h > 0.0 ? std::min(1.0, weights[i] / h) : 1.0;
    plan.probabilities.emplace_back(values[i], p);
  }
  return plan;
}

Summary pps_summarize(const Segment& segment, std::int64_t s, double bias, Rng& rng) {
  PpsPlan plan = pps_plan(segment, s, bias);

  Summary out;
  out.method = SummaryMethod::pps;
  out.size_budget = s;
  out.threshold = plan.threshold;
  out.bias = bias;
  if (plan.probabilities.empty()) return out;

  const double h = plan.threshold;
  std::vector<double> probs;
  probs.reserve(plan.probabilities.size());
  for (const auto& [v, p] : plan.probabilities) probs.push_back(p);

  constexpr double kSettledEps = 1e-9;
  auto fractional = [&](double p) { return p > kSettledEps && p < 1.0 - kSettledEps; };

  // Two-pointer pass in value order: the carrier is the one unsettled
  // probability so far; every pair_agg settles at least one of the pair.
  constexpr std::size_t kNone = static_cast<std::size_t>(-1);
  std::size_t carrier = kNone;
  for (std::size_t i = 0; i < probs.size(); ++i) {
    if (!fractional(probs[i])) continue;
    if (carrier == kNone) {
      carrier = i;
      continue;
    }
    pair_agg(probs[carrier], probs[i], rng);
    if (fractional(probs[carrier])) {
      // carrier survives
    } else if (fractional(probs[i])) {
      carrier = i;
    } else {
      carrier = kNone;
    }
  }
  if (carrier != kNone) {
    // Leftover fractional mass (non-integral total probability): one
    // Bernoulli draw, giving size s-1 on failure.
    probs[carrier] = rng.bernoulli(probs[carrier]) ? 1.0 : 0.0;
  }

  for (std::size_t i = 0; i < probs.size(); ++i) {
    if (probs[i] < 0.5) continue;
    Value v = plan.probabilities[i].first;
    double reduced = static_cast<double>(segment.frequency(v)) - bias;
    double weight = reduced > h ? reduced + bias : h + bias;
    out.entries.emplace_back(v, weight);
  }
  out.sort_entries();
  return out;
}

}  // namespace preagg
