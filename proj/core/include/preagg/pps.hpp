#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "preagg/model.hpp"
#include "preagg/rng.hpp"

namespace preagg {

/// Minimal sampling threshold h <= |D|/s: local heavy hitters are peeled off
/// one at a time (largest count first, ties by value id) and the threshold
/// recomputed over the remainder, so that storing heavy hitters exactly and
/// sampling the rest at rate 1/h yields expected size <= s. The peeling is
/// capped at s-1 heavy hitters.
double calc_t(const Segment& segment, std::int64_t s);

/// One pair-aggregation step: moves probability mass between p_i and p_j so
/// that at least one lands on 0 or 1, the sum is conserved exactly, and each
/// output's expectation equals its input.
void pair_agg(double& p_i, double& p_j, Rng& rng);

struct PpsPlan {
  double threshold = 0.0;                              // h over reduced counts
  double bias = 0.0;                                   // b
  std::vector<std::pair<Value, double>> probabilities; // p_i = min(1, n_i[b]/h)
};

PpsPlan pps_plan(const Segment& segment, std::int64_t s, double bias);

/// Probability-proportional-to-size summary of size s or s-1.
/// Counts are first reduced by the bias ((count - b)+, dropping values with
/// count <= b); included light values get proxy weight h+b, included heavy
/// values their exact reduced count + b. Unbiased for b=0 with per-draw
/// frequency and rank error both bounded by h.
Summary pps_summarize(const Segment& segment, std::int64_t s, double bias, Rng& rng);

inline Summary pps_summarize(const Segment& segment, std::int64_t s, double bias,
                             std::uint64_t seed) {
  Rng rng(seed);
  return pps_summarize(segment, s, bias, rng);
}

}  // namespace preagg
