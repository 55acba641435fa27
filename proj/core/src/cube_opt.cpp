#include "preagg/cube_opt.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <stdexcept>

#include <json.hpp>

#include "preagg/baselines.hpp"
#include "preagg/pps.hpp"
#include "preagg/query.hpp"
#include "preagg/rng.hpp"

namespace preagg {

void WorkloadSpec::validate() const {
  if (dim_probability < 0.0 || dim_probability > 1.0) {
    throw std::invalid_argument("dimension probability must be in [0, 1]");
  }
  for (const auto& [dim, p] : per_dim) {
    if (p < 0.0 || p > 1.0) {
      throw std::invalid_argument("dimension probability must be in [0, 1]: " + dim);
    }
  }
  if (samples < 1) throw std::invalid_argument("workload sample count must be >= 1");
}

WorkloadSpec load_workload_spec(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open workload spec: " + path);
  nlohmann::json j;
  in >> j;
  WorkloadSpec spec;
  if (j.contains("p")) spec.dim_probability = j["p"].get<double>();
  if (j.contains("N")) spec.samples = j["N"].get<std::int64_t>();
  if (j.contains("seed")) spec.seed = j["seed"].get<std::uint64_t>();
  if (j.contains("per_dim")) {
    for (const auto& [dim, p] : j["per_dim"].items()) {
      spec.per_dim[dim] = p.get<double>();
    }
  }
  spec.validate();
  return spec;
}

void save_workload_spec(const WorkloadSpec& spec, const std::string& path) {
  nlohmann::json j;
  j["p"] = spec.dim_probability;
  j["N"] = spec.samples;
  j["seed"] = spec.seed;
  if (!spec.per_dim.empty()) {
    nlohmann::json per;
    for (const auto& [dim, p] : spec.per_dim) per[dim] = p;
    j["per_dim"] = per;
  }
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write workload spec: " + path);
  out << j.dump(2) << '\n';
}

WorkloadSample sample_workload(const WorkloadSpec& spec, const SegmentStore& store) {
  spec.validate();
  if (store.config.mode != Mode::cube) {
    throw std::invalid_argument("workload sampling requires a cube store");
  }
  const std::size_t n_dims = store.config.dims.size();
  std::vector<double> dim_p(n_dims, spec.dim_probability);
  for (std::size_t d = 0; d < n_dims; ++d) {
    auto it = spec.per_dim.find(store.config.dims[d]);
    if (it != spec.per_dim.end()) dim_p[d] = it->second;
  }

  Rng rng(spec.seed);
  constexpr int kMaxRetries = 100;
  std::map<CubeFilters, std::int64_t> multiplicities;
  std::int64_t dropped = 0;

  for (std::int64_t draw = 0; draw < spec.samples; ++draw) {
    bool matched = false;
    for (int attempt = 0; attempt < kMaxRetries && !matched; ++attempt) {
      CubeFilters filters;
      for (std::size_t d = 0; d < n_dims; ++d) {
        if (rng.next_double() < dim_p[d]) {
          const auto& dict = store.dim_dicts[d];
          Value v = static_cast<Value>(rng.next_below(dict.size()));
          filters.emplace_back(d, v);
        }
      }
      // cheap existence probe before committing the draw
      bool any = false;
      for (const auto& key : store.keys) {
        bool ok = true;
        for (const auto& [d, v] : filters) {
          if (key[d] != v) {
            ok = false;
            break;
          }
        }
        if (ok) {
          any = true;
          break;
        }
      }
      if (any) {
        ++multiplicities[filters];
        matched = true;
      }
    }
    if (!matched) ++dropped;
  }

  WorkloadSample sample;
  sample.requested = spec.samples;
  sample.dropped = dropped;
  sample.queries.reserve(multiplicities.size());
  for (const auto& [filters, mult] : multiplicities) {
    SampledQuery q;
    q.filters = filters;
    q.multiplicity = mult;
    q.segments = select_cube_segments(filters, store.keys);
    for (std::int64_t id : q.segments) {
      q.total_weight += store.segments[static_cast<std::size_t>(id)].total_weight();
    }
    sample.queries.push_back(std::move(q));
  }
  return sample;
}

std::vector<double> allocation_scores(const SegmentStore& store, const WorkloadSample& sample) {
  if (sample.queries.empty()) throw std::invalid_argument("empty workload sample");
  std::vector<double> scores(store.size(), 0.0);
  for (const auto& q : sample.queries) {
    if (q.total_weight <= 0) continue;
    double contribution = sample.probability(q) /
                          (static_cast<double>(q.total_weight) * static_cast<double>(q.total_weight));
    for (std::int64_t id : q.segments) {
      scores[static_cast<std::size_t>(id)] += contribution;
    }
  }
  for (std::size_t i = 0; i < store.size(); ++i) {
    double n = static_cast<double>(store.segments[i].total_weight());
    scores[i] *= n * n;
  }
  return scores;
}

std::vector<double> allocate_real_budget(const std::vector<double>& weights,
                                         std::int64_t total_space, std::int64_t s_min) {
  const std::size_t n = weights.size();
  if (n == 0) return {};
  if (s_min < 0) throw std::invalid_argument("s_min must be >= 0");
  if (total_space < s_min * static_cast<std::int64_t>(n)) {
    throw std::invalid_argument("infeasible budget: s_min * segments exceeds total space");
  }

  std::vector<double> sizes(n, 0.0);
  std::vector<bool> clamped(n, false);
  while (true) {
    double free_weight = 0.0;
    std::int64_t clamped_count = 0;
    for (std::size_t i = 0; i < n; ++i) {
      if (clamped[i]) {
        ++clamped_count;
      } else {
        free_weight += weights[i];
      }
    }
    double budget = static_cast<double>(total_space) -
                    static_cast<double>(s_min) * static_cast<double>(clamped_count);
    bool all_zero = free_weight <= 0.0;
    bool changed = false;
    for (std::size_t i = 0; i < n; ++i) {
      if (clamped[i]) {
        sizes[i] = static_cast<double>(s_min);
        continue;
      }
      double share = all_zero ? budget / static_cast<double>(n - clamped_count)
                              : budget * weights[i] / free_weight;
      if (share < static_cast<double>(s_min)) {
        clamped[i] = true;
        changed = true;
      } else {
        sizes[i] = share;
      }
    }
    if (!changed) break;
  }
  return sizes;
}

std::vector<std::int64_t> allocate_integer_budget(const std::vector<double>& weights,
                                                  std::int64_t total_space, std::int64_t s_min) {
  std::vector<double> real = allocate_real_budget(weights, total_space, s_min);
  const std::size_t n = real.size();
  std::vector<std::int64_t> sizes(n, 0);
  std::vector<std::pair<double, std::size_t>> remainders;
  remainders.reserve(n);
  std::int64_t assigned = 0;
  for (std::size_t i = 0; i < n; ++i) {
    double fl = std::floor(real[i]);
    sizes[i] = static_cast<std::int64_t>(fl);
    assigned += sizes[i];
    remainders.emplace_back(real[i] - fl, i);
  }
  std::int64_t leftover = total_space - assigned;
  // largest remainder first; ties by index for determinism
  std::sort(remainders.begin(), remainders.end(), [](const auto& a, const auto& b) {
    if (a.first != b.first) return a.first > b.first;
    return a.second < b.second;
  });
  for (std::int64_t j = 0; j < leftover && j < static_cast<std::int64_t>(n); ++j) {
    sizes[remainders[static_cast<std::size_t>(j)].second] += 1;
  }
  return sizes;
}

std::vector<std::int64_t> allocate_sizes(const std::vector<double>& scores,
                                         std::int64_t total_space, std::int64_t s_min) {
  std::vector<double> weights(scores.size());
  for (std::size_t i = 0; i < scores.size(); ++i) {
    weights[i] = std::cbrt(std::max(0.0, scores[i]));
  }
  return allocate_integer_budget(weights, total_space, s_min);
}

std::vector<std::int64_t> strat_allocate(const std::vector<double>& scores,
                                         std::int64_t total_space, std::int64_t s_min) {
  std::vector<double> weights(scores.size());
  for (std::size_t i = 0; i < scores.size(); ++i) {
    weights[i] = std::sqrt(std::max(0.0, scores[i]));
  }
  return allocate_integer_budget(weights, total_space, s_min);
}

double effective_weight(const Segment& segment, double b) {
  if (b < 0.0) throw std::invalid_argument("bias must be >= 0");
  double total = 0.0;
  for (const auto& [v, c] : segment.entries()) {
    double r = static_cast<double>(c) - b;
    if (r > 0.0) total += r;
  }
  return total;
}

namespace {

// Per-segment view of n[b]: piecewise linear between the distinct counts,
// with suffix mass/count at each breakpoint.
struct BiasProfile {
  std::vector<double> breakpoints;        // distinct counts, ascending
  std::vector<double> mass_at_least;      // sum of counts >= breakpoints[j]
  std::vector<std::int64_t> count_at_least;
  double max_count = 0.0;

  void build(const Segment& segment) {
    std::vector<double> counts;
    counts.reserve(segment.distinct());
    for (const auto& [v, c] : segment.entries()) counts.push_back(static_cast<double>(c));
    std::sort(counts.begin(), counts.end());
    max_count = counts.empty() ? 0.0 : counts.back();

    breakpoints.clear();
    mass_at_least.clear();
    count_at_least.clear();
    double mass = 0.0;
    std::int64_t n = 0;
    for (std::size_t i = counts.size(); i-- > 0;) {
      mass += counts[i];
      ++n;
      if (i == 0 || counts[i - 1] != counts[i]) {
        breakpoints.push_back(counts[i]);
        mass_at_least.push_back(mass);
        count_at_least.push_back(n);
      }
    }
    std::reverse(breakpoints.begin(), breakpoints.end());
    std::reverse(mass_at_least.begin(), mass_at_least.end());
    std::reverse(count_at_least.begin(), count_at_least.end());
  }

  // index of the first breakpoint strictly above b (== breakpoints.size()
  // when none); {c > b} is exactly {c >= breakpoints[j]}
  std::size_t piece(double b) const {
    auto it = std::upper_bound(breakpoints.begin(), breakpoints.end(), b);
    return static_cast<std::size_t>(it - breakpoints.begin());
  }
  std::int64_t above(double b) const {
    std::size_t j = piece(b);
    return j == breakpoints.size() ? 0 : count_at_least[j];
  }
  double weight(double b) const {
    std::size_t j = piece(b);
    if (j == breakpoints.size()) return 0.0;
    return mass_at_least[j] - b * static_cast<double>(count_at_least[j]);
  }
};

// Exact minimizer of (rest + b)^2 + (S - c b)^2 / (4 s^2) over [lo, hi].
double quadratic_piece_min(double rest, double s, double mass, double cnt, double lo,
                           double hi) {
  double denom = 1.0 + cnt * cnt / (4.0 * s * s);
  double b = (cnt * mass / (4.0 * s * s) - rest) / denom;
  return std::clamp(b, lo, hi);
}

}  // namespace

double bias_objective(const SegmentStore& store, const std::vector<std::int64_t>& sizes,
                      const std::vector<double>& biases) {
  if (sizes.size() != store.size() || biases.size() != store.size()) {
    throw std::invalid_argument("sizes/biases length mismatch");
  }
  double bias_sum = 0.0;
  double variance = 0.0;
  for (std::size_t i = 0; i < store.size(); ++i) {
    if (sizes[i] <= 0) continue;
    bias_sum += biases[i];
    double nb = effective_weight(store.segments[i], biases[i]);
    double s = static_cast<double>(sizes[i]);
    variance += nb * nb / (4.0 * s * s);
  }
  return bias_sum * bias_sum + variance;
}

BiasResult optimize_biases(const SegmentStore& store, const std::vector<std::int64_t>& sizes) {
  const std::size_t n = store.size();
  if (sizes.size() != n) throw std::invalid_argument("sizes length mismatch");

  BiasResult result;
  result.biases.assign(n, 0.0);
  if (store.config.query_kind == QueryKind::rank) {
    // bias tuning does not carry over to rank estimates
    result.objective = bias_objective(store, sizes, result.biases);
    result.converged = true;
    return result;
  }

  std::vector<BiasProfile> profiles(n);
  std::vector<std::size_t> active;  // segments that participate (s_i >= 1)
  for (std::size_t i = 0; i < n; ++i) {
    profiles[i].build(store.segments[i]);
    if (sizes[i] > 0 && !profiles[i].breakpoints.empty()) active.push_back(i);
  }

  auto objective = [&](const std::vector<double>& b) {
    double bias_sum = 0.0;
    double variance = 0.0;
    for (std::size_t i : active) {
      bias_sum += b[i];
      double nb = profiles[i].weight(b[i]);
      double s = static_cast<double>(sizes[i]);
      variance += nb * nb / (4.0 * s * s);
    }
    return bias_sum * bias_sum + variance;
  };

  std::vector<double> b(n, 0.0);
  double current = objective(b);
  constexpr int kMaxIterations = 500;
  constexpr double kTolerance = 1e-6;
  double step = 1.0;
  int iter = 0;
  bool converged = false;

  std::vector<double> gradient(n, 0.0);
  std::vector<double> candidate(n, 0.0);
  for (; iter < kMaxIterations; ++iter) {
    double bias_sum = 0.0;
    for (std::size_t i : active) bias_sum += b[i];
    double gnorm2 = 0.0;
    for (std::size_t i : active) {
      double s = static_cast<double>(sizes[i]);
      gradient[i] = 2.0 * bias_sum -
                    profiles[i].weight(b[i]) * static_cast<double>(profiles[i].above(b[i])) /
                        (2.0 * s * s);
      gnorm2 += gradient[i] * gradient[i];
    }
    if (gnorm2 == 0.0) {
      converged = true;
      break;
    }

    // projected backtracking line search
    step *= 2.0;
    double next = current;
    while (true) {
      for (std::size_t i : active) {
        candidate[i] = std::clamp(b[i] - step * gradient[i], 0.0, profiles[i].max_count);
      }
      next = objective(candidate);
      if (next <= current || step < 1e-14) break;
      step *= 0.5;
    }
    if (next > current) break;  // no descent direction left at float resolution

    double improvement = current - next;
    for (std::size_t i : active) b[i] = candidate[i];
    current = next;
    if (improvement <= kTolerance * std::max(1.0, std::abs(current))) {
      converged = true;
      break;
    }
  }

  // Coordinate polish: n[b] is piecewise linear, so the one-dimensional
  // subproblem is an exact min over a few quadratic pieces. This pins the
  // solution to coordinate-wise optimality instead of stopping at the
  // gradient tolerance.
  double bias_sum = 0.0;
  for (std::size_t i : active) bias_sum += b[i];
  for (int sweep = 0; sweep < 60; ++sweep) {
    double before = current;
    for (std::size_t i : active) {
      const BiasProfile& profile = profiles[i];
      const double s = static_cast<double>(sizes[i]);
      const double rest = bias_sum - b[i];
      double best_b = b[i];
      double nb = profile.weight(b[i]);
      double best_val = (rest + b[i]) * (rest + b[i]) + nb * nb / (4.0 * s * s);
      double lo = 0.0;
      for (std::size_t j = 0; j <= profile.breakpoints.size(); ++j) {
        double hi;
        double mass, cnt;
        if (j < profile.breakpoints.size()) {
          hi = profile.breakpoints[j];
          mass = profile.mass_at_least[j];
          cnt = static_cast<double>(profile.count_at_least[j]);
        } else {
          break;  // n[b] = 0 beyond the largest count and bias only grows J
        }
        double cand = quadratic_piece_min(rest, s, mass, cnt, lo, hi);
        double w = mass - cand * cnt;
        double j_val = (rest + cand) * (rest + cand) + w * w / (4.0 * s * s);
        if (j_val < best_val) {
          best_val = j_val;
          best_b = cand;
        }
        lo = hi;
      }
      if (best_b != b[i]) {
        bias_sum += best_b - b[i];
        b[i] = best_b;
      }
    }
    current = objective(b);
    if (before - current <= 1e-14 * std::max(1.0, before)) {
      converged = true;
      break;
    }
  }

  result.biases = std::move(b);
  // report the objective through the same path the oracle tests use
  result.objective = bias_objective(store, sizes, result.biases);
  result.converged = converged;
  result.iterations = iter;
  return result;
}

SummaryStore build_cube(const SegmentStore& store, const CubeBuildOptions& options) {
  if (store.config.mode != Mode::cube) {
    throw std::invalid_argument("build_cube requires a cube store");
  }
  const std::int64_t n = static_cast<std::int64_t>(store.size());
  if (n == 0) throw std::invalid_argument("empty segment store");
  if (options.total_space < options.s_min * n) {
    throw std::invalid_argument("infeasible budget: s_min * segments exceeds total space");
  }

  std::vector<double> scores(store.size(), 0.0);
  std::vector<std::int64_t> sizes;
  switch (options.alloc) {
    case CubeBuildOptions::Alloc::equal: {
      std::vector<double> ones(store.size(), 1.0);
      sizes = allocate_integer_budget(ones, options.total_space, options.s_min);
      break;
    }
    case CubeBuildOptions::Alloc::proportional: {
      std::vector<std::int64_t> weights(store.size());
      for (std::size_t i = 0; i < store.size(); ++i) {
        weights[i] = store.segments[i].total_weight();
      }
      sizes = prop_allocate(weights, options.total_space, options.s_min);
      break;
    }
    case CubeBuildOptions::Alloc::optimized:
    case CubeBuildOptions::Alloc::strat: {
      WorkloadSample sample = sample_workload(options.workload, store);
      scores = allocation_scores(store, sample);
      sizes = options.alloc == CubeBuildOptions::Alloc::optimized
                  ? allocate_sizes(scores, options.total_space, options.s_min)
                  : strat_allocate(scores, options.total_space, options.s_min);
      break;
    }
  }

  std::vector<double> biases(store.size(), 0.0);
  if (options.bias && store.config.query_kind == QueryKind::frequency &&
      options.sampler == CubeBuildOptions::Sampler::pps) {
    biases = optimize_biases(store, sizes).biases;
  }

  SummaryStore out;
  out.config = store.config;
  out.config.total_space = options.total_space;
  out.config.min_summary_size = options.s_min;
  out.config.seed = options.seed;
  out.base_index = store.base_index;
  out.keys = store.keys;
  out.value_dict = store.value_dict;
  out.dim_dicts = store.dim_dicts;
  out.allocation_scores = scores;
  out.allocated_sizes = sizes;
  out.allocated_biases = biases;

  out.summaries.reserve(store.size());
  for (std::size_t i = 0; i < store.size(); ++i) {
    std::int64_t s = sizes[i];
    Rng rng(derive_seed(options.seed, i));
    Summary summary;
    if (s < 1) {
      summary.size_budget = s;
      summary.method = SummaryMethod::pps;
      summary.bias = biases[i];
    } else {
      switch (options.sampler) {
        case CubeBuildOptions::Sampler::pps:
          summary = pps_summarize(store.segments[i], s, biases[i], rng);
          break;
        case CubeBuildOptions::Sampler::usample:
          summary = usample_summarize(store.segments[i], s, rng);
          break;
        case CubeBuildOptions::Sampler::truncation:
          summary = truncation_summarize(store.segments[i], s, store.config.query_kind);
          break;
      }
    }
    out.summaries.push_back(std::move(summary));
  }
  switch (options.sampler) {
    case CubeBuildOptions::Sampler::pps: out.method = "pps"; break;
    case CubeBuildOptions::Sampler::usample: out.method = "usample"; break;
    case CubeBuildOptions::Sampler::truncation: out.method = "truncation"; break;
  }
  return out;
}

}  // namespace preagg
