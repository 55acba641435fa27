#include "preagg/bench.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <memory>
#include <numeric>
#include <stdexcept>
#include <unordered_map>
#include <unordered_set>

#include "preagg/baselines.hpp"
#include "preagg/pps.hpp"
#include "preagg/query.hpp"
#include "preagg/rng.hpp"

namespace preagg {

namespace {

double now_ms() {
  using namespace std::chrono;
  return duration<double, std::milli>(steady_clock::now().time_since_epoch()).count();
}

/// Cumulative zipf table; Pr(rank j) ~ j^-param over 1..universe.
class ZipfSampler {
 public:
  ZipfSampler(double param, std::int64_t universe) {
    cumulative_.reserve(static_cast<std::size_t>(universe));
    double run = 0.0;
    for (std::int64_t j = 1; j <= universe; ++j) {
      run += std::pow(static_cast<double>(j), -param);
      cumulative_.push_back(run);
    }
    total_ = run;
  }

  /// 0-based rank.
  std::int64_t draw(Rng& rng) const {
    double u = rng.next_double() * total_;
    auto it = std::lower_bound(cumulative_.begin(), cumulative_.end(), u);
    if (it == cumulative_.end()) --it;
    return it - cumulative_.begin();
  }

 private:
  std::vector<double> cumulative_;
  double total_ = 0.0;
};

std::string dim_token(std::int64_t id, std::int64_t cardinality) {
  int width = 1;
  for (std::int64_t c = 10; c < cardinality; c *= 10) ++width;
  std::string digits = std::to_string(id);
  return "v" + std::string(static_cast<std::size_t>(width) - std::min<std::size_t>(width, digits.size()), '0') + digits;
}

}  // namespace

double zipf_mass(std::int64_t rank, double param, std::int64_t universe) {
  double total = 0.0;
  for (std::int64_t j = 1; j <= universe; ++j) {
    total += std::pow(static_cast<double>(j), -param);
  }
  return std::pow(static_cast<double>(rank), -param) / total;
}

std::vector<Record> gen_synthetic(const SyntheticSpec& spec) {
  if (spec.n < 1) throw std::invalid_argument("synthetic stream needs n >= 1");
  Rng rng(spec.seed);
  std::vector<Record> records;
  records.reserve(static_cast<std::size_t>(spec.n));

  std::unique_ptr<ZipfSampler> value_sampler;
  if (spec.kind == SyntheticSpec::Kind::zipf) {
    value_sampler = std::make_unique<ZipfSampler>(spec.zipf_param, spec.universe);
  }
  std::unique_ptr<ZipfSampler> dim_sampler;
  if (spec.n_dims > 0) {
    dim_sampler = std::make_unique<ZipfSampler>(spec.dim_zipf, spec.dim_cardinality);
  }

  for (std::int64_t i = 0; i < spec.n; ++i) {
    Record r;
    if (spec.kind == SyntheticSpec::Kind::zipf) {
      std::int64_t rank = value_sampler->draw(rng);
      r.value = ordinal_value(static_cast<double>(rank + 1));
    } else {
      r.value = ordinal_value(rng.next_double());
    }
    r.time = i;
    if (spec.n_dims > 0) {
      r.dims.reserve(static_cast<std::size_t>(spec.n_dims));
      for (int d = 0; d < spec.n_dims; ++d) {
        r.dims.push_back(static_cast<Value>(dim_sampler->draw(rng)));
      }
    }
    records.push_back(std::move(r));
  }
  return records;
}

void write_synthetic_csv(const SyntheticSpec& spec, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << "value,time";
  for (int d = 0; d < spec.n_dims; ++d) out << ",d" << d;
  out << '\n';
  char buf[64];
  for (const auto& r : gen_synthetic(spec)) {
    double v = ordinal_to_double(r.value);
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    out << buf << ',' << r.time;
    for (Value d : r.dims) out << ',' << dim_token(d, spec.dim_cardinality);
    out << '\n';
  }
}

SegmentStore make_synthetic_interval_store(const SyntheticSpec& spec, std::int64_t n_segments,
                                           QueryKind kind, std::int64_t max_interval) {
  DatasetConfig config;
  config.mode = Mode::interval;
  config.query_kind = kind;
  config.value_kind = ValueKind::ordinal;
  config.time_resolution = (spec.n + n_segments - 1) / n_segments;
  config.max_interval = max_interval;
  config.seed = spec.seed;
  return partition_by_time(gen_synthetic(spec), config);
}

SegmentStore make_synthetic_cube_store(const SyntheticSpec& spec, QueryKind kind,
                                       const std::vector<std::string>& dim_names) {
  if (static_cast<int>(dim_names.size()) != spec.n_dims) {
    throw std::invalid_argument("dimension name count mismatch");
  }
  DatasetConfig config;
  config.mode = Mode::cube;
  config.query_kind = kind;
  config.value_kind = ValueKind::ordinal;
  config.dims = dim_names;
  config.seed = spec.seed;
  SegmentStore store = partition_by_cube(gen_synthetic(spec), config);
  std::vector<std::string> tokens;
  for (std::int64_t id = 0; id < spec.dim_cardinality; ++id) {
    tokens.push_back(dim_token(id, spec.dim_cardinality));
  }
  for (int d = 0; d < spec.n_dims; ++d) {
    store.dim_dicts.push_back(ValueDict::from_tokens(tokens));
  }
  return store;
}

std::vector<Value> probe_set(const SegmentStore& store, QueryKind kind, int count,
                             std::uint64_t seed) {
  std::unordered_map<Value, std::int64_t> global;
  for (const auto& seg : store.segments) {
    for (const auto& [v, c] : seg.entries()) global[v] += c;
  }
  std::vector<std::pair<Value, std::int64_t>> sorted(global.begin(), global.end());
  std::sort(sorted.begin(), sorted.end());
  if (sorted.empty()) return {};

  if (kind == QueryKind::frequency) {
    if (static_cast<int>(sorted.size()) <= count) {
      std::vector<Value> all;
      all.reserve(sorted.size());
      for (const auto& [v, c] : sorted) all.push_back(v);
      return all;
    }
    // Floyd's sample of `count` distinct positions
    Rng rng(seed);
    const std::int64_t n = static_cast<std::int64_t>(sorted.size());
    std::unordered_set<std::int64_t> picks;
    for (std::int64_t j = n - count; j < n; ++j) {
      std::int64_t t = static_cast<std::int64_t>(rng.next_below(static_cast<std::uint64_t>(j + 1)));
      if (!picks.insert(t).second) picks.insert(j);
    }
    std::vector<Value> probes;
    probes.reserve(picks.size());
    for (std::int64_t p : picks) probes.push_back(sorted[static_cast<std::size_t>(p)].first);
    std::sort(probes.begin(), probes.end());
    return probes;
  }

  // rank probes: equally spaced quantile positions of the global distribution
  std::int64_t total = 0;
  for (const auto& [v, c] : sorted) total += c;
  std::vector<Value> probes;
  probes.reserve(static_cast<std::size_t>(count));
  std::size_t idx = 0;
  std::int64_t cum = sorted[0].second;
  for (int j = 1; j <= count; ++j) {
    double target = static_cast<double>(total) * static_cast<double>(j) / static_cast<double>(count);
    while (static_cast<double>(cum) < target && idx + 1 < sorted.size()) {
      ++idx;
      cum += sorted[idx].second;
    }
    probes.push_back(sorted[idx].first);
  }
  probes.erase(std::unique(probes.begin(), probes.end()), probes.end());
  return probes;
}

double measure_interval_error(const SegmentStore& truth, const SummaryStore& estimates,
                              std::int64_t first_segment, std::int64_t last_segment,
                              QueryKind kind, const std::vector<Value>& probes) {
  const std::int64_t t0 = (truth.base_index + first_segment) * truth.config.time_resolution;
  const std::int64_t t1 = (truth.base_index + last_segment + 1) * truth.config.time_resolution;
  IntervalPlan plan = decompose_interval(t0, t1, truth.config.time_resolution,
                                         truth.config.max_interval, truth.base_index);
  double weight = 0.0;
  for (std::int64_t i = first_segment; i <= last_segment; ++i) {
    weight += static_cast<double>(truth.segments[static_cast<std::size_t>(i)].total_weight());
  }
  if (weight <= 0.0) return 0.0;
  double worst = 0.0;
  for (Value x : probes) {
    double est = point_estimate(plan, estimates, kind, x);
    double exact = 0.0;
    for (std::int64_t i = first_segment; i <= last_segment; ++i) {
      exact += static_cast<double>(eval(truth.segments[static_cast<std::size_t>(i)], kind, x));
    }
    worst = std::max(worst, std::abs(est - exact));
  }
  return worst / weight;
}

double measure_cube_error(const SegmentStore& truth, const SummaryStore& estimates,
                          const std::vector<std::int64_t>& segment_ids, QueryKind kind,
                          const std::vector<Value>& probes) {
  double weight = 0.0;
  for (std::int64_t id : segment_ids) {
    weight += static_cast<double>(truth.segments[static_cast<std::size_t>(id)].total_weight());
  }
  if (weight <= 0.0) return 0.0;
  double worst = 0.0;
  for (Value x : probes) {
    double est = point_estimate(segment_ids, estimates, kind, x);
    double exact = 0.0;
    for (std::int64_t id : segment_ids) {
      exact += static_cast<double>(eval(truth.segments[static_cast<std::size_t>(id)], kind, x));
    }
    worst = std::max(worst, std::abs(est - exact));
  }
  return worst / weight;
}

void write_reports_csv(const std::string& path, const std::vector<ErrorReport>& rows,
                       const std::vector<std::string>& meta) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  for (const auto& m : meta) out << "# " << m << '\n';
  out << "dataset,method,query_type,k_or_filters,mean_err,std_err,trials,seed,ms\n";
  char buf[64];
  for (const auto& r : rows) {
    out << r.dataset << ',' << r.method << ',' << r.query_type << ',' << r.k_or_filters << ',';
    std::snprintf(buf, sizeof(buf), "%.10g", r.mean_err);
    out << buf << ',';
    std::snprintf(buf, sizeof(buf), "%.10g", r.std_err);
    out << buf << ',' << r.trials << ',' << r.seed << ',';
    std::snprintf(buf, sizeof(buf), "%.3f", r.ms);
    out << buf << '\n';
  }
}

SummaryStore build_interval_summaries(const SegmentStore& store, const std::string& method,
                                      std::int64_t s, std::uint64_t seed, double slack,
                                      HMode h_mode, double n_max) {
  if (store.config.mode != Mode::interval) {
    throw std::invalid_argument("interval summaries require an interval store");
  }
  SummaryStore out;
  out.config = store.config;
  out.config.summary_size = s;
  out.config.seed = seed;
  out.base_index = store.base_index;
  out.value_dict = store.value_dict;
  out.method = method;
  out.summaries.reserve(store.size());

  const QueryKind kind = store.config.query_kind;
  if (method == "coop") {
    CoopConfig config;
    config.summary_size = s;
    config.slack = slack;
    config.max_interval = store.config.max_interval;
    config.h_mode = h_mode;
    if (n_max <= 0.0) {
      // default: double the first non-empty segment's weight
      n_max = 1.0;
      for (const auto& seg : store.segments) {
        if (seg.total_weight() > 0) {
          n_max = 2.0 * static_cast<double>(seg.total_weight());
          break;
        }
      }
    }
    config.max_segment_weight = n_max;
    out.method = kind == QueryKind::frequency ? "coop-freq" : "coop-quant";
    if (kind == QueryKind::frequency) {
      FreqErrorTracker tracker(config.max_interval);
      for (const auto& seg : store.segments) {
        out.summaries.push_back(coop_freq_summarize(seg, config, tracker));
      }
    } else {
      RankErrorTracker tracker(config.max_interval);
      for (const auto& seg : store.segments) {
        out.summaries.push_back(coop_quant_summarize(seg, config, tracker));
      }
    }
    return out;
  }

  for (std::size_t i = 0; i < store.size(); ++i) {
    const Segment& seg = store.segments[i];
    Rng rng(derive_seed(seed, i));
    if (method == "pps") {
      out.summaries.push_back(pps_summarize(seg, s, 0.0, rng));
    } else if (method == "truncation") {
      out.summaries.push_back(truncation_summarize(seg, s, kind));
    } else if (method == "usample") {
      out.summaries.push_back(usample_summarize(seg, s, rng));
    } else if (method == "exact") {
      out.summaries.push_back(exact_summarize(seg));
    } else {
      throw std::invalid_argument("unknown interval summary method: " + method);
    }
  }
  return out;
}

namespace {

struct ParsedMethod {
  std::string name;       // coop, pps, truncation, usample, cms, hierarchy, exact
  std::int64_t base = 2;  // hierarchy base
  std::string label;      // as given, used in reports
};

ParsedMethod parse_method(const std::string& m) {
  ParsedMethod parsed;
  parsed.label = m;
  auto colon = m.find(':');
  if (colon == std::string::npos) {
    parsed.name = m;
  } else {
    parsed.name = m.substr(0, colon);
    parsed.base = std::stoll(m.substr(colon + 1));
  }
  return parsed;
}

/// Per-probe cumulative estimate tables: cum[p][i] = estimate summed over
/// segments [0, i). Interval estimates become two lookups, which matches the
/// signed-prefix evaluation exactly.
struct CumTable {
  std::vector<std::vector<double>> cum;  // probes x (n_segments + 1)

  double range(std::size_t probe, std::int64_t first, std::int64_t last) const {
    return cum[probe][static_cast<std::size_t>(last + 1)] -
           cum[probe][static_cast<std::size_t>(first)];
  }
};

CumTable truth_table(const SegmentStore& store, QueryKind kind,
                     const std::vector<Value>& probes) {
  CumTable t;
  t.cum.assign(probes.size(), std::vector<double>(store.size() + 1, 0.0));
  for (std::size_t p = 0; p < probes.size(); ++p) {
    auto& row = t.cum[p];
    for (std::size_t i = 0; i < store.size(); ++i) {
      row[i + 1] = row[i] + static_cast<double>(eval(store.segments[i], kind, probes[p]));
    }
  }
  return t;
}

CumTable estimate_table(const SummaryStore& store, QueryKind kind,
                        const std::vector<Value>& probes) {
  CumTable t;
  t.cum.assign(probes.size(), std::vector<double>(store.summaries.size() + 1, 0.0));
  for (std::size_t p = 0; p < probes.size(); ++p) {
    auto& row = t.cum[p];
    for (std::size_t i = 0; i < store.summaries.size(); ++i) {
      row[i + 1] = row[i] + eval(store.summaries[i], kind, probes[p]);
    }
  }
  return t;
}

CumTable cms_table(const CmsStore& store, const std::vector<Value>& probes) {
  CumTable t;
  t.cum.assign(probes.size(), std::vector<double>(store.sketches.size() + 1, 0.0));
  for (std::size_t p = 0; p < probes.size(); ++p) {
    auto& row = t.cum[p];
    for (std::size_t i = 0; i < store.sketches.size(); ++i) {
      row[i + 1] = row[i] + static_cast<double>(store.sketches[i].query(probes[p]));
    }
  }
  return t;
}

std::vector<double> weight_cumulative(const SegmentStore& store) {
  std::vector<double> w(store.size() + 1, 0.0);
  for (std::size_t i = 0; i < store.size(); ++i) {
    w[i + 1] = w[i] + static_cast<double>(store.segments[i].total_weight());
  }
  return w;
}

}  // namespace

std::vector<ErrorReport> run_interval_sweep(const SegmentStore& store,
                                            const IntervalSweepConfig& config) {
  if (store.config.mode != Mode::interval) {
    throw std::invalid_argument("interval sweep requires an interval store");
  }
  const QueryKind kind = store.config.query_kind;
  const std::int64_t n = static_cast<std::int64_t>(store.size());

  std::vector<std::int64_t> ks = config.interval_lengths;
  if (ks.empty()) {
    for (std::int64_t k = 1; k <= store.config.max_interval / 2 && k <= n; k *= 2) {
      ks.push_back(k);
    }
  }

  std::vector<Value> probes =
      probe_set(store, kind, config.probe_count, derive_seed(config.seed, 0xA0));
  CumTable truth = truth_table(store, kind, probes);
  std::vector<double> weights = weight_cumulative(store);

  std::vector<ErrorReport> rows;
  for (std::size_t mi = 0; mi < config.methods.size(); ++mi) {
    ParsedMethod method = parse_method(config.methods[mi]);
    std::uint64_t method_seed = derive_seed(config.seed, 1000 + mi);

    // estimate path: either a cumulative table or a per-interval callback
    CumTable est;
    HierarchyStore hierarchy;
    bool use_hierarchy = false;
    if (method.name == "cms") {
      if (kind != QueryKind::frequency) {
        throw std::invalid_argument("cms only supports frequency queries");
      }
      CmsStore cms = cms_store_build(store, config.summary_size, 5, method_seed);
      est = cms_table(cms, probes);
    } else if (method.name == "hierarchy") {
      hierarchy = hierarchy_build(store, config.summary_size, method.base);
      use_hierarchy = true;
    } else {
      SummaryStore summaries =
          build_interval_summaries(store, method.name, config.summary_size, method_seed);
      est = estimate_table(summaries, kind, probes);
    }

    for (std::int64_t k : ks) {
      if (k > n) continue;
      double t_start = now_ms();
      Rng trial_rng(derive_seed(config.seed, 77000 + static_cast<std::uint64_t>(k)));
      std::vector<double> errors;
      errors.reserve(static_cast<std::size_t>(config.trials));
      for (int trial = 0; trial < config.trials; ++trial) {
        std::int64_t first = static_cast<std::int64_t>(
            trial_rng.next_below(static_cast<std::uint64_t>(n - k + 1)));
        std::int64_t last = first + k - 1;
        double qweight = weights[static_cast<std::size_t>(last + 1)] -
                         weights[static_cast<std::size_t>(first)];
        if (qweight <= 0.0) continue;
        double worst = 0.0;
        for (std::size_t p = 0; p < probes.size(); ++p) {
          double estimate = use_hierarchy
                                ? hierarchy_estimate(hierarchy, first, last, kind, probes[p])
                                : est.range(p, first, last);
          worst = std::max(worst, std::abs(estimate - truth.range(p, first, last)));
        }
        errors.push_back(worst / qweight);
      }
      double mean = 0.0;
      for (double e : errors) mean += e;
      mean /= errors.empty() ? 1.0 : static_cast<double>(errors.size());
      double var = 0.0;
      for (double e : errors) var += (e - mean) * (e - mean);
      if (errors.size() > 1) var /= static_cast<double>(errors.size() - 1);

      ErrorReport row;
      row.dataset = config.dataset_name;
      row.method = method.label;
      row.query_type = to_string(kind);
      row.k_or_filters = std::to_string(k);
      row.mean_err = mean;
      row.std_err = std::sqrt(var);
      row.trials = static_cast<std::int64_t>(errors.size());
      row.seed = config.seed;
      row.ms = now_ms() - t_start;
      rows.push_back(std::move(row));
    }
  }
  return rows;
}

namespace {

SummaryStore build_cube_method(const SegmentStore& store, const std::string& label,
                               const CubeBenchConfig& config, std::uint64_t seed) {
  if (label == "exact") {
    SummaryStore out;
    out.config = store.config;
    out.base_index = store.base_index;
    out.keys = store.keys;
    out.value_dict = store.value_dict;
    out.dim_dicts = store.dim_dicts;
    out.method = "exact";
    out.summaries.reserve(store.size());
    for (const auto& seg : store.segments) out.summaries.push_back(exact_summarize(seg));
    return out;
  }

  CubeBuildOptions options;
  options.total_space = config.total_space;
  options.s_min = config.s_min;
  options.seed = seed;
  options.workload = config.build_workload;

  using Alloc = CubeBuildOptions::Alloc;
  using Sampler = CubeBuildOptions::Sampler;
  if (label == "sb") {
    options.alloc = Alloc::optimized;
    options.sampler = Sampler::pps;
    options.bias = true;
  } else if (label == "sb:-size") {
    options.alloc = Alloc::equal;
    options.sampler = Sampler::pps;
    options.bias = true;
  } else if (label == "sb:-bias") {
    options.alloc = Alloc::optimized;
    options.sampler = Sampler::pps;
    options.bias = false;
  } else if (label == "sb:-pps") {
    options.alloc = Alloc::optimized;
    options.sampler = Sampler::usample;
    options.bias = false;
  } else if (label == "sb:work1" || label == "sb:work2") {
    options.alloc = Alloc::optimized;
    options.sampler = Sampler::pps;
    options.bias = true;
    options.workload.dim_probability = label == "sb:work1" ? 0.05 : 0.50;
  } else if (label == "pps") {
    options.alloc = Alloc::equal;
    options.sampler = Sampler::pps;
    options.bias = false;
  } else if (label == "usample") {
    options.alloc = Alloc::equal;
    options.sampler = Sampler::usample;
    options.bias = false;
  } else if (label == "truncation") {
    options.alloc = Alloc::equal;
    options.sampler = Sampler::truncation;
    options.bias = false;
  } else if (label == "usample-prop") {
    options.alloc = Alloc::proportional;
    options.sampler = Sampler::usample;
    options.bias = false;
  } else if (label == "strat") {
    options.alloc = Alloc::strat;
    options.sampler = Sampler::usample;
    options.bias = false;
  } else {
    throw std::invalid_argument("unknown cube method: " + label);
  }
  return build_cube(store, options);
}

}  // namespace

CubeBenchOutput run_cube_bench(const SegmentStore& store, const CubeBenchConfig& config) {
  if (store.config.mode != Mode::cube) {
    throw std::invalid_argument("cube bench requires a cube store");
  }
  const QueryKind kind = store.config.query_kind;
  std::vector<Value> probes =
      probe_set(store, kind, config.probe_count, derive_seed(config.seed, 0xA0));

  WorkloadSample eval_sample = sample_workload(config.eval_workload, store);

  // per-(segment, probe) truth matrix
  const std::size_t n = store.size();
  std::vector<std::vector<double>> truth(n, std::vector<double>(probes.size(), 0.0));
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t p = 0; p < probes.size(); ++p) {
      truth[i][p] = static_cast<double>(eval(store.segments[i], kind, probes[p]));
    }
  }

  CubeBenchOutput output;
  for (std::size_t mi = 0; mi < config.methods.size(); ++mi) {
    const std::string& label = config.methods[mi];
    double t_start = now_ms();
    SummaryStore summaries =
        build_cube_method(store, label, config, derive_seed(config.seed, 5000 + mi));

    std::vector<std::vector<double>> est(n, std::vector<double>(probes.size(), 0.0));
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t p = 0; p < probes.size(); ++p) {
        est[i][p] = eval(summaries.summaries[i], kind, probes[p]);
      }
    }

    // weighted by multiplicity over the sampled workload, bucketed by the
    // number of filter dimensions
    std::map<std::size_t, std::vector<std::pair<double, std::int64_t>>> buckets;
    std::vector<std::pair<double, std::int64_t>> all;
    for (const auto& q : eval_sample.queries) {
      if (q.total_weight <= 0) continue;
      double worst = 0.0;
      for (std::size_t p = 0; p < probes.size(); ++p) {
        double e = 0.0, t = 0.0;
        for (std::int64_t id : q.segments) {
          e += est[static_cast<std::size_t>(id)][p];
          t += truth[static_cast<std::size_t>(id)][p];
        }
        worst = std::max(worst, std::abs(e - t));
      }
      double err = worst / static_cast<double>(q.total_weight);
      all.emplace_back(err, q.multiplicity);
      buckets[q.filters.size()].emplace_back(err, q.multiplicity);
    }

    auto weighted_stats = [](const std::vector<std::pair<double, std::int64_t>>& xs) {
      double wsum = 0.0, mean = 0.0;
      for (const auto& [e, m] : xs) {
        wsum += static_cast<double>(m);
        mean += e * static_cast<double>(m);
      }
      if (wsum > 0.0) mean /= wsum;
      double var = 0.0;
      for (const auto& [e, m] : xs) var += static_cast<double>(m) * (e - mean) * (e - mean);
      if (wsum > 1.0) var /= wsum - 1.0;
      return std::pair<double, double>(mean, std::sqrt(var));
    };

    double ms = now_ms() - t_start;
    auto [mean, sd] = weighted_stats(all);
    std::int64_t trials = 0;
    for (const auto& [e, m] : all) trials += m;
    output.overall_mean[label] = mean;

    ErrorReport overall;
    overall.dataset = config.dataset_name;
    overall.method = label;
    overall.query_type = to_string(kind);
    overall.k_or_filters = "all";
    overall.mean_err = mean;
    overall.std_err = sd;
    overall.trials = trials;
    overall.seed = config.seed;
    overall.ms = ms;
    output.rows.push_back(overall);

    for (const auto& [n_filters, xs] : buckets) {
      auto [bmean, bsd] = weighted_stats(xs);
      std::int64_t btrials = 0;
      for (const auto& [e, m] : xs) btrials += m;
      ErrorReport row = overall;
      row.k_or_filters = "filters=" + std::to_string(n_filters);
      row.mean_err = bmean;
      row.std_err = bsd;
      row.trials = btrials;
      row.ms = 0.0;
      output.rows.push_back(std::move(row));
    }
  }
  return output;
}

std::vector<AccumulatorSweepRow> run_accumulator_sweep(const SegmentStore& store,
                                                       const AccumulatorSweepConfig& config) {
  if (store.config.mode != Mode::interval) {
    throw std::invalid_argument("accumulator sweep requires an interval store");
  }
  const QueryKind kind = store.config.query_kind;
  const std::int64_t n = static_cast<std::int64_t>(store.size());
  const std::int64_t k = config.interval_length;
  if (k > n) throw std::invalid_argument("interval length exceeds the store");

  std::vector<Value> probes =
      probe_set(store, kind, config.probe_count, derive_seed(config.seed, 0xA0));
  SummaryStore summaries = build_interval_summaries(store, config.method, config.summary_size,
                                                    derive_seed(config.seed, 1));
  CumTable truth = truth_table(store, kind, probes);
  CumTable est = estimate_table(summaries, kind, probes);
  std::vector<double> weights = weight_cumulative(store);

  const AccumulatorKind acc_kind =
      kind == QueryKind::frequency ? AccumulatorKind::spacesaving : AccumulatorKind::pps;

  // shared trial intervals
  Rng trial_rng(derive_seed(config.seed, 42));
  std::vector<std::int64_t> starts;
  for (int t = 0; t < config.trials; ++t) {
    starts.push_back(static_cast<std::int64_t>(
        trial_rng.next_below(static_cast<std::uint64_t>(n - k + 1))));
  }

  std::vector<AccumulatorSweepRow> rows;
  for (std::int64_t sa : config.accumulator_sizes) {
    double t_start = now_ms();
    double sum_summary = 0.0;
    double sum_acc = 0.0;
    std::int64_t counted = 0;
    for (int t = 0; t < config.trials; ++t) {
      std::int64_t first = starts[static_cast<std::size_t>(t)];
      std::int64_t last = first + k - 1;
      double qweight = weights[static_cast<std::size_t>(last + 1)] -
                       weights[static_cast<std::size_t>(first)];
      if (qweight <= 0.0) continue;
      std::int64_t t0 = (store.base_index + first) * store.config.time_resolution;
      std::int64_t t1 = (store.base_index + last + 1) * store.config.time_resolution;
      IntervalPlan plan = decompose_interval(t0, t1, store.config.time_resolution,
                                             store.config.max_interval, store.base_index);
      SignedAccumulator acc =
          accumulate(plan, summaries, acc_kind, sa,
                     derive_seed(config.seed, 9000 + static_cast<std::uint64_t>(t)));
      double worst_summary = 0.0;
      double worst_acc = 0.0;
      for (std::size_t p = 0; p < probes.size(); ++p) {
        double exact_est = est.range(p, first, last);
        double acc_est = kind == QueryKind::frequency ? acc.frequency(probes[p])
                                                      : acc.rank(probes[p]);
        worst_summary = std::max(worst_summary,
                                 std::abs(exact_est - truth.range(p, first, last)));
        worst_acc = std::max(worst_acc, std::abs(acc_est - exact_est));
      }
      sum_summary += worst_summary / qweight;
      sum_acc += worst_acc / qweight;
      ++counted;
    }
    AccumulatorSweepRow row;
    row.accumulator_size = sa;
    row.summary_error = counted > 0 ? sum_summary / static_cast<double>(counted) : 0.0;
    row.accumulator_error = counted > 0 ? sum_acc / static_cast<double>(counted) : 0.0;
    row.ms = now_ms() - t_start;
    rows.push_back(row);
  }
  return rows;
}

AdversaryResult run_adversarial(const SummarizerFn& summarize, std::int64_t s,
                                std::int64_t h_target) {
  if (s < 1 || h_target < 1) throw std::invalid_argument("adversary needs s, h_target >= 1");
  std::unordered_map<Value, double> undercount;
  Value next_fresh = 0;
  AdversaryResult result;

  auto feed_segment = [&](const std::vector<Value>& values) {
    Segment segment = Segment::from_values(values);
    Summary summary = summarize(segment);
    for (const auto& [v, c] : segment.entries()) {
      undercount[v] += static_cast<double>(c);
    }
    for (const auto& [v, w] : summary.entries) {
      undercount[v] -= w;
    }
    ++result.segments_fed;
  };

  for (std::int64_t phase = 1; phase <= h_target + 1; ++phase) {
    std::int64_t n_segments = std::int64_t{1} << (h_target + 1 - phase);
    if (phase == 1) {
      for (std::int64_t seg = 0; seg < n_segments; ++seg) {
        std::vector<Value> values;
        for (std::int64_t i = 0; i < 2 * s; ++i) values.push_back(next_fresh++);
        feed_segment(values);
      }
      continue;
    }
    // values the summaries have stored least, snapshot at phase start
    std::vector<std::pair<double, Value>> pool(undercount.size());
    std::size_t pi = 0;
    for (const auto& [v, u] : undercount) pool[pi++] = {u, v};
    std::sort(pool.begin(), pool.end(), [](const auto& a, const auto& b) {
      if (a.first != b.first) return a.first > b.first;
      return a.second < b.second;
    });
    std::size_t need = static_cast<std::size_t>(n_segments * 2 * s);
    std::vector<Value> picked;
    picked.reserve(need);
    for (std::size_t i = 0; i < need; ++i) {
      if (i < pool.size()) {
        picked.push_back(pool[i].second);
      } else {
        picked.push_back(next_fresh++);  // degenerate strategies only
      }
    }
    for (std::int64_t seg = 0; seg < n_segments; ++seg) {
      std::vector<Value> values(picked.begin() + seg * 2 * s,
                                picked.begin() + (seg + 1) * 2 * s);
      feed_segment(values);
    }
  }

  for (const auto& [v, u] : undercount) {
    result.max_undercount = std::max(result.max_undercount, u);
  }
  result.values_used = next_fresh;
  return result;
}

}  // namespace preagg
