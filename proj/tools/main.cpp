// preagg: precomputation-based approximate aggregation engine.
//
// Subcommands: gen (synthetic datasets), ingest (CSV -> segment store),
// summarize (segment store -> summary store), query (summary store ->
// estimate), bench (error-vs-space sweeps to CSV).

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "preagg/baselines.hpp"
#include "preagg/bench.hpp"
#include "preagg/coop.hpp"
#include "preagg/cube_opt.hpp"
#include "preagg/ingest.hpp"
#include "preagg/model.hpp"
#include "preagg/pps.hpp"
#include "preagg/query.hpp"
#include "preagg/store_io.hpp"

namespace fs = std::filesystem;
using namespace preagg;

namespace {

void echo_config(const std::map<std::string, std::string>& kv) {
  for (const auto& [k, v] : kv) {
    std::cout << "config " << k << "=" << v << "\n";
  }
}

std::vector<std::string> split_commas(const std::string& s) {
  std::vector<std::string> out;
  if (s.empty()) return out;
  std::size_t start = 0;
  while (true) {
    auto pos = s.find(',', start);
    if (pos == std::string::npos) {
      out.push_back(s.substr(start));
      break;
    }
    out.push_back(s.substr(start, pos - start));
    start = pos + 1;
  }
  return out;
}

Value parse_query_value(const std::string& text, const SummaryStore& store) {
  if (store.config.value_kind == ValueKind::ordinal) {
    return ordinal_value(std::stod(text));
  }
  return store.value_dict.id_of(text);
}

std::string format_value(Value v, const DatasetConfig& config, const ValueDict& dict) {
  if (config.value_kind == ValueKind::ordinal) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", ordinal_to_double(v));
    return buf;
  }
  return dict.token_of(v);
}

int cmd_gen(const std::string& kind, std::int64_t n, const std::string& out, double zipf_param,
            std::int64_t universe, int dims, std::int64_t dim_card, std::uint64_t seed) {
  SyntheticSpec spec;
  spec.kind = kind == "zipf" ? SyntheticSpec::Kind::zipf : SyntheticSpec::Kind::uniform;
  spec.n = n;
  spec.zipf_param = zipf_param;
  spec.universe = universe;
  spec.n_dims = dims;
  spec.dim_cardinality = dim_card;
  spec.seed = seed;
  echo_config({{"kind", kind},
               {"n", std::to_string(n)},
               {"out", out},
               {"zipf_param", std::to_string(zipf_param)},
               {"universe", std::to_string(universe)},
               {"dims", std::to_string(dims)},
               {"dim_cardinality", std::to_string(dim_card)},
               {"seed", std::to_string(seed)}});
  write_synthetic_csv(spec, out);
  std::cout << "wrote " << out << " (" << n << " records)\n";
  return 0;
}

int cmd_ingest(const std::string& input, const std::string& store_dir, const std::string& mode,
               const std::string& function, const std::string& value_kind,
               const std::string& value_col, const std::string& time_col,
               const std::string& dims_csv, std::int64_t tg, std::int64_t kt,
               std::int64_t s, std::int64_t s_total, std::int64_t s_min, std::uint64_t seed,
               const std::string& delim) {
  DatasetConfig config;
  config.mode = mode_from_string(mode);
  config.query_kind = query_kind_from_string(function);
  config.value_kind = value_kind_from_string(value_kind);
  config.time_resolution = tg;
  config.max_interval = kt;
  config.dims = split_commas(dims_csv);
  config.summary_size = s;
  config.total_space = s_total;
  config.min_summary_size = s_min;
  config.seed = seed;
  CsvOptions csv;
  csv.value_column = value_col;
  csv.time_column = time_col;
  csv.delimiter = delim.empty() ? ',' : delim[0];

  echo_config({{"input", input},
               {"store", store_dir},
               {"mode", mode},
               {"function", function},
               {"value_kind", value_kind},
               {"value_col", value_col},
               {"time_col", time_col},
               {"dims", dims_csv},
               {"tg", std::to_string(tg)},
               {"kt", std::to_string(kt)},
               {"seed", std::to_string(seed)}});

  SegmentStore store = ingest_csv(input, config, csv);
  save_store(store, store_dir);
  std::cout << "ingested " << store.total_records() << " records into " << store.size()
            << " segments at " << store_dir << "\n";
  return 0;
}

int cmd_summarize(const std::string& store_dir, const std::string& out_dir,
                  const std::string& method, std::int64_t s, std::int64_t s_total,
                  std::int64_t s_min, std::uint64_t seed, double slack,
                  const std::string& h_mode_name, const std::string& workload_path,
                  const std::string& alloc, const std::string& bias_flag,
                  const std::string& report_path) {
  SegmentStore store = load_store(store_dir);
  echo_config({{"store", store_dir},
               {"out", out_dir},
               {"method", method},
               {"s", std::to_string(s)},
               {"s_total", std::to_string(s_total)},
               {"s_min", std::to_string(s_min)},
               {"slack", std::to_string(slack)},
               {"h_mode", h_mode_name},
               {"alloc", alloc},
               {"bias", bias_flag},
               {"workload", workload_path},
               {"seed", std::to_string(seed)}});

  if (store.config.mode == Mode::interval) {
    HMode h_mode = h_mode_name == "naive" ? HMode::naive : HMode::calct;
    SummaryStore summaries = build_interval_summaries(store, method, s, seed, slack, h_mode);
    summaries.config.summary_size = s;
    summaries.config.seed = seed;
    summaries.value_dict = store.value_dict;
    save_summary_store(summaries, out_dir);
    std::cout << "summarized " << summaries.size() << " segments (" << summaries.method
              << ") at " << out_dir << "\n";
    return 0;
  }

  // cube mode
  CubeBuildOptions options;
  options.total_space = s_total;
  options.s_min = s_min;
  options.seed = seed;
  if (!workload_path.empty()) {
    options.workload = load_workload_spec(workload_path);
  } else {
    options.workload.seed = derive_seed(seed, 0x77);
  }
  if (method == "sb") {
    options.alloc = CubeBuildOptions::Alloc::optimized;
    options.sampler = CubeBuildOptions::Sampler::pps;
    options.bias = true;
  } else {
    if (method == "pps") {
      options.sampler = CubeBuildOptions::Sampler::pps;
    } else if (method == "usample") {
      options.sampler = CubeBuildOptions::Sampler::usample;
    } else if (method == "truncation") {
      options.sampler = CubeBuildOptions::Sampler::truncation;
    } else if (method == "exact") {
      SummaryStore out;
      out.config = store.config;
      out.base_index = store.base_index;
      out.keys = store.keys;
      out.value_dict = store.value_dict;
      out.dim_dicts = store.dim_dicts;
      out.method = "exact";
      for (const auto& seg : store.segments) out.summaries.push_back(exact_summarize(seg));
      save_summary_store(out, out_dir);
      std::cout << "summarized " << out.size() << " segments (exact) at " << out_dir << "\n";
      return 0;
    } else {
      throw std::invalid_argument("unknown cube method: " + method);
    }
    if (alloc == "equal") options.alloc = CubeBuildOptions::Alloc::equal;
    else if (alloc == "opt") options.alloc = CubeBuildOptions::Alloc::optimized;
    else if (alloc == "prop") options.alloc = CubeBuildOptions::Alloc::proportional;
    else if (alloc == "strat") options.alloc = CubeBuildOptions::Alloc::strat;
    else throw std::invalid_argument("unknown allocation: " + alloc);
    options.bias = bias_flag == "on";
  }

  SummaryStore summaries = build_cube(store, options);
  save_summary_store(summaries, out_dir);
  if (!report_path.empty()) {
    write_allocation_report(summaries, store, report_path);
  }
  std::cout << "summarized " << summaries.size() << " segments (" << summaries.method << ", "
            << alloc << " allocation) at " << out_dir << "\n";
  return 0;
}

int cmd_query(const std::string& store_dir, const std::string& type,
              const std::string& function, std::int64_t t0, std::int64_t t1,
              const std::vector<std::string>& filter_args, const std::string& x_text,
              double q, std::int64_t top_k, const std::string& accumulator,
              std::int64_t s_a, std::uint64_t seed, bool machine) {
  SummaryStore store = load_summary_store(store_dir);
  echo_config({{"store", store_dir},
               {"type", type},
               {"function", function},
               {"accumulator", accumulator},
               {"sa", std::to_string(s_a)},
               {"seed", std::to_string(seed)}});

  // resolve the queried segments
  IntervalPlan plan;
  std::vector<std::int64_t> segment_ids;
  bool interval = type == "interval";
  if (interval) {
    plan = decompose_interval(t0, t1, store.config.time_resolution, store.config.max_interval,
                              store.base_index);
  } else {
    CubeFilters filters;
    for (const auto& f : filter_args) {
      auto eq = f.find('=');
      if (eq == std::string::npos) {
        throw std::invalid_argument("filter must be dim=value: " + f);
      }
      std::string dim = f.substr(0, eq);
      std::string value = f.substr(eq + 1);
      std::size_t dim_idx = store.config.dims.size();
      for (std::size_t d = 0; d < store.config.dims.size(); ++d) {
        if (store.config.dims[d] == dim) dim_idx = d;
      }
      if (dim_idx == store.config.dims.size()) {
        throw std::invalid_argument("unknown dimension: " + dim);
      }
      filters.emplace_back(dim_idx, store.dim_dicts[dim_idx].id_of(value));
    }
    segment_ids = select_cube_segments(filters, store.keys);
  }

  nlohmann::json out;
  out["type"] = type;
  out["function"] = function;
  AccumulatorKind acc_kind = accumulator_kind_from_string(accumulator);

  if (function == "frequency" || function == "rank") {
    QueryKind kind = query_kind_from_string(function);
    Value x = parse_query_value(x_text, store);
    double estimate = interval ? point_estimate(plan, store, kind, x)
                               : point_estimate(segment_ids, store, kind, x);
    out["x"] = x_text;
    out["estimate"] = estimate;
    if (!machine) std::cout << function << "(" << x_text << ") = " << estimate << "\n";
  } else if (function == "quantile") {
    SignedAccumulator acc = interval ? accumulate(plan, store, acc_kind, s_a, seed)
                                     : accumulate(segment_ids, store, acc_kind, s_a, seed);
    Value v = quantile(acc, q);
    std::string value = format_value(v, store.config, store.value_dict);
    out["q"] = q;
    out["value"] = value;
    if (!machine) std::cout << "quantile(" << q << ") = " << value << "\n";
  } else if (function == "topk") {
    SignedAccumulator acc = interval ? accumulate(plan, store, acc_kind, s_a, seed)
                                     : accumulate(segment_ids, store, acc_kind, s_a, seed);
    auto top = heavy_hitters(acc, top_k);
    nlohmann::json items = nlohmann::json::array();
    for (const auto& [v, w] : top) {
      std::string value = format_value(v, store.config, store.value_dict);
      items.push_back({{"value", value}, {"weight", w}});
      if (!machine) std::cout << value << "\t" << w << "\n";
    }
    out["topk"] = items;
  } else {
    throw std::invalid_argument("unknown query function: " + function);
  }
  if (machine) std::cout << out.dump() << "\n";
  return 0;
}

// --------------------------------------------------------------------------
// bench suites

struct BenchScale {
  std::int64_t n_interval = 1000000;
  std::int64_t n_segments = 1024;
  std::int64_t max_interval = 1024;
  std::int64_t s = 64;
  int trials = 100;
  std::int64_t n_cube = 1000000;
  int cube_dims = 4;
  std::int64_t dim_card = 10;
  std::int64_t cube_space = 50000;
  std::int64_t workload_n = 10000;
};

SegmentStore bench_interval_store(const std::string& kind, QueryKind qk, const BenchScale& sc,
                                  std::uint64_t seed) {
  SyntheticSpec spec;
  spec.kind = kind == "zipf" ? SyntheticSpec::Kind::zipf : SyntheticSpec::Kind::uniform;
  spec.n = sc.n_interval;
  spec.seed = seed;
  return make_synthetic_interval_store(spec, sc.n_segments, qk, sc.max_interval);
}

SegmentStore bench_cube_store(QueryKind qk, const BenchScale& sc, std::uint64_t seed) {
  SyntheticSpec spec;
  spec.kind = SyntheticSpec::Kind::zipf;
  spec.n = sc.n_cube;
  spec.n_dims = sc.cube_dims;
  spec.dim_cardinality = sc.dim_card;
  spec.seed = seed;
  std::vector<std::string> dims;
  for (int d = 0; d < sc.cube_dims; ++d) dims.push_back("d" + std::to_string(d));
  return make_synthetic_cube_store(spec, qk, dims);
}

int cmd_bench(const std::string& suite, const std::string& out_dir, std::uint64_t seed,
              const std::string& scale_name) {
  fs::create_directories(out_dir);
  BenchScale sc;
  if (scale_name == "tiny") {
    sc = {20000, 64, 64, 16, 20, 50000, 3, 6, 2000, 1000};
  }
  echo_config({{"suite", suite},
               {"out", out_dir},
               {"seed", std::to_string(seed)},
               {"scale", scale_name}});
  std::vector<std::string> meta = {
      "intervals sampled uniformly over all T_G-aligned starts (not block-aligned)",
      "cms rows use the width-equals-s space convention with depth 5",
      "probe-set size = 200 (all distinct values when fewer)"};

  auto run_interval = [&](const std::string& kind, QueryKind qk,
                          const std::vector<std::string>& methods, const std::string& file) {
    SegmentStore store = bench_interval_store(kind, qk, sc, derive_seed(seed, 11));
    IntervalSweepConfig config;
    config.dataset_name = kind;
    config.methods = methods;
    config.summary_size = sc.s;
    config.trials = sc.trials;
    config.seed = seed;
    auto rows = run_interval_sweep(store, config);
    write_reports_csv((fs::path(out_dir) / file).string(), rows, meta);
    std::cout << "wrote " << (fs::path(out_dir) / file).string() << "\n";
  };

  bool all = suite == "all";
  if (all || suite == "interval-freq") {
    run_interval("zipf", QueryKind::frequency,
                 {"coop", "pps", "truncation", "usample", "hierarchy:2", "cms"},
                 "fig_interval_freq.csv");
  }
  if (all || suite == "interval-quant") {
    run_interval("uniform", QueryKind::rank,
                 {"coop", "pps", "truncation", "usample", "hierarchy:2"},
                 "fig_interval_quant.csv");
  }
  if (all || suite == "cube" || suite == "lesion") {
    SegmentStore store = bench_cube_store(QueryKind::frequency, sc, derive_seed(seed, 13));
    CubeBenchConfig config;
    config.dataset_name = "zipf-cube";
    config.total_space = sc.cube_space;
    config.s_min = 1;
    config.eval_workload.samples = sc.workload_n;
    config.eval_workload.seed = derive_seed(seed, 21);
    config.build_workload.samples = sc.workload_n;
    config.build_workload.seed = derive_seed(seed, 22);
    config.seed = seed;
    if (all || suite == "cube") {
      config.methods = {"sb", "pps", "truncation", "usample", "usample-prop", "strat"};
      auto output = run_cube_bench(store, config);
      write_reports_csv((fs::path(out_dir) / "fig_cube.csv").string(), output.rows, meta);
      std::cout << "wrote " << (fs::path(out_dir) / "fig_cube.csv").string() << "\n";
    }
    if (all || suite == "lesion") {
      config.methods = {"sb", "sb:-size", "sb:-bias", "sb:-pps", "sb:work1", "sb:work2", "pps"};
      auto output = run_cube_bench(store, config);
      write_reports_csv((fs::path(out_dir) / "fig_lesion.csv").string(), output.rows, meta);
      std::cout << "wrote " << (fs::path(out_dir) / "fig_lesion.csv").string() << "\n";
    }
  }
  if (all || suite == "accumulator") {
    std::vector<ErrorReport> rows;
    for (const auto& [kind, qk] : std::vector<std::pair<std::string, QueryKind>>{
             {"zipf", QueryKind::frequency}, {"uniform", QueryKind::rank}}) {
      SegmentStore store = bench_interval_store(kind, qk, sc, derive_seed(seed, 31));
      AccumulatorSweepConfig config;
      config.dataset_name = kind;
      config.summary_size = sc.s;
      config.interval_length = std::min<std::int64_t>(512, sc.n_segments / 2);
      config.trials = sc.trials;
      config.seed = seed;
      for (const auto& row : run_accumulator_sweep(store, config)) {
        ErrorReport r;
        r.dataset = kind;
        r.method = std::string("coop+") + (qk == QueryKind::frequency ? "spacesaving" : "pps");
        r.query_type = to_string(qk);
        r.k_or_filters = "sa=" + std::to_string(row.accumulator_size);
        r.mean_err = row.accumulator_error;
        r.std_err = row.summary_error;  // summary-level error for reference
        r.trials = config.trials;
        r.seed = seed;
        r.ms = row.ms;
        rows.push_back(std::move(r));
      }
    }
    write_reports_csv((fs::path(out_dir) / "fig_accumulator.csv").string(), rows,
                      {"mean_err = accumulator-only contribution; std_err column holds the "
                       "summary-level error"});
    std::cout << "wrote " << (fs::path(out_dir) / "fig_accumulator.csv").string() << "\n";
  }
  if (all || suite == "size-sweep") {
    SegmentStore store = bench_interval_store("zipf", QueryKind::frequency, sc, derive_seed(seed, 41));
    std::vector<ErrorReport> rows;
    for (std::int64_t s : {std::int64_t{16}, std::int64_t{64}, std::int64_t{256}}) {
      IntervalSweepConfig config;
      config.dataset_name = "zipf";
      config.methods = {"coop", "pps", "truncation"};
      config.summary_size = s;
      config.trials = sc.trials;
      config.seed = seed;
      config.interval_lengths = {1, std::min<std::int64_t>(64, sc.n_segments / 2),
                                 std::min<std::int64_t>(512, sc.n_segments / 2)};
      for (auto row : run_interval_sweep(store, config)) {
        row.k_or_filters = "s" + std::to_string(s) + ":k" + row.k_or_filters;
        rows.push_back(std::move(row));
      }
    }
    write_reports_csv((fs::path(out_dir) / "fig_size_sweep.csv").string(), rows, meta);
    std::cout << "wrote " << (fs::path(out_dir) / "fig_size_sweep.csv").string() << "\n";
  }
  if (all || suite == "kt-sweep") {
    std::vector<ErrorReport> rows;
    for (std::int64_t kt : {std::int64_t{64}, std::int64_t{128}, std::int64_t{256},
                            std::int64_t{512}, std::int64_t{1024}}) {
      if (kt > sc.n_segments) continue;
      SyntheticSpec spec;
      spec.kind = SyntheticSpec::Kind::zipf;
      spec.n = sc.n_interval;
      spec.seed = derive_seed(seed, 51);
      SegmentStore store =
          make_synthetic_interval_store(spec, sc.n_segments, QueryKind::frequency, kt);
      IntervalSweepConfig config;
      config.dataset_name = "zipf";
      config.methods = {"coop"};
      config.summary_size = sc.s;
      config.trials = sc.trials;
      config.seed = seed;
      config.interval_lengths = {std::min<std::int64_t>(64, kt)};
      for (auto row : run_interval_sweep(store, config)) {
        row.k_or_filters = "kt" + std::to_string(kt) + ":k" + row.k_or_filters;
        rows.push_back(std::move(row));
      }
    }
    write_reports_csv((fs::path(out_dir) / "fig_kT_sweep.csv").string(), rows, meta);
    std::cout << "wrote " << (fs::path(out_dir) / "fig_kT_sweep.csv").string() << "\n";
  }
  if (all || suite == "hierarchy-base") {
    SegmentStore store = bench_interval_store("zipf", QueryKind::frequency, sc, derive_seed(seed, 61));
    IntervalSweepConfig config;
    config.dataset_name = "zipf";
    config.methods = {"coop", "hierarchy:2", "hierarchy:4", "hierarchy:8"};
    config.summary_size = sc.s;
    config.trials = sc.trials;
    config.seed = seed;
    auto rows = run_interval_sweep(store, config);
    write_reports_csv((fs::path(out_dir) / "fig_hierarchy_base.csv").string(), rows, meta);
    std::cout << "wrote " << (fs::path(out_dir) / "fig_hierarchy_base.csv").string() << "\n";
  }
  if (all || suite == "adversarial") {
    std::vector<ErrorReport> rows;
    const std::int64_t s = 4, h_target = 3;
    std::map<std::string, SummarizerFn> strategies;
    strategies["truncation"] = [&](const Segment& seg) {
      return truncation_summarize(seg, s, QueryKind::frequency);
    };
    auto tracker = std::make_shared<FreqErrorTracker>(std::int64_t{1} << (h_target + 2));
    CoopConfig coop_config;
    coop_config.summary_size = s;
    coop_config.max_interval = std::int64_t{1} << (h_target + 2);
    coop_config.max_segment_weight = static_cast<double>(2 * s);
    strategies["coop"] = [&, tracker](const Segment& seg) {
      return coop_freq_summarize(seg, coop_config, *tracker);
    };
    auto rng = std::make_shared<Rng>(derive_seed(seed, 71));
    strategies["pps"] = [&, rng](const Segment& seg) { return pps_summarize(seg, s, 0.0, *rng); };
    auto rng2 = std::make_shared<Rng>(derive_seed(seed, 72));
    strategies["usample"] = [&, rng2](const Segment& seg) {
      return usample_summarize(seg, s, *rng2);
    };
    strategies["exact"] = [](const Segment& seg) { return exact_summarize(seg); };
    for (const auto& [name, fn] : strategies) {
      AdversaryResult r = run_adversarial(fn, s, h_target);
      ErrorReport row;
      row.dataset = "adversarial";
      row.method = name;
      row.query_type = "frequency";
      row.k_or_filters = "h=" + std::to_string(h_target);
      row.mean_err = r.max_undercount;
      row.trials = r.segments_fed;
      row.seed = seed;
      rows.push_back(std::move(row));
      std::cout << name << ": max undercount " << r.max_undercount << " over "
                << r.segments_fed << " segments\n";
    }
    write_reports_csv((fs::path(out_dir) / "adversarial.csv").string(), rows,
                      {"mean_err column holds the final max accumulated undercount"});
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"precomputed segment-summary aggregation engine"};
  app.require_subcommand(1);

  // gen
  auto* gen = app.add_subcommand("gen", "generate a synthetic dataset CSV");
  std::string gen_kind = "zipf", gen_out = "data.csv";
  std::int64_t gen_n = 1000000, gen_universe = 100000, gen_dim_card = 10;
  double gen_zipf = 1.1;
  int gen_dims = 0;
  std::uint64_t gen_seed = 1;
  gen->add_option("--kind", gen_kind, "zipf | uniform")->check(CLI::IsMember({"zipf", "uniform"}));
  gen->add_option("--n", gen_n, "record count");
  gen->add_option("--out", gen_out, "output CSV path")->required();
  gen->add_option("--zipf-param", gen_zipf, "zipf exponent");
  gen->add_option("--universe", gen_universe, "zipf universe size");
  gen->add_option("--dims", gen_dims, "number of categorical dimensions");
  gen->add_option("--dim-card", gen_dim_card, "values per dimension");
  gen->add_option("--seed", gen_seed, "rng seed");

  // ingest
  auto* ingest = app.add_subcommand("ingest", "partition a CSV into a segment store");
  std::string in_input, in_store, in_mode = "interval", in_function = "frequency";
  std::string in_value_kind = "ordinal", in_value_col = "value", in_time_col = "time";
  std::string in_dims, in_delim = ",";
  std::int64_t in_tg = 1, in_kt = 1024, in_s = 64, in_stotal = 0, in_smin = 1;
  std::uint64_t in_seed = 1;
  ingest->add_option("--input", in_input, "input CSV")->required();
  ingest->add_option("--store", in_store, "output store directory")->required();
  ingest->add_option("--mode", in_mode)->check(CLI::IsMember({"interval", "cube"}));
  ingest->add_option("--function", in_function)->check(CLI::IsMember({"frequency", "rank"}));
  ingest->add_option("--value-kind", in_value_kind)->check(CLI::IsMember({"ordinal", "categorical"}));
  ingest->add_option("--value-col", in_value_col);
  ingest->add_option("--time-col", in_time_col, "empty string uses the row index");
  ingest->add_option("--dims", in_dims, "comma-separated dimension columns");
  ingest->add_option("--tg", in_tg, "time resolution T_G");
  ingest->add_option("--kt", in_kt, "maximum interval length k_T");
  ingest->add_option("--s", in_s);
  ingest->add_option("--s-total", in_stotal);
  ingest->add_option("--s-min", in_smin);
  ingest->add_option("--seed", in_seed);
  ingest->add_option("--delim", in_delim);

  // summarize
  auto* summarize = app.add_subcommand("summarize", "build per-segment summaries");
  std::string su_store, su_out, su_method = "coop", su_hmode = "calct", su_workload;
  std::string su_alloc = "opt", su_bias = "on", su_report;
  std::int64_t su_s = 64, su_stotal = 0, su_smin = 1;
  std::uint64_t su_seed = 1;
  double su_slack = 1.0;
  summarize->add_option("--store", su_store)->required();
  summarize->add_option("--out", su_out)->required();
  summarize->add_option("--method", su_method,
                        "interval: coop|pps|truncation|usample|exact; cube: sb|pps|usample|truncation|exact");
  summarize->add_option("--s", su_s, "per-summary size");
  summarize->add_option("--s-total", su_stotal, "cube total space S_T");
  summarize->add_option("--s-min", su_smin, "cube minimum summary size");
  summarize->add_option("--slack", su_slack, "local error slack r");
  summarize->add_option("--h-mode", su_hmode)->check(CLI::IsMember({"calct", "naive"}));
  summarize->add_option("--workload", su_workload, "workload spec JSON (cube)");
  summarize->add_option("--alloc", su_alloc)->check(CLI::IsMember({"equal", "opt", "prop", "strat"}));
  summarize->add_option("--bias", su_bias)->check(CLI::IsMember({"on", "off"}));
  summarize->add_option("--report", su_report, "allocation report CSV path");
  summarize->add_option("--seed", su_seed);

  // query
  auto* query = app.add_subcommand("query", "answer a query from a summary store");
  std::string q_store, q_type = "interval", q_function = "frequency", q_x, q_acc = "exact";
  std::vector<std::string> q_filters;
  std::int64_t q_t0 = 0, q_t1 = 0, q_topk = 10, q_sa = 1000000;
  double q_q = 0.5;
  std::uint64_t q_seed = 1;
  bool q_machine = false;
  query->add_option("--store", q_store)->required();
  query->add_option("--type", q_type)->check(CLI::IsMember({"interval", "cube"}));
  query->add_option("--function", q_function)
      ->check(CLI::IsMember({"frequency", "rank", "quantile", "topk"}));
  query->add_option("--t0", q_t0, "interval start time (inclusive)");
  query->add_option("--t1", q_t1, "interval end time (exclusive)");
  query->add_option("--filter", q_filters, "cube filter dim=value (repeatable)");
  query->add_option("--x", q_x, "probe value for frequency/rank");
  query->add_option("--q", q_q, "quantile position in [0,1]");
  query->add_option("--k", q_topk, "top-k size");
  query->add_option("--accumulator", q_acc)->check(CLI::IsMember({"exact", "spacesaving", "pps"}));
  query->add_option("--sa", q_sa, "accumulator capacity s_A");
  query->add_option("--seed", q_seed);
  query->add_flag("--machine", q_machine, "print a machine-readable single-line result");

  // bench
  auto* bench = app.add_subcommand("bench", "reproduce the evaluation sweeps");
  std::string b_suite = "all", b_out = "bench_out", b_scale = "desk";
  std::uint64_t b_seed = 1;
  bench->add_option("--suite", b_suite)
      ->check(CLI::IsMember({"interval-freq", "interval-quant", "cube", "lesion", "accumulator",
                             "size-sweep", "kt-sweep", "hierarchy-base", "adversarial", "all"}));
  bench->add_option("--out", b_out)->required();
  bench->add_option("--seed", b_seed);
  bench->add_option("--scale", b_scale)->check(CLI::IsMember({"desk", "tiny"}));

  CLI11_PARSE(app, argc, argv);

  try {
    if (gen->parsed()) {
      return cmd_gen(gen_kind, gen_n, gen_out, gen_zipf, gen_universe, gen_dims, gen_dim_card,
                     gen_seed);
    }
    if (ingest->parsed()) {
      return cmd_ingest(in_input, in_store, in_mode, in_function, in_value_kind, in_value_col,
                        in_time_col, in_dims, in_tg, in_kt, in_s, in_stotal, in_smin, in_seed,
                        in_delim);
    }
    if (summarize->parsed()) {
      return cmd_summarize(su_store, su_out, su_method, su_s, su_stotal, su_smin, su_seed,
                           su_slack, su_hmode, su_workload, su_alloc, su_bias, su_report);
    }
    if (query->parsed()) {
      return cmd_query(q_store, q_type, q_function, q_t0, q_t1, q_filters, q_x, q_q, q_topk,
                       q_acc, q_sa, q_seed, q_machine);
    }
    if (bench->parsed()) {
      return cmd_bench(b_suite, b_out, b_seed, b_scale);
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
