#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>

#include "preagg/bench.hpp"
#include "preagg/cube_opt.hpp"
#include "preagg/rng.hpp"
#include "preagg/pps.hpp"
#include "preagg/store_io.hpp"

using namespace preagg;
namespace fs = std::filesystem;

namespace {

SegmentStore tiny_cube(std::uint64_t seed = 5, std::int64_t n = 30000) {
  SyntheticSpec spec;
  spec.kind = SyntheticSpec::Kind::zipf;
  spec.n = n;
  spec.universe = 500;
  spec.n_dims = 3;
  spec.dim_cardinality = 5;
  spec.seed = seed;
  return make_synthetic_cube_store(spec, QueryKind::frequency, {"d0", "d1", "d2"});
}

}  // namespace

TEST_CASE("workload sampling: p=0 always yields the whole-cube query") {
  SegmentStore store = tiny_cube();
  WorkloadSpec spec;
  spec.dim_probability = 0.0;
  spec.samples = 50;
  spec.seed = 3;
  WorkloadSample sample = sample_workload(spec, store);
  REQUIRE(sample.queries.size() == 1);
  CHECK(sample.queries[0].filters.empty());
  CHECK(sample.queries[0].multiplicity == 50);
  CHECK(sample.queries[0].segments.size() == store.size());
}

TEST_CASE("workload sampling: p=1 on one dimension splits by value") {
  // single-dimension store with two values
  std::vector<Record> records;
  for (int i = 0; i < 100; ++i) {
    Record r;
    r.value = ordinal_value(static_cast<double>(i % 7));
    r.dims = {i % 2};
    records.push_back(r);
  }
  DatasetConfig config;
  config.mode = Mode::cube;
  config.dims = {"d0"};
  SegmentStore store = partition_by_cube(records, config);
  store.dim_dicts.push_back(ValueDict::from_tokens({"a", "b"}));

  WorkloadSpec spec;
  spec.dim_probability = 1.0;
  spec.samples = 4000;
  spec.seed = 4;
  WorkloadSample sample = sample_workload(spec, store);
  REQUIRE(sample.queries.size() == 2);
  for (const auto& q : sample.queries) {
    double share = static_cast<double>(q.multiplicity) / 4000.0;
    CHECK(std::abs(share - 0.5) < 0.03);  // Monte Carlo convergence
  }
}

TEST_CASE("workload sampling is deterministic under a fixed seed") {
  SegmentStore store = tiny_cube();
  WorkloadSpec spec;
  spec.samples = 500;
  spec.seed = 17;
  WorkloadSample a = sample_workload(spec, store);
  WorkloadSample b = sample_workload(spec, store);
  REQUIRE(a.queries.size() == b.queries.size());
  for (std::size_t i = 0; i < a.queries.size(); ++i) {
    CHECK(a.queries[i].filters == b.queries[i].filters);
    CHECK(a.queries[i].multiplicity == b.queries[i].multiplicity);
  }
}

TEST_CASE("allocation scores: whole-cube query weights by squared segment size") {
  // two segments, one whole-cube query
  std::vector<Record> records;
  for (int i = 0; i < 300; ++i) {
    Record r;
    r.value = ordinal_value(static_cast<double>(i));
    r.dims = {i < 100 ? 0 : 1};
    records.push_back(r);
  }
  DatasetConfig config;
  config.mode = Mode::cube;
  config.dims = {"d0"};
  SegmentStore store = partition_by_cube(records, config);
  store.dim_dicts.push_back(ValueDict::from_tokens({"a", "b"}));

  WorkloadSpec spec;
  spec.dim_probability = 0.0;
  spec.samples = 10;
  spec.seed = 5;
  auto scores = allocation_scores(store, sample_workload(spec, store));
  REQUIRE(scores.size() == 2);
  CHECK(scores[0] == doctest::Approx(100.0 * 100.0 / (300.0 * 300.0)));
  CHECK(scores[1] == doctest::Approx(200.0 * 200.0 / (300.0 * 300.0)));

  // identical segments under a symmetric workload score equally
  SegmentStore sym = tiny_cube(8);
  WorkloadSpec sym_spec;
  sym_spec.samples = 2000;
  sym_spec.seed = 6;
  auto sym_scores = allocation_scores(sym, sample_workload(sym_spec, sym));
  CHECK(sym_scores.size() == sym.size());
}

TEST_CASE("allocate_sizes: equal scores split evenly, cube-root ratios otherwise") {
  CHECK(allocate_sizes({1.0, 1.0, 1.0, 1.0}, 100, 0) ==
        std::vector<std::int64_t>{25, 25, 25, 25});

  auto real = allocate_real_budget({std::cbrt(1.0), std::cbrt(4.0)}, 100, 0);
  CHECK(real[0] == doctest::Approx(38.6473).epsilon(1e-3));
  CHECK(real[1] == doctest::Approx(61.3527).epsilon(1e-3));

  auto clamped = allocate_sizes({0.0, 8.0, 8.0}, 26, 8);
  CHECK(clamped[0] == 8);  // zero-score segment pinned at s_min
  CHECK(clamped[0] + clamped[1] + clamped[2] == 26);

  CHECK_THROWS_AS(allocate_sizes({1.0, 1.0}, 3, 2), std::invalid_argument);
}

TEST_CASE("allocation is monotone in the score (continuous solution)") {
  Rng rng(7);
  for (int trial = 0; trial < 200; ++trial) {
    int n = 3 + static_cast<int>(rng.next_below(6));
    std::vector<double> scores(n);
    for (auto& a : scores) a = 0.1 + rng.next_double() * 10.0;
    std::vector<double> weights(n);
    for (int i = 0; i < n; ++i) weights[i] = std::cbrt(scores[i]);
    auto base = allocate_real_budget(weights, 200, 1);
    std::size_t bump = rng.next_below(n);
    scores[bump] *= 1.0 + rng.next_double() * 3.0;
    for (int i = 0; i < n; ++i) weights[i] = std::cbrt(scores[i]);
    auto bumped = allocate_real_budget(weights, 200, 1);
    CHECK(bumped[bump] >= base[bump] - 1e-9);
  }
}

TEST_CASE("integer rounding preserves the exact total") {
  Rng rng(8);
  for (int trial = 0; trial < 200; ++trial) {
    int n = 2 + static_cast<int>(rng.next_below(10));
    std::vector<double> weights(n);
    for (auto& w : weights) w = rng.next_double() * 5.0;
    std::int64_t budget = n + static_cast<std::int64_t>(rng.next_below(400));
    auto sizes = allocate_integer_budget(weights, budget, 1);
    std::int64_t total = 0;
    for (auto s : sizes) {
      CHECK(s >= 1);
      total += s;
    }
    CHECK(total == budget);
  }
}

TEST_CASE("effective weight is the positive-part sum") {
  Segment seg = Segment::from_counts({{0, 3}, {1, 1}});
  CHECK(effective_weight(seg, 0.0) == doctest::Approx(4.0));
  CHECK(effective_weight(seg, 1.0) == doctest::Approx(2.0));
  CHECK(effective_weight(seg, 3.0) == doctest::Approx(0.0));
  CHECK(effective_weight(seg, 99.0) == doctest::Approx(0.0));
  CHECK_THROWS_AS(effective_weight(seg, -1.0), std::invalid_argument);

  // convex, piecewise linear, non-increasing
  Segment mix = Segment::from_counts({{0, 7}, {1, 4}, {2, 2}, {3, 1}});
  double prev = effective_weight(mix, 0.0);
  double prev_slope = -1e18;
  for (double b = 0.25; b <= 8.0; b += 0.25) {
    double cur = effective_weight(mix, b);
    CHECK(cur <= prev + 1e-12);
    double slope = (cur - prev) / 0.25;
    CHECK(slope >= prev_slope - 1e-9);  // slopes non-decreasing => convex
    prev_slope = slope;
    prev = cur;
  }
}

TEST_CASE("bias optimizer: singleton-heavy segment drives b toward 1") {
  std::vector<Record> records;
  for (int i = 0; i < 100; ++i) {
    Record r;
    r.value = ordinal_value(static_cast<double>(i));
    r.dims = {0};
    records.push_back(r);
  }
  DatasetConfig config;
  config.mode = Mode::cube;
  config.dims = {"d0"};
  SegmentStore store = partition_by_cube(records, config);

  std::vector<std::int64_t> sizes = {1};
  BiasResult result = optimize_biases(store, sizes);
  // J(0) = 100^2/4 = 2500; J(1) = 1
  CHECK(bias_objective(store, sizes, {0.0}) == doctest::Approx(2500.0));
  CHECK(result.objective <= 1.0 + 1e-6);
  CHECK(result.biases[0] > 0.9);
  CHECK(result.biases[0] <= 1.0);
}

TEST_CASE("bias optimizer beats the grid oracle on random instances") {
  Rng rng(9);
  for (int trial = 0; trial < 25; ++trial) {
    int n_segments = 2 + static_cast<int>(rng.next_below(5));
    std::vector<Record> records;
    for (int g = 0; g < n_segments; ++g) {
      int values = 5 + static_cast<int>(rng.next_below(40));
      for (int i = 0; i < values; ++i) {
        int reps = 1 + static_cast<int>(rng.next_below(6));
        for (int k = 0; k < reps; ++k) {
          Record r;
          r.value = ordinal_value(static_cast<double>(i));
          r.dims = {g};
          records.push_back(r);
        }
      }
    }
    DatasetConfig config;
    config.mode = Mode::cube;
    config.dims = {"d0"};
    SegmentStore store = partition_by_cube(records, config);
    std::vector<std::int64_t> sizes;
    for (std::size_t i = 0; i < store.size(); ++i) {
      sizes.push_back(1 + static_cast<std::int64_t>(rng.next_below(6)));
    }

    BiasResult result = optimize_biases(store, sizes);
    double j0 = bias_objective(store, sizes, std::vector<double>(store.size(), 0.0));
    CHECK(result.objective <= j0 + 1e-9);

    // coordinate-wise 201-point grid: no single-coordinate move beats b*
    for (std::size_t i = 0; i < store.size(); ++i) {
      double ub = 0.0;
      for (const auto& [v, c] : store.segments[i].entries()) {
        ub = std::max(ub, static_cast<double>(c));
      }
      std::vector<double> probe = result.biases;
      for (int g = 0; g <= 200; ++g) {
        probe[i] = ub * static_cast<double>(g) / 200.0;
        double j = bias_objective(store, sizes, probe);
        CHECK(result.objective <= j + 1e-6 * std::max(1.0, std::abs(j)));
      }
    }
  }
}

TEST_CASE("bias objective is convex along random lines") {
  SegmentStore store = tiny_cube(11, 20000);
  std::vector<std::int64_t> sizes(store.size(), 3);
  Rng rng(12);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<double> a(store.size()), b(store.size());
    for (std::size_t i = 0; i < store.size(); ++i) {
      double ub = 4.0;
      a[i] = rng.next_double() * ub;
      b[i] = rng.next_double() * ub;
    }
    double ja = bias_objective(store, sizes, a);
    double jb = bias_objective(store, sizes, b);
    for (double t : {0.25, 0.5, 0.75}) {
      std::vector<double> mid(store.size());
      for (std::size_t i = 0; i < store.size(); ++i) mid[i] = (1 - t) * a[i] + t * b[i];
      double jm = bias_objective(store, sizes, mid);
      CHECK(jm <= (1 - t) * ja + t * jb + 1e-9 * std::max(1.0, ja + jb));
    }
  }
}

TEST_CASE("build_cube produces a byte-identical store under a fixed seed") {
  SegmentStore store = tiny_cube(13, 20000);
  CubeBuildOptions options;
  options.total_space = static_cast<std::int64_t>(store.size()) * 4;
  options.s_min = 1;
  options.seed = 101;
  options.workload.samples = 500;
  options.workload.seed = 7;

  SummaryStore a = build_cube(store, options);
  SummaryStore b = build_cube(store, options);
  std::string dir_a = (fs::temp_directory_path() / "preagg_cube_a").string();
  std::string dir_b = (fs::temp_directory_path() / "preagg_cube_b").string();
  fs::remove_all(dir_a);
  fs::remove_all(dir_b);
  save_summary_store(a, dir_a);
  save_summary_store(b, dir_b);
  for (const auto& entry : fs::directory_iterator(dir_a)) {
    std::ifstream f1(entry.path(), std::ios::binary);
    std::ifstream f2(fs::path(dir_b) / entry.path().filename(), std::ios::binary);
    std::stringstream s1, s2;
    s1 << f1.rdbuf();
    s2 << f2.rdbuf();
    CHECK(s1.str() == s2.str());
  }
  fs::remove_all(dir_a);
  fs::remove_all(dir_b);

  // summary budget respected
  std::int64_t total = 0;
  for (auto s : a.allocated_sizes) total += s;
  CHECK(total == options.total_space);
  for (std::size_t i = 0; i < a.summaries.size(); ++i) {
    CHECK(static_cast<std::int64_t>(a.summaries[i].entries.size()) <= a.allocated_sizes[i]);
  }

  CubeBuildOptions bad = options;
  bad.total_space = static_cast<std::int64_t>(store.size()) - 1;
  CHECK_THROWS_WITH_AS(build_cube(store, bad), doctest::Contains("infeasible budget"),
                       std::invalid_argument);
}

TEST_CASE("quantile-mode cubes get all-zero biases") {
  SyntheticSpec spec;
  spec.kind = SyntheticSpec::Kind::uniform;
  spec.n = 20000;
  spec.n_dims = 2;
  spec.dim_cardinality = 4;
  spec.seed = 14;
  SegmentStore store = make_synthetic_cube_store(spec, QueryKind::rank, {"d0", "d1"});
  std::vector<std::int64_t> sizes(store.size(), 4);
  BiasResult result = optimize_biases(store, sizes);
  for (double b : result.biases) CHECK(b == 0.0);
}

TEST_CASE("workload spec round-trips through JSON") {
  WorkloadSpec spec;
  spec.dim_probability = 0.35;
  spec.samples = 1234;
  spec.seed = 99;
  spec.per_dim["d1"] = 0.8;
  std::string path = (fs::temp_directory_path() / "preagg_workload.json").string();
  save_workload_spec(spec, path);
  WorkloadSpec loaded = load_workload_spec(path);
  CHECK(loaded.dim_probability == doctest::Approx(0.35));
  CHECK(loaded.samples == 1234);
  CHECK(loaded.seed == 99);
  CHECK(loaded.per_dim.at("d1") == doctest::Approx(0.8));
  fs::remove(path);
}

TEST_CASE("unbiased pps cube: empirical query MSE respects the variance bound") {
  // fixed whole-cube query, repeated seeded builds with b=0:
  // E[err(x)^2] <= (1/4) sum (n_i/s_i)^2, checked with 1.1 slack
  SegmentStore store = tiny_cube(21, 15000);
  const std::int64_t s = 4;
  std::vector<std::int64_t> ids;
  for (std::size_t i = 0; i < store.size(); ++i) ids.push_back(static_cast<std::int64_t>(i));

  double bound = 0.0;
  for (const auto& seg : store.segments) {
    double ratio = static_cast<double>(seg.total_weight()) / static_cast<double>(s);
    bound += ratio * ratio;
  }
  bound *= 0.25 * 1.1;

  std::vector<Value> probes;
  for (int v = 1; v <= 30; ++v) probes.push_back(ordinal_value(static_cast<double>(v)));
  std::vector<double> truth(probes.size(), 0.0);
  for (std::size_t p = 0; p < probes.size(); ++p) {
    for (const auto& seg : store.segments) {
      truth[p] += static_cast<double>(seg.frequency(probes[p]));
    }
  }

  const int builds = 2000;
  std::vector<double> sq_err(probes.size(), 0.0);
  for (int t = 0; t < builds; ++t) {
    std::vector<Summary> summaries;
    summaries.reserve(store.size());
    for (std::size_t i = 0; i < store.size(); ++i) {
      Rng rng(derive_seed(777 + t, i));
      summaries.push_back(pps_summarize(store.segments[i], s, 0.0, rng));
    }
    for (std::size_t p = 0; p < probes.size(); ++p) {
      double est = 0.0;
      for (const auto& summary : summaries) est += summary.frequency(probes[p]);
      double err = est - truth[p];
      sq_err[p] += err * err;
    }
  }
  for (std::size_t p = 0; p < probes.size(); ++p) {
    CHECK(sq_err[p] / builds <= bound);
  }
}

TEST_CASE("segments outside every sampled query score zero") {
  std::vector<Record> records;
  for (int i = 0; i < 60; ++i) {
    Record r;
    r.value = ordinal_value(static_cast<double>(i));
    r.dims = {i % 3};
    records.push_back(r);
  }
  DatasetConfig config;
  config.mode = Mode::cube;
  config.dims = {"d0"};
  SegmentStore store = partition_by_cube(records, config);

  WorkloadSample sample;
  sample.requested = 4;
  SampledQuery q;
  q.filters = {{0, 0}};
  q.segments = {0};
  q.total_weight = store.segments[0].total_weight();
  q.multiplicity = 4;
  sample.queries.push_back(q);

  auto scores = allocation_scores(store, sample);
  CHECK(scores[0] > 0.0);
  CHECK(scores[1] == 0.0);
  CHECK(scores[2] == 0.0);
}

TEST_CASE("uniform cube builds equal sizes and valid summaries") {
  // 2x2 cube, every cell identical: 20 values x 5 records each
  std::vector<Record> records;
  for (Value a = 0; a < 2; ++a) {
    for (Value b = 0; b < 2; ++b) {
      for (int i = 0; i < 20; ++i) {
        for (int rep = 0; rep < 5; ++rep) {
          Record r;
          r.value = ordinal_value(static_cast<double>(i));
          r.dims = {a, b};
          records.push_back(r);
        }
      }
    }
  }
  DatasetConfig config;
  config.mode = Mode::cube;
  config.dims = {"d0", "d1"};
  SegmentStore store = partition_by_cube(records, config);
  store.dim_dicts.push_back(ValueDict::from_tokens({"a0", "a1"}));
  store.dim_dicts.push_back(ValueDict::from_tokens({"b0", "b1"}));

  CubeBuildOptions options;
  options.total_space = 32;
  options.s_min = 1;
  options.seed = 5;
  options.workload.dim_probability = 0.0;  // whole-cube workload: fully symmetric
  options.workload.samples = 100;
  options.workload.seed = 6;
  SummaryStore out = build_cube(store, options);
  for (auto s : out.allocated_sizes) CHECK(s == 8);  // equal scores, equal split
  for (std::size_t i = 0; i < out.size(); ++i) {
    CHECK(static_cast<std::int64_t>(out.summaries[i].entries.size()) <= 8);
    double h = out.summaries[i].threshold;
    for (const auto& [v, c] : store.segments[i].entries()) {
      CHECK(std::abs(out.summaries[i].frequency(v) - static_cast<double>(c)) <=
            h + out.allocated_biases[i] + 1e-9);
    }
  }
  // the whole-cube bias objective never got worse than b = 0
  double j0 = bias_objective(store, out.allocated_sizes,
                             std::vector<double>(store.size(), 0.0));
  CHECK(bias_objective(store, out.allocated_sizes, out.allocated_biases) <= j0 + 1e-9);
}

TEST_CASE("cube summary stores round-trip with keys, dictionaries, and allocation") {
  SegmentStore store = tiny_cube(31, 15000);
  CubeBuildOptions options;
  options.total_space = static_cast<std::int64_t>(store.size()) * 3;
  options.s_min = 1;
  options.seed = 32;
  options.workload.samples = 300;
  options.workload.seed = 33;
  SummaryStore built = build_cube(store, options);

  std::string dir = (fs::temp_directory_path() / "preagg_cube_roundtrip").string();
  fs::remove_all(dir);
  save_summary_store(built, dir);
  SummaryStore loaded = load_summary_store(dir);
  CHECK(loaded.method == built.method);
  CHECK(loaded.keys == built.keys);
  CHECK(loaded.summaries == built.summaries);
  CHECK(loaded.allocated_sizes == built.allocated_sizes);
  CHECK(loaded.allocated_biases == built.allocated_biases);
  CHECK(loaded.allocation_scores.size() == built.allocation_scores.size());
  CHECK(loaded.dim_dicts.size() == built.dim_dicts.size());
  fs::remove_all(dir);
}
