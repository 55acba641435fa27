#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "preagg/ingest.hpp"
#include "preagg/rng.hpp"
#include "preagg/store_io.hpp"

using namespace preagg;
namespace fs = std::filesystem;

namespace {

DatasetConfig interval_config(std::int64_t tg, std::int64_t kt = 8) {
  DatasetConfig c;
  c.mode = Mode::interval;
  c.time_resolution = tg;
  c.max_interval = kt;
  return c;
}

Record rec(double value, std::int64_t time) {
  Record r;
  r.value = ordinal_value(value);
  r.time = time;
  return r;
}

std::string temp_dir(const std::string& name) {
  fs::path p = fs::temp_directory_path() / ("preagg_test_" + name);
  fs::remove_all(p);
  return p.string();
}

}  // namespace

TEST_CASE("partition_by_time buckets by floor(t / T_G)") {
  auto store = partition_by_time({rec(1, 0), rec(2, 4), rec(3, 5)}, interval_config(5));
  REQUIRE(store.size() == 2);
  CHECK(store.segments[0].total_weight() == 2);
  CHECK(store.segments[1].total_weight() == 1);

  CHECK(partition_by_time({}, interval_config(5)).size() == 0);

  std::vector<Record> uniform;
  for (int t = 0; t < 100; ++t) uniform.push_back(rec(t % 7, t));
  auto store10 = partition_by_time(uniform, interval_config(10));
  REQUIRE(store10.size() == 10);
  for (const auto& seg : store10.segments) CHECK(seg.total_weight() == 10);

  CHECK_THROWS_AS(partition_by_time({rec(1, -1)}, interval_config(5)), std::invalid_argument);
}

TEST_CASE("partition_by_time materializes interior empty segments") {
  auto store = partition_by_time({rec(1, 3), rec(2, 27)}, interval_config(5));
  REQUIRE(store.size() == 6);  // indices 0..5
  CHECK(store.base_index == 0);
  CHECK(store.segments[1].empty());
  CHECK(store.total_records() == 2);
}

TEST_CASE("partition_by_cube groups by full dimension vectors") {
  DatasetConfig config;
  config.mode = Mode::cube;
  config.dims = {"c1", "c2"};
  Record a1{ordinal_value(1), 0, {0, 0}};
  Record a2{ordinal_value(2), 0, {0, 0}};
  Record b{ordinal_value(3), 0, {0, 1}};
  auto store = partition_by_cube({a1, a2, b}, config);
  REQUIRE(store.size() == 2);
  CHECK(store.segments[0].total_weight() == 2);
  CHECK(store.segments[1].total_weight() == 1);
  CHECK(store.find_key({0, 0}) == 0);
  CHECK(store.find_key({0, 1}) == 1);
  CHECK(store.find_key({1, 1}) == -1);

  auto single = partition_by_cube({a1}, config);
  CHECK(single.size() == 1);
}

TEST_CASE("partitioning is insensitive to record order") {
  Rng rng(3);
  std::vector<Record> records;
  for (int i = 0; i < 500; ++i) {
    records.push_back(rec(static_cast<double>(rng.next_below(20)), rng.next_below(100)));
  }
  auto a = partition_by_time(records, interval_config(10));
  // reverse order
  std::vector<Record> reversed(records.rbegin(), records.rend());
  auto b = partition_by_time(reversed, interval_config(10));
  CHECK(a == b);
}

TEST_CASE("records_from_csv parses values, time, and dimensions") {
  std::istringstream in("value,time,region\n1.5,0,east\n2.5,7,west\nbad,9,east\n");
  CsvTable table = read_csv(in, ',');
  DatasetConfig config;
  config.mode = Mode::cube;
  config.dims = {"region"};
  CsvOptions options;
  IngestResult result = records_from_csv(table, config, options);
  REQUIRE(result.records.size() == 2);
  CHECK(result.skipped_rows == 1);  // "bad" is not numeric
  CHECK(result.dim_dicts[0].size() == 2);
  CHECK(result.records[0].dims[0] == result.dim_dicts[0].id_of("east"));
}

TEST_CASE("segment store round-trips bit-exactly") {
  Rng rng(17);
  std::vector<Record> records;
  for (int i = 0; i < 2000; ++i) {
    records.push_back(rec(rng.next_double(), rng.next_below(64)));
  }
  DatasetConfig config = interval_config(8, 4);
  config.seed = 99;
  auto store = partition_by_time(records, config);

  std::string dir = temp_dir("roundtrip");
  save_store(store, dir);
  auto loaded = load_store(dir);
  CHECK(loaded == store);
  CHECK(loaded.config.seed == 99);

  // saving the loaded store reproduces identical bytes
  std::string dir2 = temp_dir("roundtrip2");
  save_store(loaded, dir2);
  for (const auto& entry : fs::directory_iterator(dir)) {
    std::ifstream f1(entry.path(), std::ios::binary);
    std::ifstream f2(fs::path(dir2) / entry.path().filename(), std::ios::binary);
    std::stringstream b1, b2;
    b1 << f1.rdbuf();
    b2 << f2.rdbuf();
    CHECK(b1.str() == b2.str());
  }
  fs::remove_all(dir);
  fs::remove_all(dir2);
}

TEST_CASE("store loading rejects bad versions and truncation") {
  auto store = partition_by_time({rec(1, 0), rec(2, 9)}, interval_config(5));
  std::string dir = temp_dir("badstore");
  save_store(store, dir);

  SUBCASE("missing store") {
    CHECK_THROWS_AS(load_store(dir + "_nope"), StoreNotFoundError);
  }
  SUBCASE("wrong version tag") {
    std::ofstream out(fs::path(dir) / "manifest.txt", std::ios::trunc);
    out << "preagg-store-version=999\nmode=interval\n";
    out.close();
    CHECK_THROWS_AS(load_store(dir), StoreFormatError);
  }
  SUBCASE("truncated segment file") {
    fs::path seg = fs::path(dir) / "seg_000000.bin";
    auto size = fs::file_size(seg);
    fs::resize_file(seg, size - 1);
    CHECK_THROWS_AS(load_store(dir), StoreFormatError);
  }
  fs::remove_all(dir);
}

TEST_CASE("summary store round-trips") {
  SummaryStore store;
  store.config = interval_config(5, 4);
  store.method = "truncation";
  Summary s;
  s.entries = {{ordinal_value(1.0), 2.5}, {ordinal_value(3.0), 1.0}};
  s.size_budget = 2;
  s.method = SummaryMethod::truncation;
  s.threshold = 1.75;
  store.summaries = {s, Summary{}};

  std::string dir = temp_dir("sumstore");
  save_summary_store(store, dir);
  SummaryStore loaded = load_summary_store(dir);
  CHECK(loaded.method == "truncation");
  REQUIRE(loaded.summaries.size() == 2);
  CHECK(loaded.summaries[0].entries == s.entries);
  CHECK(loaded.summaries[0].threshold == s.threshold);
  fs::remove_all(dir);
}

TEST_CASE("dataset config validation") {
  DatasetConfig c;
  c.mode = Mode::interval;
  c.time_resolution = 0;
  CHECK_THROWS_AS(c.validate(), std::invalid_argument);
  c.time_resolution = 5;
  c.query_kind = QueryKind::rank;
  c.value_kind = ValueKind::categorical;
  CHECK_THROWS_AS(c.validate(), std::invalid_argument);
}

TEST_CASE("dense cube data yields the full cross product of cells") {
  DatasetConfig config;
  config.mode = Mode::cube;
  config.dims = {"a", "b", "c", "d"};
  std::vector<Record> records;
  const Value v = 2;  // values per dimension
  for (Value i = 0; i < v * v * v * v; ++i) {
    Record r;
    r.value = ordinal_value(static_cast<double>(i));
    r.dims = {i % v, (i / v) % v, (i / (v * v)) % v, (i / (v * v * v)) % v};
    records.push_back(r);
  }
  auto store = partition_by_cube(records, config);
  CHECK(store.size() == static_cast<std::size_t>(v * v * v * v));  // v^4 segments
}

TEST_CASE("an empty time column name buckets records by row index") {
  std::istringstream in("value\n1.0\n2.0\n3.0\n4.0\n");
  CsvTable table = read_csv(in, ',');
  DatasetConfig config = interval_config(2);
  CsvOptions options;
  options.time_column = "";
  IngestResult result = records_from_csv(table, config, options);
  REQUIRE(result.records.size() == 4);
  CHECK(result.records[0].time == 0);
  CHECK(result.records[3].time == 3);
  auto store = partition_by_time(result.records, config);
  CHECK(store.size() == 2);
}
