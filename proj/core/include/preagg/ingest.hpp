#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "preagg/model.hpp"
#include "preagg/value.hpp"

namespace preagg {

enum class Mode { interval, cube };
enum class ValueKind { ordinal, categorical };

Mode mode_from_string(const std::string& s);
std::string to_string(Mode m);
ValueKind value_kind_from_string(const std::string& s);
std::string to_string(ValueKind k);

struct DatasetConfig {
  Mode mode = Mode::interval;
  QueryKind query_kind = QueryKind::frequency;
  ValueKind value_kind = ValueKind::ordinal;
  std::int64_t time_resolution = 0;    // T_G (interval mode)
  std::int64_t max_interval = 1;       // k_T, in segments
  std::vector<std::string> dims;       // cube mode
  std::int64_t total_space = 0;        // S_T (cube mode)
  std::int64_t summary_size = 64;      // s
  std::int64_t min_summary_size = 1;   // s_min
  std::uint64_t seed = 0;

  void validate() const;
};

/// One input record: a value of interest, an optional timestamp, and the
/// categorical dimension ids (cube mode).
struct Record {
  Value value = 0;
  std::int64_t time = 0;
  std::vector<Value> dims;
};

using SegmentKey = std::vector<Value>;  // one id per dimension

std::string format_segment_key(const SegmentKey& key);

/// Disjoint partitioning of a dataset into atomic segments, in a fixed
/// deterministic order: consecutive time buckets (interval mode, including
/// empty buckets between the first and last non-empty ones) or
/// lexicographically sorted dimension-value combinations (cube mode, observed
/// combinations only). Immutable once built; safe for concurrent readers.
class SegmentStore {
 public:
  DatasetConfig config;
  std::vector<Segment> segments;
  // Interval mode: segment i covers times [(base_index+i)*T_G, (base_index+i+1)*T_G).
  std::int64_t base_index = 0;
  // Cube mode: keys[i] is the dimension-value vector of segments[i], sorted.
  std::vector<SegmentKey> keys;
  ValueDict value_dict;                // categorical value mode only
  std::vector<ValueDict> dim_dicts;    // one per dimension, cube mode

  std::size_t size() const { return segments.size(); }
  std::int64_t total_records() const;

  /// Cube mode: index of the segment with this exact key, or -1.
  std::int64_t find_key(const SegmentKey& key) const;

  bool operator==(const SegmentStore& other) const;
};

/// Buckets records by floor(t / time_resolution). Empty buckets between the
/// smallest and largest observed index are materialized so prefix indices
/// stay aligned. Negative timestamps are rejected.
SegmentStore partition_by_time(const std::vector<Record>& records, const DatasetConfig& config);

/// One segment per observed dimension-value combination; no empty segments.
SegmentStore partition_by_cube(const std::vector<Record>& records, const DatasetConfig& config);

/// Raw CSV rows split into columns, before value interning.
struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
  std::size_t skipped_rows = 0;  // rows with missing/unparseable fields

  std::int64_t column_index(const std::string& name) const;
};

struct CsvOptions {
  char delimiter = ',';
  std::string value_column = "value";
  std::string time_column = "time";  // ignored in cube mode; "" = row index
};

CsvTable read_csv(std::istream& in, char delimiter);
CsvTable read_csv_file(const std::string& path, char delimiter);

/// Turns a parsed CSV into records plus the dictionaries referenced by ids.
/// Ordinal values parse as doubles (NaN and unparseable rows are skipped and
/// counted); categorical values are interned by lexicographic rank.
struct IngestResult {
  std::vector<Record> records;
  ValueDict value_dict;
  std::vector<ValueDict> dim_dicts;
  std::size_t skipped_rows = 0;
};

IngestResult records_from_csv(const CsvTable& table, const DatasetConfig& config,
                              const CsvOptions& options);

/// Full pipeline: CSV file -> partitioned store.
SegmentStore ingest_csv(const std::string& path, DatasetConfig config, const CsvOptions& options);

}  // namespace preagg
