#include "preagg/ingest.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>

namespace preagg {

Mode mode_from_string(const std::string& s) {
  if (s == "interval") return Mode::interval;
  if (s == "cube") return Mode::cube;
  throw std::invalid_argument("unknown mode: " + s);
}

std::string to_string(Mode m) { return m == Mode::interval ? "interval" : "cube"; }

ValueKind value_kind_from_string(const std::string& s) {
  if (s == "ordinal") return ValueKind::ordinal;
  if (s == "categorical") return ValueKind::categorical;
  throw std::invalid_argument("unknown value kind: " + s);
}

std::string to_string(ValueKind k) {
  return k == ValueKind::ordinal ? "ordinal" : "categorical";
}

void DatasetConfig::validate() const {
  if (mode == Mode::interval && time_resolution <= 0) {
    throw std::invalid_argument("interval mode requires time_resolution > 0");
  }
  if (max_interval < 1) throw std::invalid_argument("max_interval must be >= 1");
  if (summary_size < 0) throw std::invalid_argument("summary_size must be >= 0");
  if (min_summary_size > summary_size && mode == Mode::interval) {
    throw std::invalid_argument("min_summary_size must be <= summary_size");
  }
  if (mode == Mode::cube && dims.empty()) {
    throw std::invalid_argument("cube mode requires at least one dimension");
  }
  if (query_kind == QueryKind::rank && value_kind == ValueKind::categorical) {
    throw std::invalid_argument("rank queries require an ordered (ordinal) value domain");
  }
}

std::string format_segment_key(const SegmentKey& key) {
  std::string out;
  for (std::size_t i = 0; i < key.size(); ++i) {
    if (i > 0) out += ',';
    out += std::to_string(key[i]);
  }
  return out;
}

std::int64_t SegmentStore::total_records() const {
  std::int64_t total = 0;
  for (const auto& seg : segments) total += seg.total_weight();
  return total;
}

std::int64_t SegmentStore::find_key(const SegmentKey& key) const {
  auto it = std::lower_bound(keys.begin(), keys.end(), key);
  if (it == keys.end() || *it != key) return -1;
  return it - keys.begin();
}

bool SegmentStore::operator==(const SegmentStore& other) const {
  return segments == other.segments && base_index == other.base_index &&
         keys == other.keys && value_dict == other.value_dict &&
         dim_dicts == other.dim_dicts;
}

SegmentStore partition_by_time(const std::vector<Record>& records, const DatasetConfig& config) {
  config.validate();
  SegmentStore store;
  store.config = config;
  if (records.empty()) return store;

  std::int64_t min_idx = std::numeric_limits<std::int64_t>::max();
  std::int64_t max_idx = std::numeric_limits<std::int64_t>::min();
  for (const auto& r : records) {
    if (r.time < 0) throw std::invalid_argument("negative timestamp");
    std::int64_t idx = r.time / config.time_resolution;
    min_idx = std::min(min_idx, idx);
    max_idx = std::max(max_idx, idx);
  }

  std::vector<std::vector<std::pair<Value, std::int64_t>>> buckets(
      static_cast<std::size_t>(max_idx - min_idx + 1));
  for (const auto& r : records) {
    std::int64_t idx = r.time / config.time_resolution - min_idx;
    buckets[static_cast<std::size_t>(idx)].emplace_back(r.value, 1);
  }

  store.base_index = min_idx;
  store.segments.reserve(buckets.size());
  for (auto& b : buckets) {
    store.segments.push_back(Segment::from_counts(std::move(b)));
  }
  return store;
}

SegmentStore partition_by_cube(const std::vector<Record>& records, const DatasetConfig& config) {
  config.validate();
  std::map<SegmentKey, std::vector<std::pair<Value, std::int64_t>>> cells;
  for (const auto& r : records) {
    if (r.dims.size() != config.dims.size()) {
      throw std::invalid_argument("record dimension count mismatch");
    }
    cells[r.dims].emplace_back(r.value, 1);
  }
  SegmentStore store;
  store.config = config;
  store.keys.reserve(cells.size());
  store.segments.reserve(cells.size());
  for (auto& [key, counts] : cells) {
    store.keys.push_back(key);
    store.segments.push_back(Segment::from_counts(std::move(counts)));
  }
  return store;
}

std::int64_t CsvTable::column_index(const std::string& name) const {
  for (std::size_t i = 0; i < header.size(); ++i) {
    if (header[i] == name) return static_cast<std::int64_t>(i);
  }
  return -1;
}

namespace {

std::vector<std::string> split_line(const std::string& line, char delim) {
  std::vector<std::string> fields;
  std::size_t start = 0;
  while (true) {
    std::size_t pos = line.find(delim, start);
    if (pos == std::string::npos) {
      fields.push_back(line.substr(start));
      break;
    }
    fields.push_back(line.substr(start, pos - start));
    start = pos + 1;
  }
  return fields;
}

bool parse_double(const std::string& s, double& out) {
  const char* begin = s.data();
  const char* end = begin + s.size();
  auto [ptr, ec] = std::from_chars(begin, end, out);
  return ec == std::errc() && ptr == end && !std::isnan(out);
}

bool parse_int(const std::string& s, std::int64_t& out) {
  const char* begin = s.data();
  const char* end = begin + s.size();
  auto [ptr, ec] = std::from_chars(begin, end, out);
  return ec == std::errc() && ptr == end;
}

}  // namespace

CsvTable read_csv(std::istream& in, char delimiter) {
  CsvTable table;
  std::string line;
  if (!std::getline(in, line)) return table;
  if (!line.empty() && line.back() == '\r') line.pop_back();
  table.header = split_line(line, delimiter);
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    auto fields = split_line(line, delimiter);
    if (fields.size() != table.header.size()) {
      ++table.skipped_rows;
      continue;
    }
    table.rows.push_back(std::move(fields));
  }
  return table;
}

CsvTable read_csv_file(const std::string& path, char delimiter) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open input file: " + path);
  return read_csv(in, delimiter);
}

IngestResult records_from_csv(const CsvTable& table, const DatasetConfig& config,
                              const CsvOptions& options) {
  IngestResult result;
  result.skipped_rows = table.skipped_rows;

  std::int64_t value_col = table.column_index(options.value_column);
  if (value_col < 0) {
    throw std::invalid_argument("value column not found: " + options.value_column);
  }
  std::int64_t time_col = -1;
  if (config.mode == Mode::interval && !options.time_column.empty()) {
    time_col = table.column_index(options.time_column);
  }
  std::vector<std::int64_t> dim_cols;
  for (const auto& d : config.dims) {
    std::int64_t c = table.column_index(d);
    if (c < 0) throw std::invalid_argument("dimension column not found: " + d);
    dim_cols.push_back(c);
  }

  if (config.value_kind == ValueKind::categorical) {
    std::vector<std::string> tokens;
    tokens.reserve(table.rows.size());
    for (const auto& row : table.rows) tokens.push_back(row[value_col]);
    result.value_dict = ValueDict::from_tokens(std::move(tokens));
  }
  for (std::size_t d = 0; d < dim_cols.size(); ++d) {
    std::vector<std::string> tokens;
    tokens.reserve(table.rows.size());
    for (const auto& row : table.rows) tokens.push_back(row[dim_cols[d]]);
    result.dim_dicts.push_back(ValueDict::from_tokens(std::move(tokens)));
  }

  result.records.reserve(table.rows.size());
  std::int64_t row_index = 0;
  for (const auto& row : table.rows) {
    Record rec;
    if (config.value_kind == ValueKind::ordinal) {
      double x;
      if (!parse_double(row[value_col], x)) {
        ++result.skipped_rows;
        ++row_index;
        continue;
      }
      rec.value = ordinal_value(x);
    } else {
      rec.value = result.value_dict.id_of(row[value_col]);
    }
    if (config.mode == Mode::interval) {
      if (time_col >= 0) {
        std::int64_t t;
        if (!parse_int(row[time_col], t)) {
          ++result.skipped_rows;
          ++row_index;
          continue;
        }
        rec.time = t;
      } else {
        rec.time = row_index;  // synthetic time = row position
      }
    }
    rec.dims.reserve(dim_cols.size());
    for (std::size_t d = 0; d < dim_cols.size(); ++d) {
      rec.dims.push_back(result.dim_dicts[d].id_of(row[dim_cols[d]]));
    }
    result.records.push_back(std::move(rec));
    ++row_index;
  }
  return result;
}

SegmentStore ingest_csv(const std::string& path, DatasetConfig config, const CsvOptions& options) {
  config.validate();
  CsvTable table = read_csv_file(path, options.delimiter);
  IngestResult parsed = records_from_csv(table, config, options);
  SegmentStore store = config.mode == Mode::interval
                           ? partition_by_time(parsed.records, config)
                           : partition_by_cube(parsed.records, config);
  store.value_dict = std::move(parsed.value_dict);
  store.dim_dicts = std::move(parsed.dim_dicts);
  return store;
}

}  // namespace preagg
