#include "preagg/store_io.hpp"

#include <algorithm>
#include <bit>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace preagg {

namespace fs = std::filesystem;

namespace {

constexpr const char* kVersionKey = "preagg-store-version";
constexpr const char* kVersion = "1";

// Fixed little-endian scalar I/O so stores are byte-identical across runs.
template <typename T>
void put_le(std::string& out, T v) {
  static_assert(std::is_trivially_copyable_v<T>);
  unsigned char bytes[sizeof(T)];
  std::memcpy(bytes, &v, sizeof(T));
  if constexpr (std::endian::native == std::endian::big) {
    std::reverse(bytes, bytes + sizeof(T));
  }
  out.append(reinterpret_cast<const char*>(bytes), sizeof(T));
}

class ByteReader {
 public:
  ByteReader(const std::string& data, const std::string& context)
      : data_(data), context_(context) {}

  template <typename T>
  T get() {
    static_assert(std::is_trivially_copyable_v<T>);
    if (pos_ + sizeof(T) > data_.size()) {
      throw StoreFormatError("truncated store file: " + context_);
    }
    unsigned char bytes[sizeof(T)];
    std::memcpy(bytes, data_.data() + pos_, sizeof(T));
    if constexpr (std::endian::native == std::endian::big) {
      std::reverse(bytes, bytes + sizeof(T));
    }
    pos_ += sizeof(T);
    T v;
    std::memcpy(&v, bytes, sizeof(T));
    return v;
  }

  void expect_end() const {
    if (pos_ != data_.size()) {
      throw StoreFormatError("trailing bytes in store file: " + context_);
    }
  }

 private:
  const std::string& data_;
  std::string context_;
  std::size_t pos_ = 0;
};

void write_file(const fs::path& path, const std::string& data) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out.write(data.data(), static_cast<std::streamsize>(data.size()));
  if (!out) throw std::runtime_error("write failed: " + path.string());
}

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw StoreFormatError("missing store file: " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return std::move(buf).str();
}

std::string segment_file(std::size_t i) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "seg_%06zu.bin", i);
  return buf;
}

std::string summary_file(std::size_t i) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "sum_%06zu.bin", i);
  return buf;
}

void write_dict(const fs::path& path, const ValueDict& dict) {
  std::string data;
  for (const auto& token : dict.tokens()) {
    data += token;
    data += '\n';
  }
  write_file(path, data);
}

ValueDict read_dict(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw StoreFormatError("missing dictionary file: " + path.string());
  std::vector<std::string> tokens;
  std::string line;
  while (std::getline(in, line)) tokens.push_back(line);
  // Tokens were written sorted, so ids are preserved.
  return ValueDict::from_tokens(std::move(tokens));
}

std::string manifest_get(const Manifest& m, const std::string& key) {
  auto it = m.find(key);
  if (it == m.end()) throw StoreFormatError("manifest missing key: " + key);
  return it->second;
}

std::vector<std::string> split_csv_field(const std::string& s) {
  std::vector<std::string> out;
  if (s.empty()) return out;
  std::size_t start = 0;
  while (true) {
    std::size_t pos = s.find(',', start);
    if (pos == std::string::npos) {
      out.push_back(s.substr(start));
      break;
    }
    out.push_back(s.substr(start, pos - start));
    start = pos + 1;
  }
  return out;
}

Manifest config_manifest(const DatasetConfig& config) {
  Manifest m;
  m["mode"] = to_string(config.mode);
  m["query_kind"] = to_string(config.query_kind);
  m["value_kind"] = to_string(config.value_kind);
  m["tg"] = std::to_string(config.time_resolution);
  m["kt"] = std::to_string(config.max_interval);
  std::string dims;
  for (std::size_t i = 0; i < config.dims.size(); ++i) {
    if (i > 0) dims += ',';
    dims += config.dims[i];
  }
  m["dims"] = dims;
  m["s"] = std::to_string(config.summary_size);
  m["s_total"] = std::to_string(config.total_space);
  m["s_min"] = std::to_string(config.min_summary_size);
  m["seed"] = std::to_string(config.seed);
  m["rng"] = "mt19937_64";
  return m;
}

DatasetConfig config_from_manifest(const Manifest& m) {
  DatasetConfig config;
  config.mode = mode_from_string(manifest_get(m, "mode"));
  config.query_kind = query_kind_from_string(manifest_get(m, "query_kind"));
  config.value_kind = value_kind_from_string(manifest_get(m, "value_kind"));
  config.time_resolution = std::stoll(manifest_get(m, "tg"));
  config.max_interval = std::stoll(manifest_get(m, "kt"));
  config.dims = split_csv_field(manifest_get(m, "dims"));
  config.summary_size = std::stoll(manifest_get(m, "s"));
  config.total_space = std::stoll(manifest_get(m, "s_total"));
  config.min_summary_size = std::stoll(manifest_get(m, "s_min"));
  config.seed = std::stoull(manifest_get(m, "seed"));
  return config;
}

void check_store_dir(const std::string& dir) {
  if (!fs::exists(fs::path(dir) / "manifest.txt")) {
    throw StoreNotFoundError("store not found: " + dir);
  }
}

void write_keys_index(const fs::path& dir, const std::vector<SegmentKey>& keys) {
  std::string data;
  for (const auto& key : keys) {
    data += format_segment_key(key);
    data += '\n';
  }
  write_file(dir / "segments.idx", data);
}

std::vector<SegmentKey> read_keys_index(const fs::path& dir, std::size_t n_dims) {
  std::ifstream in(dir / "segments.idx");
  if (!in) throw StoreFormatError("missing segments.idx");
  std::vector<SegmentKey> keys;
  std::string line;
  while (std::getline(in, line)) {
    auto fields = split_csv_field(line);
    if (fields.size() != n_dims) throw StoreFormatError("bad segment key: " + line);
    SegmentKey key;
    for (const auto& f : fields) key.push_back(std::stoll(f));
    keys.push_back(std::move(key));
  }
  return keys;
}

}  // namespace

void write_manifest(const std::string& path, const Manifest& manifest) {
  std::string data;
  data += kVersionKey;
  data += '=';
  data += kVersion;
  data += '\n';
  for (const auto& [k, v] : manifest) {
    data += k;
    data += '=';
    data += v;
    data += '\n';
  }
  write_file(path, data);
}

Manifest read_manifest(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw StoreNotFoundError("store not found: " + path);
  Manifest m;
  std::string line;
  bool version_checked = false;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::size_t eq = line.find('=');
    if (eq == std::string::npos) throw StoreFormatError("bad manifest line: " + line);
    std::string key = line.substr(0, eq);
    std::string value = line.substr(eq + 1);
    if (!version_checked) {
      if (key != kVersionKey) throw StoreFormatError("manifest missing version tag");
      if (value != kVersion) {
        throw StoreFormatError("unsupported store version: " + value);
      }
      version_checked = true;
      continue;
    }
    m[key] = value;
  }
  if (!version_checked) throw StoreFormatError("manifest missing version tag");
  return m;
}

std::int64_t SummaryStore::find_key(const SegmentKey& key) const {
  auto it = std::lower_bound(keys.begin(), keys.end(), key);
  if (it == keys.end() || *it != key) return -1;
  return it - keys.begin();
}

void save_store(const SegmentStore& store, const std::string& dir) {
  fs::create_directories(dir);
  Manifest m = config_manifest(store.config);
  m["kind"] = "segments";
  m["n_segments"] = std::to_string(store.segments.size());
  m["base_index"] = std::to_string(store.base_index);
  write_manifest((fs::path(dir) / "manifest.txt").string(), m);

  if (store.config.value_kind == ValueKind::categorical) {
    write_dict(fs::path(dir) / "values.dict", store.value_dict);
  }
  for (std::size_t d = 0; d < store.dim_dicts.size(); ++d) {
    write_dict(fs::path(dir) / ("dim_" + std::to_string(d) + ".dict"), store.dim_dicts[d]);
  }
  if (store.config.mode == Mode::cube) {
    write_keys_index(dir, store.keys);
  }
  for (std::size_t i = 0; i < store.segments.size(); ++i) {
    const Segment& seg = store.segments[i];
    std::string data;
    put_le<std::uint64_t>(data, seg.entries().size());
    for (const auto& [v, c] : seg.entries()) {
      put_le<std::int64_t>(data, v);
      put_le<std::int64_t>(data, c);
    }
    write_file(fs::path(dir) / segment_file(i), data);
  }
}

SegmentStore load_store(const std::string& dir) {
  check_store_dir(dir);
  Manifest m = read_manifest((fs::path(dir) / "manifest.txt").string());
  if (manifest_get(m, "kind") != "segments") {
    throw StoreFormatError("not a segment store: " + dir);
  }
  SegmentStore store;
  store.config = config_from_manifest(m);
  store.base_index = std::stoll(manifest_get(m, "base_index"));
  std::size_t n = std::stoull(manifest_get(m, "n_segments"));

  if (store.config.value_kind == ValueKind::categorical) {
    store.value_dict = read_dict(fs::path(dir) / "values.dict");
  }
  for (std::size_t d = 0; d < store.config.dims.size(); ++d) {
    store.dim_dicts.push_back(read_dict(fs::path(dir) / ("dim_" + std::to_string(d) + ".dict")));
  }
  if (store.config.mode == Mode::cube) {
    store.keys = read_keys_index(dir, store.config.dims.size());
    if (store.keys.size() != n) throw StoreFormatError("segment index count mismatch");
  }
  store.segments.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    std::string data = read_file(fs::path(dir) / segment_file(i));
    ByteReader reader(data, segment_file(i));
    auto count = reader.get<std::uint64_t>();
    std::vector<std::pair<Value, std::int64_t>> entries;
    entries.reserve(count);
    for (std::uint64_t j = 0; j < count; ++j) {
      Value v = reader.get<std::int64_t>();
      std::int64_t c = reader.get<std::int64_t>();
      entries.emplace_back(v, c);
    }
    reader.expect_end();
    store.segments.push_back(Segment::from_counts(std::move(entries)));
  }
  return store;
}

void save_summary_store(const SummaryStore& store, const std::string& dir) {
  fs::create_directories(dir);
  Manifest m = config_manifest(store.config);
  m["kind"] = "summaries";
  m["method"] = store.method;
  m["n_segments"] = std::to_string(store.summaries.size());
  m["base_index"] = std::to_string(store.base_index);
  write_manifest((fs::path(dir) / "manifest.txt").string(), m);

  if (store.config.value_kind == ValueKind::categorical) {
    write_dict(fs::path(dir) / "values.dict", store.value_dict);
  }
  for (std::size_t d = 0; d < store.dim_dicts.size(); ++d) {
    write_dict(fs::path(dir) / ("dim_" + std::to_string(d) + ".dict"), store.dim_dicts[d]);
  }
  if (store.config.mode == Mode::cube) {
    write_keys_index(dir, store.keys);
  }
  for (std::size_t i = 0; i < store.summaries.size(); ++i) {
    const Summary& s = store.summaries[i];
    std::string data;
    put_le<std::uint64_t>(data, s.entries.size());
    put_le<std::int64_t>(data, s.size_budget);
    put_le<double>(data, s.threshold);
    put_le<double>(data, s.bias);
    for (const auto& [v, w] : s.entries) {
      put_le<std::int64_t>(data, v);
      put_le<double>(data, w);
    }
    write_file(fs::path(dir) / summary_file(i), data);
  }
  if (!store.allocated_sizes.empty()) {
    std::string data;
    for (std::size_t i = 0; i < store.allocated_sizes.size(); ++i) {
      double score = i < store.allocation_scores.size() ? store.allocation_scores[i] : 0.0;
      double bias = i < store.allocated_biases.size() ? store.allocated_biases[i] : 0.0;
      char buf[96];
      std::snprintf(buf, sizeof(buf), "%.17g,%lld,%.17g\n", score,
                    static_cast<long long>(store.allocated_sizes[i]), bias);
      data += buf;
    }
    write_file(fs::path(dir) / "allocation.csv", data);
  }
}

SummaryStore load_summary_store(const std::string& dir) {
  check_store_dir(dir);
  Manifest m = read_manifest((fs::path(dir) / "manifest.txt").string());
  if (manifest_get(m, "kind") != "summaries") {
    throw StoreFormatError("not a summary store: " + dir);
  }
  SummaryStore store;
  store.config = config_from_manifest(m);
  store.method = manifest_get(m, "method");
  store.base_index = std::stoll(manifest_get(m, "base_index"));
  std::size_t n = std::stoull(manifest_get(m, "n_segments"));

  SummaryMethod method = summary_method_from_string(store.method);
  if (store.config.value_kind == ValueKind::categorical) {
    store.value_dict = read_dict(fs::path(dir) / "values.dict");
  }
  for (std::size_t d = 0; d < store.config.dims.size(); ++d) {
    store.dim_dicts.push_back(read_dict(fs::path(dir) / ("dim_" + std::to_string(d) + ".dict")));
  }
  if (store.config.mode == Mode::cube) {
    store.keys = read_keys_index(dir, store.config.dims.size());
    if (store.keys.size() != n) throw StoreFormatError("segment index count mismatch");
  }
  store.summaries.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    std::string data = read_file(fs::path(dir) / summary_file(i));
    ByteReader reader(data, summary_file(i));
    auto count = reader.get<std::uint64_t>();
    Summary s;
    s.method = method;
    s.size_budget = reader.get<std::int64_t>();
    s.threshold = reader.get<double>();
    s.bias = reader.get<double>();
    s.entries.reserve(count);
    for (std::uint64_t j = 0; j < count; ++j) {
      Value v = reader.get<std::int64_t>();
      double w = reader.get<double>();
      s.entries.emplace_back(v, w);
    }
    reader.expect_end();
    store.summaries.push_back(std::move(s));
  }

  if (fs::exists(fs::path(dir) / "allocation.csv")) {
    std::ifstream in(fs::path(dir) / "allocation.csv");
    std::string line;
    while (std::getline(in, line)) {
      auto fields = split_csv_field(line);
      if (fields.size() != 3) throw StoreFormatError("bad allocation.csv line: " + line);
      store.allocation_scores.push_back(std::stod(fields[0]));
      store.allocated_sizes.push_back(std::stoll(fields[1]));
      store.allocated_biases.push_back(std::stod(fields[2]));
    }
  }
  return store;
}

void write_allocation_report(const SummaryStore& store, const SegmentStore& segments,
                             const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << "segment,n,alpha,s,b\n";
  for (std::size_t i = 0; i < store.summaries.size(); ++i) {
    std::string key = store.config.mode == Mode::cube ? format_segment_key(store.keys[i])
                                                      : std::to_string(store.base_index + (std::int64_t)i);
    double score = i < store.allocation_scores.size() ? store.allocation_scores[i] : 0.0;
    std::int64_t size = i < store.allocated_sizes.size() ? store.allocated_sizes[i]
                                                         : store.summaries[i].size_budget;
    double bias = i < store.allocated_biases.size() ? store.allocated_biases[i]
                                                    : store.summaries[i].bias;
    out << '"' << key << "\"," << segments.segments[i].total_weight() << ',' << score << ','
        << size << ',' << bias << '\n';
  }
}

}  // namespace preagg
