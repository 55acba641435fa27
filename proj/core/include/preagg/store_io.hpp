#pragma once

#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "preagg/ingest.hpp"
#include "preagg/model.hpp"

namespace preagg {

struct StoreNotFoundError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Version mismatch, truncation, or any other malformed store content.
struct StoreFormatError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Per-segment summaries aligned with a SegmentStore's segment order, plus
/// everything needed to answer queries without the raw segments.
struct SummaryStore {
  DatasetConfig config;
  std::string method;  // "coop-freq", "coop-quant", "pps", "truncation", ...
  std::vector<Summary> summaries;
  std::int64_t base_index = 0;
  std::vector<SegmentKey> keys;  // cube mode
  ValueDict value_dict;
  std::vector<ValueDict> dim_dicts;
  // Cube allocation report (empty unless produced by the cube optimizer).
  std::vector<double> allocation_scores;
  std::vector<std::int64_t> allocated_sizes;
  std::vector<double> allocated_biases;

  std::size_t size() const { return summaries.size(); }
  std::int64_t find_key(const SegmentKey& key) const;
};

/// Key-value manifest with a version gate; first line must carry the
/// store version tag.
using Manifest = std::map<std::string, std::string>;

void write_manifest(const std::string& path, const Manifest& manifest);
Manifest read_manifest(const std::string& path);

void save_store(const SegmentStore& store, const std::string& dir);
SegmentStore load_store(const std::string& dir);

void save_summary_store(const SummaryStore& store, const std::string& dir);
SummaryStore load_summary_store(const std::string& dir);

/// Writes the cube allocation report (segment key, n, alpha, s, b) as CSV.
void write_allocation_report(const SummaryStore& store, const SegmentStore& segments,
                             const std::string& path);

}  // namespace preagg
