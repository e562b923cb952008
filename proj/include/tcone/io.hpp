#pragma once

#include "tcone/metric.hpp"

#include <fstream>
#include <mutex>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

namespace tcone {

/** Parses the text produced by MetricDescriptor::name() or fingerprint(). Malformed text throws invalid_argument. */
MetricDescriptor parse_descriptor(const std::string& text);
/** "geometric,K0,beta", "supergeometric,K0,beta" or "list,K0,K1,...". */
KSequence parse_ksequence(const std::string& text);
/** Strict number parse ("inf" and hex floats accepted). */
double parse_real(const std::string& text);

/** CSV with a mandatory header row and LF line endings. */
class CsvWriter {
 public:
  CsvWriter(const std::string& path, const std::vector<std::string>& header);
  void row(const std::vector<std::string>& fields);

 private:
  std::ofstream out_;
  std::size_t columns_;
};

/**
 * Append-only distance cache. Keys cover the descriptor fingerprint, both endpoints and the solver configuration at
 * full precision; every record carries an FNV-1a checksum and damaged records are ignored.
 */
class DistanceCache {
 public:
  explicit DistanceCache(std::string path);

  static std::string key(const MetricDescriptor& desc, const Point3& x, const Point3& y, const SolverConfig& cfg);
  std::optional<DistanceResult> get(const std::string& key) const;
  void put(const std::string& key, const DistanceResult& r);
  std::size_t size() const;
  std::size_t rejected_records() const { return rejected_; }

 private:
  std::string path_;
  std::unordered_map<std::string, DistanceResult> entries_;
  std::size_t rejected_ = 0;
  mutable std::mutex mu_;
};

/** distance() through an optional cache; a hit returns value and bounds without the witness. */
DistanceResult cached_distance(DistanceCache* cache, const MetricDescriptor& desc, const Point3& x, const Point3& y,
                               const SolverConfig& cfg);

}  // namespace tcone
