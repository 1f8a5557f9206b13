#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <span>
#include <string>
#include <vector>

#include "cubicml/job.hpp"
#include "cubicml/space.hpp"

namespace cubicml {

// One record per JSONL line, fields: config, status, metric, timestamp,
// scale, round.
std::string record_to_json(const SearchSpace& space, const JobRecord& record);
JobRecord record_from_json(const SearchSpace& space, const std::string& line);

// Append-only JSONL-backed job history.  Single writer; appends are flushed
// per record, and a torn final line (crash mid-append) is dropped when the
// file is opened again.
class JobStore {
 public:
  // Starts a fresh store, replacing any existing file.
  static JobStore create(const SearchSpace& space, std::filesystem::path file);
  // Loads an existing store file.
  static JobStore open(const SearchSpace& space, std::filesystem::path file);

  void append(const JobRecord& record);

  const std::vector<JobRecord>& records() const { return records_; }
  std::vector<JobRecord> completed() const;
  const std::filesystem::path& file() const { return file_; }
  const SearchSpace& space() const { return space_; }

 private:
  JobStore(SearchSpace space, std::filesystem::path file);

  SearchSpace space_;
  std::filesystem::path file_;
  std::ofstream out_;
  std::vector<JobRecord> records_;
};

enum class SplitStrategy { random, temporal, scale };

struct DatasetSplit {
  std::vector<JobRecord> train;
  std::vector<JobRecord> valid;
  SplitStrategy strategy = SplitStrategy::random;
};

// All splitters take completed records only and keep both sides non-empty;
// anything else is a DataError.
DatasetSplit split_random(const std::vector<JobRecord>& records, double valid_fraction,
                          std::uint64_t seed);
// Earliest (1 - fraction) of the timestamp-sorted records train; ties at the
// cut fall in input order (stable sort).
DatasetSplit split_temporal(const std::vector<JobRecord>& records, double valid_fraction);
// Train: scale <= train_max; valid: scale >= valid_min; strictly-between
// records are excluded from both sides.
DatasetSplit split_scale(const std::vector<JobRecord>& records, std::int64_t train_max_scale,
                         std::int64_t valid_min_scale);

// Prefix maximum of metrics in launch order.
std::vector<double> max_frontier(std::span<const double> metrics);
std::vector<double> max_frontier(const std::vector<JobRecord>& completed_records);

// Elementwise mean of max_frontier over `permutations` random shuffles of the
// metric multiset; deterministic per seed.
std::vector<double> mean_permuted_frontier(std::span<const double> metrics,
                                           std::size_t permutations, std::uint64_t seed);

}  // namespace cubicml
