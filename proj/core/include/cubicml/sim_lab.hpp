#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <string>
#include <vector>

#include "cubicml/job.hpp"
#include "cubicml/space.hpp"

namespace cubicml {

enum class TimestampPolicy { uniform, scale_correlated };

TimestampPolicy timestamp_policy_from_string(const std::string& text);

struct DatasetOptions {
  std::size_t count = 0;
  std::uint64_t seed = 0;
  TimestampPolicy timestamps = TimestampPolicy::uniform;
  // Fraction of records that must be failures; the generator resamples until
  // it fills both quotas.
  double failure_fraction = 0.0;
  // Timestamp shuffling strength (log2-scale units) for the scale-correlated
  // policy: 0 gives a perfect scale ordering, larger values loosen it.
  double scale_jitter = 1.6;
};

// Draws configs from the executor's proposal distribution, assigns timestamps
// per policy, and executes each config at its timestamp.  Returned records
// are sorted by timestamp and labeled "synthetic".  Deterministic per seed.
std::vector<JobRecord> generate_dataset(Executor& executor,
                                        const DatasetOptions& options);

struct Optimum {
  ConfigPoint config;
  double metric = 0.0;
};

// Ground truth by brute force: evaluates every config at timestamp 0 and
// returns the best completed one (first in lexicographic index order on
// ties).  Demands a noise-free executor and cardinality at most 100,000.
Optimum exhaustive_optimum(Executor& executor);

// Builds the named simulator ("fsdp" or "llm") over a space, with constants
// from a params file.
std::unique_ptr<Executor> make_executor(const std::string& kind,
                                        SearchSpace space,
                                        const std::filesystem::path& params_file);

}  // namespace cubicml
