#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

#include "cubicml/rng.hpp"
#include "cubicml/space.hpp"

namespace cubicml {

enum class JobStatus { completed, failed_oom, failed_infra };

std::string_view to_string(JobStatus status);
JobStatus job_status_from_string(std::string_view text);

// Metadata of one training job, completed or failed.
struct JobRecord {
  ConfigPoint config;
  JobStatus status = JobStatus::completed;
  std::optional<double> metric;        // present iff completed; > 0
  double timestamp = 0.0;
  std::optional<std::int64_t> scale;   // accelerator count, when the run has one
  std::string round_label;
};

// Throws ValidationError when the status/metric pairing or field ranges are
// inconsistent.
void check_record(const JobRecord& record);

// A system that can run a config and report what happened.  Implementations
// must be pure in (config, timestamp): repeated calls with identical inputs
// return identical records, and the status may not depend on the timestamp.
class Executor {
 public:
  virtual ~Executor() = default;

  virtual std::string_view name() const = 0;
  virtual const SearchSpace& space() const = 0;

  // Runs the config; never throws on infeasibility (that is a failed record).
  // The returned record carries config, status, metric, scale, and the given
  // timestamp; the round label is left for the caller.
  virtual JobRecord execute(const ConfigPoint& config, double timestamp) = 0;

  // True when every evaluation is noise-free and repeatable bit-for-bit.
  virtual bool deterministic() const = 0;

  // Proposal distribution for dataset generation; uniform unless an
  // implementation biases it toward runnable configs.
  virtual ConfigPoint sample_config(Rng& rng) { return space().sample_uniform(rng); }
};

}  // namespace cubicml
