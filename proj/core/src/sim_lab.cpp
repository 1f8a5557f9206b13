#include "cubicml/sim_lab.hpp"

#include <algorithm>
#include <cmath>

#include "cubicml/errors.hpp"
#include "cubicml/rng.hpp"
#include "cubicml/sim_fsdp.hpp"
#include "cubicml/sim_llm.hpp"

namespace cubicml {

TimestampPolicy timestamp_policy_from_string(const std::string& text) {
  if (text == "uniform") return TimestampPolicy::uniform;
  if (text == "scale-correlated") return TimestampPolicy::scale_correlated;
  throw ValidationError("unknown timestamp policy '" + text + "'");
}

std::vector<JobRecord> generate_dataset(Executor& executor,
                                        const DatasetOptions& options) {
  if (options.count == 0) {
    throw ValidationError("generate dataset: count must be positive");
  }
  if (options.failure_fraction < 0.0 || options.failure_fraction > 1.0) {
    throw ValidationError("generate dataset: failure fraction must be in [0, 1]");
  }
  if (options.scale_jitter < 0.0) {
    throw ValidationError("generate dataset: scale jitter must be non-negative");
  }

  const std::size_t failed_target = static_cast<std::size_t>(
      std::llround(options.failure_fraction * static_cast<double>(options.count)));
  const std::size_t completed_target = options.count - failed_target;

  Rng rng(derive_seed(options.seed, "dataset"));

  // Probe runs classify each draw; quotas make the failure mix exact.  The
  // status cannot depend on the timestamp, so probing at 0 is safe.
  struct Draw {
    ConfigPoint config;
    std::int64_t scale = 0;
  };
  std::vector<Draw> draws;
  draws.reserve(options.count);
  std::size_t completed = 0, failed = 0;
  const std::size_t attempt_cap = 10000 + 1000 * options.count;
  for (std::size_t attempt = 0;
       attempt < attempt_cap && draws.size() < options.count; ++attempt) {
    ConfigPoint config = executor.sample_config(rng);
    const JobRecord probe = executor.execute(config, 0.0);
    const bool is_completed = probe.status == JobStatus::completed;
    if (is_completed && completed == completed_target) continue;
    if (!is_completed && failed == failed_target) continue;
    (is_completed ? completed : failed) += 1;
    draws.push_back({std::move(config), probe.scale.value_or(0)});
  }
  if (draws.size() < options.count) {
    throw DataError("generate dataset: executor cannot satisfy the requested "
                    "failure mix");
  }

  std::vector<std::size_t> order(draws.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  if (options.timestamps == TimestampPolicy::scale_correlated) {
    std::vector<double> keys(draws.size());
    for (std::size_t i = 0; i < draws.size(); ++i) {
      const double scale = static_cast<double>(std::max<std::int64_t>(1, draws[i].scale));
      keys[i] = std::log2(scale) +
                rng.uniform(-options.scale_jitter, options.scale_jitter);
    }
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return keys[a] < keys[b]; });
  }

  std::vector<JobRecord> records;
  records.reserve(draws.size());
  for (std::size_t rank = 0; rank < order.size(); ++rank) {
    const double timestamp = static_cast<double>(rank + 1);
    JobRecord record = executor.execute(draws[order[rank]].config, timestamp);
    record.round_label = "synthetic";
    records.push_back(std::move(record));
  }
  return records;
}

Optimum exhaustive_optimum(Executor& executor) {
  if (!executor.deterministic()) {
    throw ValidationError("exhaustive optimum: executor must be noise-free");
  }
  const auto cardinality = executor.space().cardinality();
  if (!cardinality.value.has_value() || *cardinality.value > 100000) {
    throw ValidationError("exhaustive optimum: space too large to enumerate (" +
                          cardinality.digits + " configs)");
  }

  Optimum best;
  bool found = false;
  for_each_config(executor.space(), [&](const ConfigPoint& point) {
    const JobRecord record = executor.execute(point, 0.0);
    if (record.status != JobStatus::completed) return;
    if (!found || *record.metric > best.metric) {
      found = true;
      best.config = point;
      best.metric = *record.metric;
    }
  });
  if (!found) {
    throw DataError("exhaustive optimum: no config completes");
  }
  return best;
}

std::unique_ptr<Executor> make_executor(const std::string& kind,
                                        SearchSpace space,
                                        const std::filesystem::path& params_file) {
  if (kind == "fsdp") {
    return std::make_unique<FsdpExecutor>(std::move(space),
                                          FsdpSimParams::load(params_file));
  }
  if (kind == "llm") {
    return std::make_unique<LlmExecutor>(std::move(space),
                                         LlmSimParams::load(params_file));
  }
  throw ValidationError("unknown executor kind '" + kind + "'");
}

}  // namespace cubicml
