#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "cubicml/correlation.hpp"
#include "cubicml/job.hpp"
#include "cubicml/job_store.hpp"
#include "cubicml/predictor.hpp"
#include "cubicml/searcher.hpp"

namespace cubicml {

// Knobs for one full search run.  The per-round launch count is
// searcher.top_k: the round launches exactly the merged top-k proposals
// (fewer when the space runs out of novel configs).
struct LoopConfig {
  std::uint32_t bootstrap_budget = 480;
  std::uint32_t rounds = 3;
  ScorerConfig scorer;
  SearcherConfig searcher;
  // Built-in executors aggregate per-step throughput at this percentile;
  // recorded here so reports document the metric's meaning.
  double aggregate_percentile = 90.0;
  std::uint64_t seed = 0;
  // Upper bound on concurrent job executions within a round.
  std::uint32_t parallel = 1;

  void validate() const;
};

struct LaunchedJob {
  ConfigPoint config;
  // Score the round's predictor assigned; absent for bootstrap jobs.
  std::optional<double> predicted;
  JobStatus status = JobStatus::completed;
  std::optional<double> actual;
};

struct RoundReport {
  std::string label;
  std::vector<LaunchedJob> launched;
  // Prefix maximum over this round's completed launches, in launch order.
  std::vector<double> frontier;
  std::optional<double> best;
  // Predicted-vs-actual rank quality on this round's completed launches;
  // absent for the bootstrap round and when either side is degenerate.
  std::optional<CorrelationReport> correlation;
};

struct LoopReport {
  // Bootstrap round first, then one entry per search round.
  std::vector<RoundReport> rounds;
  // Prefix maximum over all completed launches of the run, in launch order.
  std::vector<double> frontier;
  std::optional<ConfigPoint> best_config;
  std::optional<double> best_metric;
  std::string best_round;
  std::uint64_t executed = 0;
};

// Nearest-rank percentile of per-step throughput samples; the job metric
// every built-in executor reports.  Empty input is a DataError.
double aggregate_metric(std::span<const double> step_samples, double percentile = 90.0);

// Samples `budget` distinct configs not yet in the store (rejection on the
// config hash), executes them, and appends every record with round label
// "random".  The sequence is a pure function of the seed.  Budget below 2 or
// beyond the space's distinct-config count is a ValidationError.
RoundReport run_bootstrap(Executor& executor, JobStore& store, std::uint32_t budget,
                          std::uint64_t seed, std::uint32_t parallel = 1);

// One predictor-guided round: fits the scorer from scratch on all completed
// history, runs the policy-gradient trials against the frozen scorer, merges
// proposals to the top-k novel configs, and launches them in descending
// predicted-score order (failures consume budget and are recorded).  Round
// labels are "rl-round-<index>".  Fewer than 2 completed records, or all
// completed metrics equal, is a DataError.
RoundReport run_round(Executor& executor, JobStore& store, const LoopConfig& config,
                      std::uint32_t round_index);

// Bootstrap plus config.rounds search rounds.  Every record is in the store
// by the time the report returns; errors mid-run propagate after the store
// has persisted all work already done.
LoopReport run_loop(Executor& executor, JobStore& store, const LoopConfig& config);

// Rebuilds the report structure from a stored history: consecutive records
// sharing a round label form one round, frontiers and bests are recomputed.
// Predicted scores and correlations stay absent; they need the run's config
// (see rescore_rounds).
LoopReport report_from_store(const JobStore& store);

// Refits each search round's scorer on its history prefix with the round's
// derived seed, exactly as the run did, and fills the predicted scores and
// correlations back in.  The store must hold a single run_loop history.
void rescore_rounds(LoopReport& report, const JobStore& store,
                    const LoopConfig& config);

// launch_index,round,actual_metric,frontier — one row per executed job in
// launch order; metric and frontier cells are empty until defined.
void write_frontier_csv(const LoopReport& report, const std::filesystem::path& path);

// round,kendall,pearson,spearman — one row per round that has a correlation.
void write_round_corr_csv(const LoopReport& report, const std::filesystem::path& path);

// Best config's labels, metric, and round as a JSON document.
void write_best_config_json(const SearchSpace& space, const LoopReport& report,
                            const std::filesystem::path& path);

}  // namespace cubicml
