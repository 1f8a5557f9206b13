#include "cubicml/orchestrator.hpp"

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <fstream>
#include <limits>
#include <set>
#include <thread>

#include "json.hpp"

#include "cubicml/errors.hpp"
#include "cubicml/rng.hpp"
#include "cubicml/stats.hpp"

namespace cubicml {

namespace {

std::string fmt_double(double value) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", value);
  return buf;
}

// Executes configs[i] at timestamps[i], filling results in index order no
// matter how many workers run.  Built-in executors are pure, so concurrent
// calls are safe; a stateful adapter should be driven with threads = 1.
std::vector<JobRecord> execute_batch(Executor& executor,
                                     const std::vector<ConfigPoint>& configs,
                                     const std::vector<double>& timestamps,
                                     std::uint32_t threads) {
  std::vector<JobRecord> results(configs.size());
  const std::size_t workers =
      std::min<std::size_t>(std::max<std::uint32_t>(threads, 1), configs.size());
  if (workers <= 1) {
    for (std::size_t i = 0; i < configs.size(); ++i) {
      results[i] = executor.execute(configs[i], timestamps[i]);
    }
    return results;
  }
  std::atomic<std::size_t> next{0};
  auto drain = [&] {
    for (std::size_t i = next.fetch_add(1); i < configs.size(); i = next.fetch_add(1)) {
      results[i] = executor.execute(configs[i], timestamps[i]);
    }
  };
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(drain);
  for (auto& worker : pool) worker.join();
  return results;
}

double next_timestamp_base(const JobStore& store) {
  double base = 0.0;
  for (const JobRecord& record : store.records()) {
    base = std::max(base, record.timestamp);
  }
  return base;
}

bool has_two_values(const std::vector<double>& values) {
  for (std::size_t i = 1; i < values.size(); ++i) {
    if (values[i] != values[0]) return true;
  }
  return false;
}

std::optional<CorrelationReport> launch_correlation(
    const std::vector<LaunchedJob>& launched) {
  std::vector<double> predicted;
  std::vector<double> actual;
  for (const LaunchedJob& job : launched) {
    if (!job.predicted || !job.actual) continue;
    predicted.push_back(*job.predicted);
    actual.push_back(*job.actual);
  }
  if (predicted.size() < 2) return std::nullopt;
  if (!has_two_values(predicted) || !has_two_values(actual)) return std::nullopt;
  return correlation_report(predicted, actual);
}

void finish_report(RoundReport& report) {
  std::vector<double> metrics;
  for (const LaunchedJob& job : report.launched) {
    if (job.actual) metrics.push_back(*job.actual);
  }
  report.frontier = max_frontier(metrics);
  if (!report.frontier.empty()) report.best = report.frontier.back();
  report.correlation = launch_correlation(report.launched);
}

void aggregate_loop(LoopReport& report) {
  report.executed = 0;
  report.best_metric.reset();
  report.best_config.reset();
  report.best_round.clear();
  std::vector<double> metrics;
  for (const RoundReport& round : report.rounds) {
    report.executed += round.launched.size();
    for (const LaunchedJob& job : round.launched) {
      if (!job.actual) continue;
      metrics.push_back(*job.actual);
      if (!report.best_metric || *job.actual > *report.best_metric) {
        report.best_metric = job.actual;
        report.best_config = job.config;
        report.best_round = round.label;
      }
    }
  }
  report.frontier = max_frontier(metrics);
}

}  // namespace

void LoopConfig::validate() const {
  if (bootstrap_budget < 2) {
    throw ValidationError("loop config: bootstrap budget must be at least 2");
  }
  if (rounds < 1) throw ValidationError("loop config: rounds must be at least 1");
  if (searcher.top_k < 1) {
    throw ValidationError("loop config: per-round launch count must be at least 1");
  }
  if (!(aggregate_percentile > 0.0) || aggregate_percentile > 100.0) {
    throw ValidationError("loop config: percentile must be in (0, 100]");
  }
  if (parallel < 1) throw ValidationError("loop config: parallel must be at least 1");
}

double aggregate_metric(std::span<const double> step_samples, double percentile) {
  if (step_samples.empty()) throw DataError("aggregate_metric: no samples");
  return percentile_nearest_rank(step_samples, percentile);
}

RoundReport run_bootstrap(Executor& executor, JobStore& store, std::uint32_t budget,
                          std::uint64_t seed, std::uint32_t parallel) {
  if (budget < 2) throw ValidationError("bootstrap: budget must be at least 2");
  const SearchSpace& space = executor.space();

  std::set<std::uint64_t> seen;
  for (const JobRecord& record : store.records()) {
    seen.insert(config_hash(record.config));
  }
  const Cardinality cardinality = space.cardinality();
  if (cardinality.value && seen.size() + budget > *cardinality.value) {
    throw ValidationError("bootstrap: budget exceeds the distinct configs left in " +
                          space.name());
  }

  Rng rng(derive_seed(seed, "bootstrap"));
  std::vector<ConfigPoint> configs;
  configs.reserve(budget);
  std::uint64_t rejects = 0;
  while (configs.size() < budget) {
    ConfigPoint point = executor.sample_config(rng);
    if (!seen.insert(config_hash(point)).second) {
      if (++rejects > 1000ull * budget + 10000ull) {
        throw DataError("bootstrap: sampler cannot reach novel configs in " +
                        space.name());
      }
      continue;
    }
    configs.push_back(std::move(point));
  }

  const double base = next_timestamp_base(store);
  std::vector<double> timestamps(configs.size());
  for (std::size_t i = 0; i < configs.size(); ++i) {
    timestamps[i] = base + static_cast<double>(i) + 1.0;
  }
  std::vector<JobRecord> records = execute_batch(executor, configs, timestamps, parallel);

  RoundReport report;
  report.label = "random";
  report.launched.reserve(records.size());
  for (JobRecord& record : records) {
    record.round_label = report.label;
    store.append(record);
    LaunchedJob job;
    job.config = record.config;
    job.status = record.status;
    job.actual = record.metric;
    report.launched.push_back(std::move(job));
  }
  finish_report(report);
  return report;
}

RoundReport run_round(Executor& executor, JobStore& store, const LoopConfig& config,
                      std::uint32_t round_index) {
  const SearchSpace& space = executor.space();
  const std::vector<JobRecord> history = store.records();

  std::vector<double> completed_metrics;
  std::vector<ConfigPoint> known;
  known.reserve(history.size());
  for (const JobRecord& record : history) {
    known.push_back(record.config);
    if (record.metric) completed_metrics.push_back(*record.metric);
  }
  if (completed_metrics.size() < 2) {
    throw DataError("round " + std::to_string(round_index) +
                    ": need at least 2 completed jobs in history");
  }
  if (!has_two_values(completed_metrics)) {
    throw DataError("round " + std::to_string(round_index) +
                    ": degenerate history, every completed metric is equal");
  }

  const ConfigScorer scorer =
      ConfigScorer::fit(space, history, config.scorer,
                        derive_seed(config.seed, "predictor", round_index));
  const ScoreFn score = [&scorer](const ConfigPoint& point) {
    return scorer.score(point);
  };
  const std::vector<std::vector<SearchProposal>> trials = run_trials(
      space, score, derive_seed(config.seed, "searcher", round_index), config.searcher);
  const std::vector<SearchProposal> proposals =
      propose_topk(trials, known, config.searcher.top_k);

  std::vector<ConfigPoint> configs;
  configs.reserve(proposals.size());
  for (const SearchProposal& proposal : proposals) configs.push_back(proposal.config);
  const double base = next_timestamp_base(store);
  std::vector<double> timestamps(configs.size());
  for (std::size_t i = 0; i < configs.size(); ++i) {
    timestamps[i] = base + static_cast<double>(i) + 1.0;
  }
  std::vector<JobRecord> records =
      execute_batch(executor, configs, timestamps, config.parallel);

  RoundReport report;
  report.label = "rl-round-" + std::to_string(round_index);
  report.launched.reserve(records.size());
  for (std::size_t i = 0; i < records.size(); ++i) {
    records[i].round_label = report.label;
    store.append(records[i]);
    LaunchedJob job;
    job.config = records[i].config;
    job.predicted = proposals[i].predicted_score;
    job.status = records[i].status;
    job.actual = records[i].metric;
    report.launched.push_back(std::move(job));
  }
  finish_report(report);
  return report;
}

LoopReport run_loop(Executor& executor, JobStore& store, const LoopConfig& config) {
  config.validate();

  LoopReport report;
  report.rounds.push_back(run_bootstrap(executor, store, config.bootstrap_budget,
                                        config.seed, config.parallel));
  for (std::uint32_t round = 1; round <= config.rounds; ++round) {
    report.rounds.push_back(run_round(executor, store, config, round));
  }
  aggregate_loop(report);
  return report;
}

LoopReport report_from_store(const JobStore& store) {
  LoopReport report;
  for (const JobRecord& record : store.records()) {
    if (report.rounds.empty() || report.rounds.back().label != record.round_label) {
      report.rounds.emplace_back();
      report.rounds.back().label = record.round_label;
    }
    LaunchedJob job;
    job.config = record.config;
    job.status = record.status;
    job.actual = record.metric;
    report.rounds.back().launched.push_back(std::move(job));
  }
  for (RoundReport& round : report.rounds) finish_report(round);
  aggregate_loop(report);
  return report;
}

void rescore_rounds(LoopReport& report, const JobStore& store,
                    const LoopConfig& config) {
  const SearchSpace& space = store.space();
  const std::vector<JobRecord>& records = store.records();
  std::size_t cursor = 0;
  std::uint32_t ordinal = 0;
  for (RoundReport& round : report.rounds) {
    if (cursor + round.launched.size() > records.size()) {
      throw DataError("rescore: report does not match the store");
    }
    const std::size_t begin = cursor;
    cursor += round.launched.size();
    if (round.label.rfind("rl-round-", 0) != 0) continue;
    ++ordinal;
    const std::vector<JobRecord> prefix(records.begin(),
                                        records.begin() + static_cast<std::ptrdiff_t>(begin));
    const ConfigScorer scorer =
        ConfigScorer::fit(space, prefix, config.scorer,
                          derive_seed(config.seed, "predictor", ordinal));
    for (LaunchedJob& job : round.launched) {
      job.predicted = scorer.score(job.config);
    }
    round.correlation = launch_correlation(round.launched);
  }
}

void write_frontier_csv(const LoopReport& report, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write " + path.string());
  out << "launch_index,round,actual_metric,frontier\n";
  std::size_t index = 0;
  double frontier = -std::numeric_limits<double>::infinity();
  for (const RoundReport& round : report.rounds) {
    for (const LaunchedJob& job : round.launched) {
      ++index;
      out << index << ',' << round.label << ',';
      if (job.actual) {
        frontier = std::max(frontier, *job.actual);
        out << fmt_double(*job.actual);
      }
      out << ',';
      if (frontier != -std::numeric_limits<double>::infinity()) {
        out << fmt_double(frontier);
      }
      out << '\n';
    }
  }
}

void write_round_corr_csv(const LoopReport& report, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write " + path.string());
  out << "round,kendall,pearson,spearman\n";
  for (const RoundReport& round : report.rounds) {
    if (!round.correlation) continue;
    out << round.label << ',' << fmt_double(round.correlation->kendall_tau) << ','
        << fmt_double(round.correlation->pearson) << ','
        << fmt_double(round.correlation->spearman) << '\n';
  }
}

void write_best_config_json(const SearchSpace& space, const LoopReport& report,
                            const std::filesystem::path& path) {
  if (!report.best_config) throw DataError("no completed job to report as best");
  nlohmann::json doc;
  doc["space"] = space.name();
  doc["round"] = report.best_round;
  doc["metric"] = *report.best_metric;
  doc["config"] = nlohmann::json::parse(config_to_json(space, *report.best_config));
  std::ofstream out(path);
  if (!out) throw DataError("cannot write " + path.string());
  out << doc.dump(2) << '\n';
}

}  // namespace cubicml
