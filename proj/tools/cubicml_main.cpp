#include <cstdlib>
#include <exception>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "cubicml/errors.hpp"
#include "cubicml/job_store.hpp"
#include "cubicml/learning_curve.hpp"
#include "cubicml/orchestrator.hpp"
#include "cubicml/predictor.hpp"
#include "cubicml/sim_lab.hpp"
#include "cubicml/space.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr const char* kFormatNotes = R"(File formats:
  space file      JSON: {"name", "version", "dimensions": [{"name", "kind":
                  categorical|stepped_integer|stepped_decimal|boolean, ...,
                  "role": architecture|infra|parallelism|precision}]}.
  params file     JSON constants for one simulator; see sims/*.params.
  history.jsonl   One job per line: {"config": {...}, "status": completed|
                  failed_oom|failed_infra, "metric", "timestamp", "scale",
                  "round"}.
  manifest        JSON: {"space", "executor": fsdp|llm, "params", "seed",
                  "out_dir"?, "loop": {"bootstrap", "rounds", "launch",
                  "backend": mlp-ensemble|gbdt, "percentile", "searcher":
                  {"trials", "samples", "batch", "lr", "baseline_decay"}}}.
                  Relative paths resolve against the manifest's directory.
  frontier.csv    launch_index,round,actual_metric,frontier
  round_corr.csv  round,kendall,pearson,spearman
  corr_report.csv split,backend,n,kendall,pearson,spearman
  predictions.csv predicted,actual
  learning_curve.csv
                  size,kendall_mean,kendall_std,pearson_mean,pearson_std,
                  spearman_mean,spearman_std

Exit codes: 0 success; 2 usage or config error; 3 data, degeneracy, or I/O
error. The output directory defaults to --out, then $CUBIC_OUT_DIR, then ".".)";

struct Manifest {
  fs::path space_file;
  std::string executor;
  fs::path params_file;
  std::string out_dir;
  cubicml::LoopConfig loop;
};

fs::path resolve_against(const fs::path& base_dir, const fs::path& path) {
  return path.is_absolute() ? path : base_dir / path;
}

Manifest load_manifest(const fs::path& file) {
  std::ifstream in(file);
  if (!in) throw cubicml::IoError("cannot open manifest: " + file.string());
  json doc;
  try {
    in >> doc;
  } catch (const json::exception& e) {
    throw cubicml::ValidationError("manifest " + file.string() + ": " + e.what());
  }
  if (!doc.is_object()) {
    throw cubicml::ValidationError("manifest " + file.string() + ": not a JSON object");
  }

  Manifest manifest;
  const fs::path base = file.has_parent_path() ? file.parent_path() : fs::path(".");
  try {
    manifest.space_file = resolve_against(base, doc.at("space").get<std::string>());
    manifest.executor = doc.at("executor").get<std::string>();
    manifest.params_file = resolve_against(base, doc.at("params").get<std::string>());
    manifest.loop.seed = doc.value("seed", std::uint64_t{0});
    manifest.out_dir = doc.value("out_dir", std::string{});

    const json loop = doc.value("loop", json::object());
    manifest.loop.bootstrap_budget = loop.value("bootstrap", std::uint32_t{480});
    manifest.loop.rounds = loop.value("rounds", std::uint32_t{3});
    manifest.loop.searcher.top_k = loop.value("launch", std::uint32_t{50});
    manifest.loop.aggregate_percentile = loop.value("percentile", 90.0);
    manifest.loop.scorer.backend =
        cubicml::backend_from_string(loop.value("backend", std::string{"mlp-ensemble"}));

    const json searcher = loop.value("searcher", json::object());
    manifest.loop.searcher.trials = searcher.value("trials", std::uint32_t{3});
    manifest.loop.searcher.samples_per_trial =
        searcher.value("samples", std::uint32_t{2000});
    manifest.loop.searcher.batch = searcher.value("batch", std::uint32_t{30});
    manifest.loop.searcher.lr = searcher.value("lr", 0.01);
    manifest.loop.searcher.baseline_decay = searcher.value("baseline_decay", 0.9);
  } catch (const json::exception& e) {
    throw cubicml::ValidationError("manifest " + file.string() + ": " + e.what());
  }
  return manifest;
}

fs::path resolve_out_dir(const std::string& flag_value, const std::string& manifest_value) {
  std::string out = flag_value;
  if (out.empty()) out = manifest_value;
  if (out.empty()) {
    if (const char* env = std::getenv("CUBIC_OUT_DIR")) out = env;
  }
  if (out.empty()) out = ".";
  fs::create_directories(out);
  return out;
}

void require_file(const fs::path& path, const std::string& what) {
  if (!fs::exists(path)) {
    throw cubicml::IoError(what + " not found: " + path.string());
  }
}

std::unique_ptr<cubicml::Executor> build_executor(const std::string& kind,
                                                  const fs::path& space_file,
                                                  const fs::path& params_file) {
  require_file(space_file, "space file");
  require_file(params_file, "params file");
  cubicml::SearchSpace space = cubicml::load_space(space_file);
  return cubicml::make_executor(kind, std::move(space), params_file);
}

void print_round_line(const cubicml::RoundReport& round) {
  std::cout << "  " << round.label << ": launched " << round.launched.size();
  if (round.best) std::cout << ", best " << *round.best;
  if (round.correlation) {
    std::cout << ", spearman " << round.correlation->spearman;
  }
  std::cout << "\n";
}

int cmd_search(const fs::path& manifest_file, const std::string& out_flag,
               std::optional<std::uint64_t> seed_flag,
               std::optional<std::uint32_t> parallel_flag) {
  require_file(manifest_file, "manifest");
  Manifest manifest = load_manifest(manifest_file);
  if (seed_flag) manifest.loop.seed = *seed_flag;
  if (parallel_flag) manifest.loop.parallel = *parallel_flag;
  manifest.loop.validate();

  auto executor = build_executor(manifest.executor, manifest.space_file,
                                 manifest.params_file);
  const fs::path out = resolve_out_dir(out_flag, manifest.out_dir);

  cubicml::JobStore store =
      cubicml::JobStore::create(executor->space(), out / "history.jsonl");
  const cubicml::LoopReport report = cubicml::run_loop(*executor, store, manifest.loop);

  cubicml::write_frontier_csv(report, out / "frontier.csv");
  cubicml::write_round_corr_csv(report, out / "round_corr.csv");
  cubicml::write_best_config_json(executor->space(), report, out / "best_config.json");

  std::cout << "executed " << report.executed << " jobs over " << report.rounds.size()
            << " rounds\n";
  for (const cubicml::RoundReport& round : report.rounds) print_round_line(round);
  std::cout << "best metric " << *report.best_metric << " (" << report.best_round
            << ")\nwrote " << (out / "history.jsonl").string()
            << ", frontier.csv, round_corr.csv, best_config.json\n";
  return 0;
}

int cmd_fit_eval(const fs::path& history, const fs::path& space_file,
                 const std::string& backend, const std::string& split_name,
                 double valid_fraction, std::uint64_t split_seed,
                 std::int64_t train_max, std::int64_t valid_min, std::uint64_t seed,
                 const std::string& out_flag) {
  require_file(history, "history");
  require_file(space_file, "space file");
  const cubicml::SearchSpace space = cubicml::load_space(space_file);
  const cubicml::JobStore store = cubicml::JobStore::open(space, history);

  cubicml::DatasetSplit split;
  if (split_name == "random") {
    split = cubicml::split_random(store.records(), valid_fraction, split_seed);
  } else if (split_name == "temporal") {
    split = cubicml::split_temporal(store.records(), valid_fraction);
  } else {
    split = cubicml::split_scale(store.records(), train_max, valid_min);
  }

  cubicml::ScorerConfig config;
  config.backend = cubicml::backend_from_string(backend);
  const cubicml::ConfigScorer scorer =
      cubicml::ConfigScorer::fit(space, split.train, config, seed);

  std::vector<double> predicted;
  std::vector<double> actual;
  predicted.reserve(split.valid.size());
  for (const cubicml::JobRecord& record : split.valid) {
    predicted.push_back(scorer.score(record.config));
    actual.push_back(*record.metric);
  }
  const cubicml::CorrelationReport report =
      cubicml::correlation_report(predicted, actual);

  const fs::path out = resolve_out_dir(out_flag, "");
  {
    std::ofstream csv(out / "predictions.csv");
    if (!csv) throw cubicml::IoError("cannot write " + (out / "predictions.csv").string());
    csv << "predicted,actual\n";
    char line[96];
    for (std::size_t i = 0; i < predicted.size(); ++i) {
      std::snprintf(line, sizeof(line), "%.17g,%.17g\n", predicted[i], actual[i]);
      csv << line;
    }
  }
  {
    std::ofstream csv(out / "corr_report.csv");
    if (!csv) throw cubicml::IoError("cannot write " + (out / "corr_report.csv").string());
    csv << "split,backend,n,kendall,pearson,spearman\n";
    char line[160];
    std::snprintf(line, sizeof(line), "%s,%s,%zu,%.17g,%.17g,%.17g\n",
                  split_name.c_str(), backend.c_str(), report.n, report.kendall_tau,
                  report.pearson, report.spearman);
    csv << line;
  }

  std::cout << "split " << split_name << ": train " << split.train.size() << ", valid "
            << split.valid.size() << "\n"
            << "kendall " << report.kendall_tau << ", pearson " << report.pearson
            << ", spearman " << report.spearman << " (n " << report.n << ")\n"
            << "wrote " << (out / "corr_report.csv").string() << ", predictions.csv\n";
  return 0;
}

int cmd_gen_dataset(const fs::path& space_file, const std::string& executor_kind,
                    const fs::path& params_file, std::size_t count, std::uint64_t seed,
                    const std::string& timestamps, double failure_fraction,
                    double jitter, const std::string& out_flag,
                    const std::string& file_name) {
  auto executor = build_executor(executor_kind, space_file, params_file);

  cubicml::DatasetOptions options;
  options.count = count;
  options.seed = seed;
  options.timestamps = cubicml::timestamp_policy_from_string(timestamps);
  options.failure_fraction = failure_fraction;
  options.scale_jitter = jitter;
  const std::vector<cubicml::JobRecord> records =
      cubicml::generate_dataset(*executor, options);

  const fs::path out = resolve_out_dir(out_flag, "");
  const fs::path file = out / file_name;
  cubicml::JobStore store = cubicml::JobStore::create(executor->space(), file);
  std::size_t failed = 0;
  for (const cubicml::JobRecord& record : records) {
    store.append(record);
    if (record.status != cubicml::JobStatus::completed) ++failed;
  }
  std::cout << "wrote " << records.size() << " records (" << failed << " failed) to "
            << file.string() << "\n";
  return 0;
}

int cmd_curve(const fs::path& history, const fs::path& space_file,
              std::vector<std::size_t> sizes, std::uint32_t perturbations,
              std::uint64_t seed, double valid_fraction, std::uint64_t split_seed,
              const std::string& backend, std::uint32_t parallel,
              const std::string& out_flag) {
  require_file(history, "history");
  require_file(space_file, "space file");
  const cubicml::SearchSpace space = cubicml::load_space(space_file);
  const cubicml::JobStore store = cubicml::JobStore::open(space, history);
  const cubicml::DatasetSplit split =
      cubicml::split_random(store.records(), valid_fraction, split_seed);

  cubicml::CurveOptions options;
  options.perturbations = perturbations;
  options.seed = seed;
  options.scorer.backend = cubicml::backend_from_string(backend);
  options.threads = parallel;
  const std::vector<cubicml::CurvePoint> points =
      cubicml::learning_curve(space, split, sizes, options);

  const fs::path out = resolve_out_dir(out_flag, "");
  cubicml::write_learning_curve_csv(points, out / "learning_curve.csv");

  for (const cubicml::CurvePoint& point : points) {
    std::cout << "size " << point.train_size << ": spearman " << point.spearman_mean
              << " +- " << 2.0 * point.spearman_std << " (2 std)\n";
  }
  std::cout << "wrote " << (out / "learning_curve.csv").string() << "\n";
  return 0;
}

int cmd_report(const fs::path& history, const fs::path& space_file,
               const fs::path& manifest_file, const std::string& out_flag) {
  require_file(history, "history");
  require_file(space_file, "space file");
  const cubicml::SearchSpace space = cubicml::load_space(space_file);
  const cubicml::JobStore store = cubicml::JobStore::open(space, history);
  if (store.completed().empty()) {
    throw cubicml::DataError("no completed jobs in " + history.string());
  }

  cubicml::LoopReport report = cubicml::report_from_store(store);
  const fs::path out = resolve_out_dir(out_flag, "");
  cubicml::write_frontier_csv(report, out / "frontier.csv");
  cubicml::write_best_config_json(space, report, out / "best_config.json");
  std::string wrote = "frontier.csv, best_config.json";

  if (!manifest_file.empty()) {
    require_file(manifest_file, "manifest");
    const Manifest manifest = load_manifest(manifest_file);
    cubicml::rescore_rounds(report, store, manifest.loop);
    cubicml::write_round_corr_csv(report, out / "round_corr.csv");
    wrote += ", round_corr.csv";
  }

  std::cout << store.records().size() << " records, " << store.completed().size()
            << " completed\n";
  for (const cubicml::RoundReport& round : report.rounds) print_round_line(round);
  std::cout << "best metric " << *report.best_metric << " (" << report.best_round
            << ")\nwrote " << wrote << " in " << out.string() << "\n";
  return 0;
}

int cmd_space_info(const fs::path& space_file) {
  require_file(space_file, "space file");
  const cubicml::SearchSpace space = cubicml::load_space(space_file);
  const cubicml::Cardinality card = space.cardinality();
  std::cout << "space: " << space.name() << " v" << space.version() << "\n";
  std::cout << "dimensions: " << space.dimension_count() << "\n";
  for (const auto& dim : space.dimensions()) {
    std::cout << "  " << dim.name() << " (" << cubicml::to_string(dim.kind()) << ", "
              << dim.value_count() << " values, role " << cubicml::to_string(dim.role())
              << ")\n";
  }
  std::cout << "cardinality: " << card.digits << "\n";
  std::cout << "one-hot length: " << cubicml::onehot_layout(space).length << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"CubicML: predictor-guided co-design tuning loop"};
  app.require_subcommand(1);
  app.footer(kFormatNotes);

  std::string out_flag;
  auto add_out_option = [&out_flag](CLI::App* sub) {
    sub->add_option("--out", out_flag, "Output directory (overrides $CUBIC_OUT_DIR)");
  };

  // search
  fs::path manifest_file;
  std::optional<std::uint64_t> seed_override;
  std::optional<std::uint32_t> parallel_override;
  CLI::App* search = app.add_subcommand(
      "search", "Run the full loop from a manifest: bootstrap, predictor-guided "
                "rounds, reports");
  search->add_option("--manifest", manifest_file, "Run manifest JSON")->required();
  search->add_option("--seed", seed_override, "Override the manifest's global seed");
  search->add_option("--parallel", parallel_override,
                     "Max concurrent job executions within a round");
  add_out_option(search);

  // fit-eval
  fs::path history_file;
  fs::path space_file;
  std::string backend = "gbdt";
  std::string split_name = "random";
  double valid_fraction = 0.25;
  std::uint64_t split_seed = 0;
  std::int64_t train_max = 3072;
  std::int64_t valid_min = 4096;
  std::uint64_t fit_seed = 0;
  CLI::App* fit_eval = app.add_subcommand(
      "fit-eval", "Fit a predictor on one side of a split and correlate its "
                  "scores on the other");
  fit_eval->add_option("--history", history_file, "Job history JSONL")->required();
  fit_eval->add_option("--space", space_file, "Space definition file")->required();
  fit_eval->add_option("--backend", backend, "Predictor backend")
      ->check(CLI::IsMember({"mlp-ensemble", "gbdt"}))
      ->capture_default_str();
  fit_eval->add_option("--split", split_name, "Validation regime")
      ->check(CLI::IsMember({"random", "temporal", "scale"}))
      ->capture_default_str();
  fit_eval->add_option("--valid-fraction", valid_fraction,
                       "Held-out fraction for random/temporal splits")
      ->capture_default_str();
  fit_eval->add_option("--split-seed", split_seed, "Random-split shuffle seed")
      ->capture_default_str();
  fit_eval->add_option("--train-max", train_max,
                       "Scale split: largest training scale")
      ->capture_default_str();
  fit_eval->add_option("--valid-min", valid_min,
                       "Scale split: smallest validation scale")
      ->capture_default_str();
  fit_eval->add_option("--seed", fit_seed, "Predictor fit seed")->capture_default_str();
  add_out_option(fit_eval);

  // gen-dataset
  std::string executor_kind = "llm";
  fs::path params_file;
  std::size_t count = 568;
  std::uint64_t gen_seed = 0;
  std::string timestamps = "uniform";
  double failure_fraction = 0.0;
  double jitter = 1.6;
  std::string dataset_name = "dataset.jsonl";
  CLI::App* gen = app.add_subcommand(
      "gen-dataset", "Sample, execute, and store a synthetic job history");
  gen->add_option("--space", space_file, "Space definition file")->required();
  gen->add_option("--executor", executor_kind, "Simulator kind")
      ->check(CLI::IsMember({"fsdp", "llm"}))
      ->capture_default_str();
  gen->add_option("--params", params_file, "Simulator params file")->required();
  gen->add_option("--count", count, "Records to generate")->capture_default_str();
  gen->add_option("--seed", gen_seed, "Generation seed")->capture_default_str();
  gen->add_option("--timestamps", timestamps, "Timestamp policy")
      ->check(CLI::IsMember({"uniform", "scale-correlated"}))
      ->capture_default_str();
  gen->add_option("--failure-fraction", failure_fraction,
                  "Fraction of records that must be failures")
      ->capture_default_str();
  gen->add_option("--jitter", jitter,
                  "Timestamp shuffling strength for scale-correlated stamps")
      ->capture_default_str();
  gen->add_option("--file", dataset_name, "Output file name inside the output dir")
      ->capture_default_str();
  add_out_option(gen);

  // curve
  std::vector<std::size_t> sizes = {25, 50, 100, 150, 200, 300, 423};
  std::uint32_t perturbations = 10;
  std::uint64_t curve_seed = 0;
  std::uint32_t curve_parallel = 1;
  CLI::App* curve = app.add_subcommand(
      "curve", "Predictor quality versus training-set size on a fixed split");
  curve->add_option("--history", history_file, "Job history JSONL")->required();
  curve->add_option("--space", space_file, "Space definition file")->required();
  curve->add_option("--sizes", sizes, "Training-set sizes")
      ->delimiter(',')
      ->capture_default_str();
  curve->add_option("--perturbations", perturbations, "Subsample draws per size")
      ->capture_default_str();
  curve->add_option("--seed", curve_seed, "Perturbation seed")->capture_default_str();
  curve->add_option("--valid-fraction", valid_fraction, "Held-out fraction")
      ->capture_default_str();
  curve->add_option("--split-seed", split_seed, "Random-split shuffle seed")
      ->capture_default_str();
  curve->add_option("--backend", backend, "Predictor backend")
      ->check(CLI::IsMember({"mlp-ensemble", "gbdt"}))
      ->capture_default_str();
  curve->add_option("--parallel", curve_parallel, "Concurrent perturbations")
      ->capture_default_str();
  add_out_option(curve);

  // report
  fs::path report_manifest;
  CLI::App* report = app.add_subcommand(
      "report", "Rebuild frontier and best-config reports from a stored history");
  report->add_option("--history", history_file, "Job history JSONL")->required();
  report->add_option("--space", space_file, "Space definition file")->required();
  report->add_option("--manifest", report_manifest,
                     "Run manifest; enables round_corr.csv re-derivation");
  add_out_option(report);

  // space-info
  CLI::App* space_info =
      app.add_subcommand("space-info", "Describe a search space file");
  space_info->add_option("--space", space_file, "Space definition file")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 2;
  }

  try {
    if (search->parsed()) {
      return cmd_search(manifest_file, out_flag, seed_override, parallel_override);
    }
    if (fit_eval->parsed()) {
      return cmd_fit_eval(history_file, space_file, backend, split_name,
                          valid_fraction, split_seed, train_max, valid_min, fit_seed,
                          out_flag);
    }
    if (gen->parsed()) {
      return cmd_gen_dataset(space_file, executor_kind, params_file, count, gen_seed,
                             timestamps, failure_fraction, jitter, out_flag,
                             dataset_name);
    }
    if (curve->parsed()) {
      return cmd_curve(history_file, space_file, sizes, perturbations, curve_seed,
                       valid_fraction, split_seed, backend, curve_parallel, out_flag);
    }
    if (report->parsed()) {
      return cmd_report(history_file, space_file, report_manifest, out_flag);
    }
    if (space_info->parsed()) return cmd_space_info(space_file);
  } catch (const cubicml::ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const cubicml::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
  return 0;
}
