#include "cubicml/job_store.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "cubicml/errors.hpp"
#include "internal/config_json.hpp"

namespace cubicml {

namespace {

using json = nlohmann::ordered_json;

void check_completed_only(const std::vector<JobRecord>& records, const char* op) {
  for (const auto& r : records) {
    if (r.status != JobStatus::completed) {
      throw DataError(std::string(op) + ": input must contain completed records only");
    }
  }
}

std::size_t valid_count_from_fraction(std::size_t n, double fraction, const char* op) {
  if (n < 2) {
    throw DataError(std::string(op) + ": need at least 2 records, got " + std::to_string(n));
  }
  if (!(fraction > 0.0) || !(fraction < 1.0)) {
    throw ValidationError(std::string(op) + ": valid fraction must be in (0, 1), got " +
                          std::to_string(fraction));
  }
  const auto n_valid =
      static_cast<std::size_t>(std::llround(fraction * static_cast<double>(n)));
  if (n_valid == 0 || n_valid >= n) {
    throw DataError(std::string(op) + ": fraction " + std::to_string(fraction) +
                    " leaves one side of the split empty");
  }
  return n_valid;
}

}  // namespace

std::string_view to_string(JobStatus status) {
  switch (status) {
    case JobStatus::completed: return "completed";
    case JobStatus::failed_oom: return "failed_oom";
    case JobStatus::failed_infra: return "failed_infra";
  }
  throw ValidationError("unrepresentable job status");
}

JobStatus job_status_from_string(std::string_view text) {
  if (text == "completed") return JobStatus::completed;
  if (text == "failed_oom") return JobStatus::failed_oom;
  if (text == "failed_infra") return JobStatus::failed_infra;
  throw ValidationError("unknown job status '" + std::string(text) + "'");
}

void check_record(const JobRecord& record) {
  if (record.status == JobStatus::completed) {
    if (!record.metric) {
      throw ValidationError("completed record must carry a metric");
    }
    if (!(*record.metric > 0.0) || !std::isfinite(*record.metric)) {
      throw ValidationError("completed record metric must be finite and positive, got " +
                            std::to_string(*record.metric));
    }
  } else if (record.metric) {
    throw ValidationError("failed record must not carry a metric");
  }
  if (!std::isfinite(record.timestamp)) {
    throw ValidationError("record timestamp must be finite");
  }
  if (record.scale && *record.scale <= 0) {
    throw ValidationError("record scale must be positive, got " + std::to_string(*record.scale));
  }
}

std::string record_to_json(const SearchSpace& space, const JobRecord& record) {
  check_record(record);
  json obj = json::object();
  obj["config"] = detail::config_to_json_obj(space, record.config);
  obj["status"] = std::string(to_string(record.status));
  if (record.metric) {
    obj["metric"] = *record.metric;
  } else {
    obj["metric"] = nullptr;
  }
  obj["timestamp"] = record.timestamp;
  if (record.scale) {
    obj["scale"] = *record.scale;
  } else {
    obj["scale"] = nullptr;
  }
  obj["round"] = record.round_label;
  return obj.dump();
}

JobRecord record_from_json(const SearchSpace& space, const std::string& line) {
  json obj;
  try {
    obj = json::parse(line);
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("record is not valid JSON: ") + e.what());
  }
  if (!obj.is_object()) throw DataError("record must be a JSON object");
  for (const char* field : {"config", "status", "metric", "timestamp", "scale", "round"}) {
    if (!obj.contains(field)) {
      throw DataError("record missing field '" + std::string(field) + "'");
    }
  }
  JobRecord record;
  record.config = detail::config_from_json_obj(space, obj["config"]);
  record.status = job_status_from_string(obj["status"].get<std::string>());
  if (!obj["metric"].is_null()) {
    if (!obj["metric"].is_number()) throw DataError("record field 'metric' must be a number");
    record.metric = obj["metric"].get<double>();
  }
  if (!obj["timestamp"].is_number()) throw DataError("record field 'timestamp' must be a number");
  record.timestamp = obj["timestamp"].get<double>();
  if (!obj["scale"].is_null()) {
    if (!obj["scale"].is_number_integer()) {
      throw DataError("record field 'scale' must be an integer");
    }
    record.scale = obj["scale"].get<std::int64_t>();
  }
  if (!obj["round"].is_string()) throw DataError("record field 'round' must be a string");
  record.round_label = obj["round"].get<std::string>();
  check_record(record);
  return record;
}

JobStore::JobStore(SearchSpace space, std::filesystem::path file)
    : space_(std::move(space)), file_(std::move(file)) {}

JobStore JobStore::create(const SearchSpace& space, std::filesystem::path file) {
  JobStore store(space, std::move(file));
  store.out_.open(store.file_, std::ios::out | std::ios::trunc);
  if (!store.out_) throw IoError("cannot create store file: " + store.file_.string());
  return store;
}

JobStore JobStore::open(const SearchSpace& space, std::filesystem::path file) {
  JobStore store(space, std::move(file));
  {
    std::ifstream in(store.file_);
    if (!in) throw IoError("cannot open store file: " + store.file_.string());
    std::vector<std::string> lines;
    std::string line;
    bool last_complete = true;
    while (std::getline(in, line)) {
      lines.push_back(line);
      last_complete = !in.eof();
    }
    double last_ts = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < lines.size(); ++i) {
      const bool final_line = i + 1 == lines.size();
      try {
        JobRecord record = record_from_json(store.space_, lines[i]);
        if (record.timestamp < last_ts) {
          throw DataError("timestamps decrease at line " + std::to_string(i + 1));
        }
        last_ts = record.timestamp;
        store.records_.push_back(std::move(record));
      } catch (const DataError&) {
        // A torn final line is the expected crash artifact; anything earlier
        // is real corruption.
        if (final_line && !last_complete) break;
        throw DataError("store file " + store.file_.string() + " corrupt at line " +
                        std::to_string(i + 1));
      }
    }
  }
  store.out_.open(store.file_, std::ios::out | std::ios::trunc);
  if (!store.out_) throw IoError("cannot reopen store file: " + store.file_.string());
  for (const auto& record : store.records_) {
    store.out_ << record_to_json(store.space_, record) << '\n';
  }
  store.out_.flush();
  return store;
}

void JobStore::append(const JobRecord& record) {
  check_record(record);
  space_.check_config(record.config);
  if (!records_.empty() && record.timestamp < records_.back().timestamp) {
    throw ValidationError("append would decrease store timestamps (" +
                          std::to_string(record.timestamp) + " after " +
                          std::to_string(records_.back().timestamp) + ")");
  }
  out_ << record_to_json(space_, record) << '\n';
  out_.flush();
  if (!out_) throw IoError("failed appending to store file: " + file_.string());
  records_.push_back(record);
}

std::vector<JobRecord> JobStore::completed() const {
  std::vector<JobRecord> out;
  for (const auto& record : records_) {
    if (record.status == JobStatus::completed) out.push_back(record);
  }
  return out;
}

DatasetSplit split_random(const std::vector<JobRecord>& records, double valid_fraction,
                          std::uint64_t seed) {
  check_completed_only(records, "split_random");
  const std::size_t n_valid = valid_count_from_fraction(records.size(), valid_fraction,
                                                        "split_random");
  std::vector<std::size_t> order(records.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  Rng rng(seed);
  for (std::size_t i = order.size() - 1; i > 0; --i) {
    std::swap(order[i], order[rng.below(i + 1)]);
  }
  std::vector<std::size_t> valid_idx(order.begin(),
                                     order.begin() + static_cast<std::ptrdiff_t>(n_valid));
  std::sort(valid_idx.begin(), valid_idx.end());
  std::vector<bool> in_valid(records.size(), false);
  for (const std::size_t i : valid_idx) in_valid[i] = true;

  DatasetSplit split;
  split.strategy = SplitStrategy::random;
  for (std::size_t i = 0; i < records.size(); ++i) {
    (in_valid[i] ? split.valid : split.train).push_back(records[i]);
  }
  return split;
}

DatasetSplit split_temporal(const std::vector<JobRecord>& records, double valid_fraction) {
  check_completed_only(records, "split_temporal");
  const std::size_t n_valid = valid_count_from_fraction(records.size(), valid_fraction,
                                                        "split_temporal");
  std::vector<std::size_t> order(records.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return records[a].timestamp < records[b].timestamp;
  });
  const std::size_t n_train = records.size() - n_valid;
  DatasetSplit split;
  split.strategy = SplitStrategy::temporal;
  for (std::size_t i = 0; i < order.size(); ++i) {
    (i < n_train ? split.train : split.valid).push_back(records[order[i]]);
  }
  return split;
}

DatasetSplit split_scale(const std::vector<JobRecord>& records, std::int64_t train_max_scale,
                         std::int64_t valid_min_scale) {
  check_completed_only(records, "split_scale");
  if (train_max_scale >= valid_min_scale) {
    throw ValidationError("split_scale: train max scale must be below valid min scale");
  }
  DatasetSplit split;
  split.strategy = SplitStrategy::scale;
  for (const auto& record : records) {
    if (!record.scale) {
      throw DataError("split_scale: record without a scale tag");
    }
    if (*record.scale <= train_max_scale) {
      split.train.push_back(record);
    } else if (*record.scale >= valid_min_scale) {
      split.valid.push_back(record);
    }
  }
  if (split.train.empty()) throw DataError("split_scale: no records at training scales");
  if (split.valid.empty()) throw DataError("split_scale: no records at validation scales");
  return split;
}

std::vector<double> max_frontier(std::span<const double> metrics) {
  std::vector<double> frontier;
  frontier.reserve(metrics.size());
  double best = -std::numeric_limits<double>::infinity();
  for (const double m : metrics) {
    best = std::max(best, m);
    frontier.push_back(best);
  }
  return frontier;
}

std::vector<double> max_frontier(const std::vector<JobRecord>& completed_records) {
  check_completed_only(completed_records, "max_frontier");
  std::vector<double> metrics;
  metrics.reserve(completed_records.size());
  for (const auto& record : completed_records) metrics.push_back(*record.metric);
  return max_frontier(metrics);
}

std::vector<double> mean_permuted_frontier(std::span<const double> metrics,
                                           std::size_t permutations, std::uint64_t seed) {
  if (permutations == 0) {
    throw ValidationError("mean_permuted_frontier: need at least one permutation");
  }
  std::vector<double> accum(metrics.size(), 0.0);
  std::vector<double> shuffled(metrics.begin(), metrics.end());
  Rng rng(seed);
  for (std::size_t p = 0; p < permutations; ++p) {
    for (std::size_t i = shuffled.size(); i > 1; --i) {
      std::swap(shuffled[i - 1], shuffled[rng.below(i)]);
    }
    double best = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < shuffled.size(); ++i) {
      best = std::max(best, shuffled[i]);
      accum[i] += best;
    }
  }
  for (double& v : accum) v /= static_cast<double>(permutations);
  return accum;
}

}  // namespace cubicml
