#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "doctest.h"

#include "cubicml/errors.hpp"
#include "cubicml/job_store.hpp"

using namespace cubicml;

namespace {

SearchSpace toy_space() {
  std::vector<Dimension> dims;
  dims.push_back(Dimension::categorical("mode", {"slow", "fast"}));
  dims.push_back(Dimension::stepped_integer("width", 1, 4, 1));
  return SearchSpace("toy", 1, std::move(dims));
}

std::filesystem::path temp_store_path(const std::string& tag) {
  static int counter = 0;
  return std::filesystem::temp_directory_path() /
         ("cubicml_test_" + tag + "_" + std::to_string(counter++) + ".jsonl");
}

JobRecord make_record(const SearchSpace& space, std::uint64_t seed, double timestamp,
                      double metric, JobStatus status = JobStatus::completed) {
  JobRecord r;
  r.config = space.sample_uniform(seed);
  r.status = status;
  if (status == JobStatus::completed) r.metric = metric;
  r.timestamp = timestamp;
  r.scale = 128;
  r.round_label = "random";
  return r;
}

std::vector<JobRecord> completed_batch(const SearchSpace& space, std::size_t n) {
  std::vector<JobRecord> records;
  for (std::size_t i = 0; i < n; ++i) {
    records.push_back(make_record(space, i, static_cast<double>(i + 1),
                                  100.0 + static_cast<double>(i)));
  }
  return records;
}

}  // namespace

TEST_SUITE("job_store") {

TEST_CASE("record invariants are enforced") {
  const SearchSpace space = toy_space();
  JobRecord ok = make_record(space, 1, 1.0, 50.0);
  CHECK_NOTHROW(check_record(ok));

  JobRecord no_metric = ok;
  no_metric.metric.reset();
  CHECK_THROWS_AS(check_record(no_metric), ValidationError);

  JobRecord failed_with_metric = ok;
  failed_with_metric.status = JobStatus::failed_oom;
  CHECK_THROWS_AS(check_record(failed_with_metric), ValidationError);

  JobRecord zero_metric = ok;
  zero_metric.metric = 0.0;
  CHECK_THROWS_AS(check_record(zero_metric), ValidationError);

  JobRecord failed = ok;
  failed.status = JobStatus::failed_infra;
  failed.metric.reset();
  CHECK_NOTHROW(check_record(failed));
}

TEST_CASE("job status names round trip") {
  for (const JobStatus s :
       {JobStatus::completed, JobStatus::failed_oom, JobStatus::failed_infra}) {
    CHECK(job_status_from_string(to_string(s)) == s);
  }
  CHECK_THROWS_AS(job_status_from_string("exploded"), ValidationError);
}

TEST_CASE("record json round trip") {
  const SearchSpace space = toy_space();
  const JobRecord r = make_record(space, 3, 7.5, 123.25);
  const JobRecord back = record_from_json(space, record_to_json(space, r));
  CHECK(back.config == r.config);
  CHECK(back.status == r.status);
  CHECK(back.metric == r.metric);
  CHECK(back.timestamp == r.timestamp);
  CHECK(back.scale == r.scale);
  CHECK(back.round_label == r.round_label);
}

TEST_CASE("append then load is identity") {
  const SearchSpace space = toy_space();
  const auto path = temp_store_path("roundtrip");
  {
    JobStore store = JobStore::create(space, path);
    for (const auto& r : completed_batch(space, 5)) store.append(r);
    JobRecord failed = make_record(space, 9, 6.0, 0.0, JobStatus::failed_oom);
    store.append(failed);
    CHECK(store.records().size() == 6);
    CHECK(store.completed().size() == 5);
  }
  JobStore reloaded = JobStore::open(space, path);
  REQUIRE(reloaded.records().size() == 6);
  CHECK(reloaded.records()[2].metric == 102.0);
  CHECK(reloaded.records()[5].status == JobStatus::failed_oom);
  std::filesystem::remove(path);
}

TEST_CASE("568 appends load back as 568 records") {
  const SearchSpace space = toy_space();
  const auto path = temp_store_path("bulk");
  {
    JobStore store = JobStore::create(space, path);
    for (const auto& r : completed_batch(space, 568)) store.append(r);
  }
  JobStore reloaded = JobStore::open(space, path);
  CHECK(reloaded.records().size() == 568);
  std::filesystem::remove(path);
}

TEST_CASE("torn final line is dropped on load") {
  const SearchSpace space = toy_space();
  const auto path = temp_store_path("torn");
  {
    JobStore store = JobStore::create(space, path);
    for (const auto& r : completed_batch(space, 3)) store.append(r);
  }
  {
    std::ofstream out(path, std::ios::app);
    out << R"({"config":{"mode":"fast","width":2},"status":"comp)";
  }
  JobStore reloaded = JobStore::open(space, path);
  CHECK(reloaded.records().size() == 3);

  // the reopened store is clean again: a fresh append lands on its own line
  JobRecord next = make_record(space, 20, 9.0, 400.0);
  reloaded.append(next);
  JobStore again = JobStore::open(space, path);
  CHECK(again.records().size() == 4);
  std::filesystem::remove(path);
}

TEST_CASE("corruption before the final line is an error") {
  const SearchSpace space = toy_space();
  const auto path = temp_store_path("corrupt");
  {
    JobStore store = JobStore::create(space, path);
    for (const auto& r : completed_batch(space, 2)) store.append(r);
  }
  std::string contents;
  {
    std::ifstream in(path);
    std::string line;
    std::getline(in, line);
    contents = "garbage line\n" + line + "\n";
  }
  {
    std::ofstream out(path, std::ios::trunc);
    out << contents;
  }
  CHECK_THROWS_AS(JobStore::open(space, path), DataError);
  std::filesystem::remove(path);
}

TEST_CASE("appends must not rewind time") {
  const SearchSpace space = toy_space();
  const auto path = temp_store_path("time");
  JobStore store = JobStore::create(space, path);
  store.append(make_record(space, 1, 5.0, 10.0));
  CHECK_THROWS_AS(store.append(make_record(space, 2, 4.0, 11.0)), ValidationError);
  store.append(make_record(space, 3, 5.0, 12.0));  // equal timestamps are fine
  CHECK(store.records().size() == 2);
  std::filesystem::remove(path);
}

TEST_CASE("random split hits the 423/145 example") {
  const SearchSpace space = toy_space();
  const auto records = completed_batch(space, 568);
  const DatasetSplit split = split_random(records, 145.0 / 568.0, 17);
  CHECK(split.valid.size() == 145);
  CHECK(split.train.size() == 423);

  const DatasetSplit again = split_random(records, 145.0 / 568.0, 17);
  REQUIRE(again.valid.size() == split.valid.size());
  for (std::size_t i = 0; i < split.valid.size(); ++i) {
    CHECK(again.valid[i].config == split.valid[i].config);
  }
}

TEST_CASE("random split partitions the input") {
  const SearchSpace space = toy_space();
  const auto records = completed_batch(space, 57);
  const DatasetSplit split = split_random(records, 0.25, 3);
  CHECK(split.train.size() + split.valid.size() == records.size());

  std::vector<double> seen;
  for (const auto& r : split.train) seen.push_back(r.timestamp);
  for (const auto& r : split.valid) seen.push_back(r.timestamp);
  std::sort(seen.begin(), seen.end());
  for (std::size_t i = 0; i < records.size(); ++i) {
    CHECK(seen[i] == static_cast<double>(i + 1));
  }
}

TEST_CASE("random split of two records at half") {
  const SearchSpace space = toy_space();
  const auto records = completed_batch(space, 2);
  const DatasetSplit split = split_random(records, 0.5, 1);
  CHECK(split.train.size() == 1);
  CHECK(split.valid.size() == 1);
}

TEST_CASE("random split rejects bad input") {
  const SearchSpace space = toy_space();
  const auto records = completed_batch(space, 10);
  CHECK_THROWS_AS(split_random(records, 0.0, 1), ValidationError);
  CHECK_THROWS_AS(split_random(records, 1.0, 1), ValidationError);
  CHECK_THROWS_AS(split_random(records, 0.01, 1), DataError);  // valid side empty
  CHECK_THROWS_AS(split_random(completed_batch(space, 1), 0.5, 1), DataError);

  auto with_failure = records;
  with_failure.push_back(make_record(space, 99, 20.0, 0.0, JobStatus::failed_infra));
  CHECK_THROWS_AS(split_random(with_failure, 0.5, 1), DataError);
}

TEST_CASE("temporal split keeps the newest fraction for validation") {
  const SearchSpace space = toy_space();
  auto records = completed_batch(space, 10);  // timestamps 1..10
  const DatasetSplit split = split_temporal(records, 0.3);
  REQUIRE(split.train.size() == 7);
  REQUIRE(split.valid.size() == 3);
  for (std::size_t i = 0; i < 7; ++i) CHECK(split.train[i].timestamp == i + 1);
  CHECK(split.valid[0].timestamp == 8);
  CHECK(split.valid[2].timestamp == 10);
}

TEST_CASE("temporal split is stable under equal timestamps") {
  const SearchSpace space = toy_space();
  std::vector<JobRecord> records;
  for (int i = 0; i < 6; ++i) {
    JobRecord r = make_record(space, i, 1.0, 10.0 + i);
    records.push_back(r);
  }
  const DatasetSplit split = split_temporal(records, 0.5);
  REQUIRE(split.train.size() == 3);
  CHECK(*split.train[0].metric == 10.0);
  CHECK(*split.train[2].metric == 12.0);
  CHECK(*split.valid[0].metric == 13.0);
}

TEST_CASE("temporal split handles 568 records") {
  const SearchSpace space = toy_space();
  const auto records = completed_batch(space, 568);
  const DatasetSplit split = split_temporal(records, 145.0 / 568.0);
  CHECK(split.train.size() == 423);
  CHECK(split.train.back().timestamp == 423.0);
  CHECK(split.valid.front().timestamp == 424.0);
}

TEST_CASE("scale split applies both bounds and excludes the gap") {
  const SearchSpace space = toy_space();
  std::vector<JobRecord> records;
  const std::vector<std::int64_t> scales{8, 1024, 3072, 3500, 4096, 16384};
  for (std::size_t i = 0; i < scales.size(); ++i) {
    JobRecord r = make_record(space, i, static_cast<double>(i), 10.0 + static_cast<double>(i));
    r.scale = scales[i];
    records.push_back(r);
  }
  const DatasetSplit split = split_scale(records, 3072, 4096);
  REQUIRE(split.train.size() == 3);
  REQUIRE(split.valid.size() == 2);
  CHECK(*split.train[2].scale == 3072);
  CHECK(*split.valid[0].scale == 4096);
  CHECK(*split.valid[1].scale == 16384);
  CHECK(split.train.size() + split.valid.size() == records.size() - 1);  // 3500 dropped
}

TEST_CASE("scale split error cases") {
  const SearchSpace space = toy_space();
  auto records = completed_batch(space, 4);  // all scale 128
  CHECK_THROWS_AS(split_scale(records, 3072, 4096), DataError);  // empty valid side
  CHECK_THROWS_AS(split_scale(records, 4096, 4096), ValidationError);

  auto no_scale = records;
  no_scale[1].scale.reset();
  CHECK_THROWS_AS(split_scale(no_scale, 3072, 4096), DataError);
}

TEST_CASE("max frontier is the running best") {
  const std::vector<double> metrics{3, 1, 5, 4};
  CHECK(max_frontier(metrics) == std::vector<double>{3, 3, 5, 5});
  CHECK(max_frontier(std::vector<double>{42.0}) == std::vector<double>{42.0});
}

TEST_CASE("max frontier over records and monotonicity") {
  const SearchSpace space = toy_space();
  std::vector<JobRecord> records;
  Rng rng(8);
  for (int i = 0; i < 40; ++i) {
    records.push_back(make_record(space, i, static_cast<double>(i), rng.uniform(1.0, 99.0)));
  }
  const std::vector<double> frontier = max_frontier(records);
  REQUIRE(frontier.size() == records.size());
  for (std::size_t i = 1; i < frontier.size(); ++i) {
    CHECK(frontier[i] >= frontier[i - 1]);
    CHECK(frontier[i] >= *records[i].metric);
  }
}

TEST_CASE("permuted frontier equals the mean of per-permutation frontiers") {
  std::vector<double> metrics{5, 1, 9, 2, 7, 7, 3};
  const std::size_t perms = 100;
  const std::uint64_t seed = 23;
  const std::vector<double> got = mean_permuted_frontier(metrics, perms, seed);

  // replicate the shuffles with the same generator, then average plain
  // max_frontier outputs
  std::vector<double> accum(metrics.size(), 0.0);
  std::vector<double> shuffled = metrics;
  Rng rng(seed);
  for (std::size_t p = 0; p < perms; ++p) {
    for (std::size_t i = shuffled.size(); i > 1; --i) {
      std::swap(shuffled[i - 1], shuffled[rng.below(i)]);
    }
    const std::vector<double> f = max_frontier(shuffled);
    for (std::size_t i = 0; i < f.size(); ++i) accum[i] += f[i];
  }
  for (double& v : accum) v /= static_cast<double>(perms);

  REQUIRE(got.size() == accum.size());
  for (std::size_t i = 0; i < got.size(); ++i) CHECK(got[i] == accum[i]);
  CHECK(got.back() == 9.0);
  for (std::size_t i = 1; i < got.size(); ++i) CHECK(got[i] >= got[i - 1]);
}

}  // TEST_SUITE
