#include "cubicml/learning_curve.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <thread>

#include "cubicml/correlation.hpp"
#include "cubicml/errors.hpp"
#include "cubicml/rng.hpp"

namespace cubicml {

namespace {

// First `size` positions of the seed's full permutation of [0, n), restored
// to ascending order: a draw selects records, it never reorders the dataset.
std::vector<std::size_t> draw_without_replacement(std::size_t n, std::size_t size,
                                                  std::uint64_t seed) {
  std::vector<std::size_t> indices(n);
  for (std::size_t i = 0; i < n; ++i) indices[i] = i;
  Rng rng(seed);
  for (std::size_t i = 0; i < size; ++i) {
    const std::size_t j = i + static_cast<std::size_t>(rng.below(n - i));
    std::swap(indices[i], indices[j]);
  }
  indices.resize(size);
  std::sort(indices.begin(), indices.end());
  return indices;
}

struct Moments {
  double mean = 0.0;
  double std_dev = 0.0;
};

Moments moments(std::span<const double> values) {
  Moments m;
  bool all_equal = true;
  for (double v : values) {
    if (v != values.front()) all_equal = false;
    m.mean += v;
  }
  if (all_equal) return {values.front(), 0.0};
  m.mean /= static_cast<double>(values.size());
  double accum = 0.0;
  for (double v : values) accum += (v - m.mean) * (v - m.mean);
  m.std_dev = std::sqrt(accum / static_cast<double>(values.size()));
  return m;
}

std::string fmt_double(double value) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", value);
  return buf;
}

}  // namespace

std::vector<CurvePoint> learning_curve(const SearchSpace& space, const DatasetSplit& split,
                                       std::span<const std::size_t> sizes,
                                       const CurveOptions& options) {
  if (sizes.empty()) throw ValidationError("learning curve: no sizes given");
  if (options.perturbations < 1) {
    throw ValidationError("learning curve: need at least 1 perturbation");
  }
  if (split.valid.size() < 2) {
    throw DataError("learning curve: validation set needs at least 2 records");
  }
  for (std::size_t size : sizes) {
    if (size < 2) {
      throw DataError("learning curve: size " + std::to_string(size) +
                      " is too small to fit");
    }
    if (size > split.train.size()) {
      throw DataError("learning curve: size " + std::to_string(size) +
                      " exceeds the training set (" +
                      std::to_string(split.train.size()) + ")");
    }
  }

  std::vector<double> actual;
  actual.reserve(split.valid.size());
  for (const JobRecord& record : split.valid) actual.push_back(*record.metric);

  std::vector<CurvePoint> points;
  points.reserve(sizes.size());
  for (std::size_t size : sizes) {
    const std::uint32_t p_count = options.perturbations;
    std::vector<double> kendall(p_count);
    std::vector<double> pearson(p_count);
    std::vector<double> spearman(p_count);
    std::vector<std::exception_ptr> failures(p_count);

    auto run_one = [&](std::uint32_t p) {
      const std::vector<std::size_t> picks = draw_without_replacement(
          split.train.size(), size, derive_seed(options.seed, "curve", p));
      std::vector<JobRecord> subsample;
      subsample.reserve(size);
      for (std::size_t index : picks) subsample.push_back(split.train[index]);
      const ConfigScorer scorer =
          ConfigScorer::fit(space, subsample, options.scorer,
                            derive_seed(options.seed, "curve-fit", p));
      std::vector<double> predicted;
      predicted.reserve(split.valid.size());
      for (const JobRecord& record : split.valid) {
        predicted.push_back(scorer.score(record.config));
      }
      const CorrelationReport report = correlation_report(predicted, actual);
      kendall[p] = report.kendall_tau;
      pearson[p] = report.pearson;
      spearman[p] = report.spearman;
    };

    const std::size_t workers =
        std::min<std::size_t>(std::max<std::uint32_t>(options.threads, 1), p_count);
    if (workers <= 1) {
      for (std::uint32_t p = 0; p < p_count; ++p) run_one(p);
    } else {
      std::atomic<std::uint32_t> next{0};
      auto drain = [&] {
        for (std::uint32_t p = next.fetch_add(1); p < p_count; p = next.fetch_add(1)) {
          try {
            run_one(p);
          } catch (...) {
            failures[p] = std::current_exception();
          }
        }
      };
      std::vector<std::thread> pool;
      pool.reserve(workers);
      for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(drain);
      for (auto& worker : pool) worker.join();
      for (const std::exception_ptr& failure : failures) {
        if (failure) std::rethrow_exception(failure);
      }
    }

    CurvePoint point;
    point.train_size = size;
    const Moments k = moments(kendall);
    const Moments r = moments(pearson);
    const Moments s = moments(spearman);
    point.kendall_mean = k.mean;
    point.kendall_std = k.std_dev;
    point.pearson_mean = r.mean;
    point.pearson_std = r.std_dev;
    point.spearman_mean = s.mean;
    point.spearman_std = s.std_dev;
    points.push_back(point);
  }
  return points;
}

void write_learning_curve_csv(std::span<const CurvePoint> points,
                              const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write " + path.string());
  out << "size,kendall_mean,kendall_std,pearson_mean,pearson_std,"
         "spearman_mean,spearman_std\n";
  for (const CurvePoint& point : points) {
    out << point.train_size << ',' << fmt_double(point.kendall_mean) << ','
        << fmt_double(point.kendall_std) << ',' << fmt_double(point.pearson_mean) << ','
        << fmt_double(point.pearson_std) << ',' << fmt_double(point.spearman_mean) << ','
        << fmt_double(point.spearman_std) << '\n';
  }
}

}  // namespace cubicml
