#include "cubicml/stats.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "cubicml/errors.hpp"

namespace cubicml {

double mean(std::span<const double> values) {
  if (values.empty()) throw DataError("mean: empty input");
  double acc = 0.0;
  for (double v : values) acc += v;
  return acc / static_cast<double>(values.size());
}

double stddev(std::span<const double> values) {
  if (values.size() < 2) return 0.0;
  const double m = mean(values);
  double acc = 0.0;
  for (double v : values) acc += (v - m) * (v - m);
  return std::sqrt(acc / static_cast<double>(values.size() - 1));
}

double percentile_nearest_rank(std::span<const double> values, double p) {
  if (values.empty()) throw DataError("percentile_nearest_rank: empty input");
  if (!(p > 0.0) || p > 100.0) {
    throw ValidationError("percentile_nearest_rank: p must be in (0, 100], got " + std::to_string(p));
  }
  std::vector<double> sorted(values.begin(), values.end());
  std::sort(sorted.begin(), sorted.end());
  const auto n = static_cast<double>(sorted.size());
  auto rank = static_cast<std::size_t>(std::ceil(p / 100.0 * n));
  if (rank == 0) rank = 1;
  if (rank > sorted.size()) rank = sorted.size();
  return sorted[rank - 1];
}

}  // namespace cubicml
