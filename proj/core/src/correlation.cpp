#include "cubicml/correlation.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <string>

#include "cubicml/errors.hpp"

namespace cubicml {

namespace {

void check_paired(std::span<const double> x, std::span<const double> y, const char* op) {
  if (x.size() != y.size()) {
    throw DataError(std::string(op) + ": length mismatch (" + std::to_string(x.size()) + " vs " +
                    std::to_string(y.size()) + ")");
  }
  if (x.size() < 2) {
    throw DataError(std::string(op) + ": need at least 2 observations, got " +
                    std::to_string(x.size()));
  }
}

// Counts inversions (strict descents) in values[] by merge sort.
std::int64_t count_inversions(std::vector<double>& values, std::vector<double>& scratch,
                              std::size_t lo, std::size_t hi) {
  if (hi - lo < 2) return 0;
  const std::size_t mid = lo + (hi - lo) / 2;
  std::int64_t inv = count_inversions(values, scratch, lo, mid) +
                     count_inversions(values, scratch, mid, hi);
  std::size_t a = lo, b = mid, out = lo;
  while (a < mid && b < hi) {
    if (values[b] < values[a]) {
      inv += static_cast<std::int64_t>(mid - a);
      scratch[out++] = values[b++];
    } else {
      scratch[out++] = values[a++];
    }
  }
  while (a < mid) scratch[out++] = values[a++];
  while (b < hi) scratch[out++] = values[b++];
  std::copy(scratch.begin() + static_cast<std::ptrdiff_t>(lo),
            scratch.begin() + static_cast<std::ptrdiff_t>(hi),
            values.begin() + static_cast<std::ptrdiff_t>(lo));
  return inv;
}

std::int64_t tie_pair_count(std::vector<double> sorted_values) {
  std::int64_t pairs = 0;
  std::int64_t run = 1;
  for (std::size_t i = 1; i <= sorted_values.size(); ++i) {
    if (i < sorted_values.size() && sorted_values[i] == sorted_values[i - 1]) {
      ++run;
    } else {
      pairs += run * (run - 1) / 2;
      run = 1;
    }
  }
  return pairs;
}

}  // namespace

double pearson(std::span<const double> x, std::span<const double> y) {
  check_paired(x, y, "pearson");
  const auto n = static_cast<double>(x.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double dx = x[i] - mx;
    const double dy = y[i] - my;
    sxy += dx * dy;
    sxx += dx * dx;
    syy += dy * dy;
  }
  if (sxx == 0.0 || syy == 0.0) {
    throw DataError("pearson: undefined for zero-variance input");
  }
  return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

std::vector<double> average_ranks(std::span<const double> values) {
  std::vector<std::size_t> order(values.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
  std::vector<double> ranks(values.size(), 0.0);
  std::size_t i = 0;
  while (i < order.size()) {
    std::size_t j = i;
    while (j + 1 < order.size() && values[order[j + 1]] == values[order[i]]) ++j;
    // positions i..j (0-based) share the mean of ranks i+1..j+1
    const double rank = static_cast<double>(i + j) / 2.0 + 1.0;
    for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = rank;
    i = j + 1;
  }
  return ranks;
}

double spearman(std::span<const double> x, std::span<const double> y) {
  check_paired(x, y, "spearman");
  const std::vector<double> rx = average_ranks(x);
  const std::vector<double> ry = average_ranks(y);
  try {
    return pearson(rx, ry);
  } catch (const DataError&) {
    throw DataError("spearman: undefined for constant input");
  }
}

double kendall_tau(std::span<const double> x, std::span<const double> y) {
  check_paired(x, y, "kendall_tau");
  const std::size_t n = x.size();

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (x[a] != x[b]) return x[a] < x[b];
    return y[a] < y[b];
  });

  const std::int64_t n0 = static_cast<std::int64_t>(n) * static_cast<std::int64_t>(n - 1) / 2;

  // Tie pair counts: within x, within y, and within joint (x, y) runs.
  std::int64_t n1 = 0, n3 = 0;
  {
    std::int64_t run_x = 1, run_xy = 1;
    for (std::size_t i = 1; i <= n; ++i) {
      const bool same_x = i < n && x[order[i]] == x[order[i - 1]];
      const bool same_xy = same_x && y[order[i]] == y[order[i - 1]];
      if (same_x) {
        ++run_x;
      } else {
        n1 += run_x * (run_x - 1) / 2;
        run_x = 1;
      }
      if (same_xy) {
        ++run_xy;
      } else {
        n3 += run_xy * (run_xy - 1) / 2;
        run_xy = 1;
      }
    }
  }
  std::int64_t n2 = 0;
  {
    std::vector<double> ys(y.begin(), y.end());
    std::sort(ys.begin(), ys.end());
    n2 = tie_pair_count(std::move(ys));
  }

  // y laid out in (x, y) sort order: strict descents are exactly the
  // discordant pairs, since equal x never contributes (y ascending within
  // runs) and equal y is not a descent.
  std::vector<double> ys_ordered(n);
  for (std::size_t i = 0; i < n; ++i) ys_ordered[i] = y[order[i]];
  std::vector<double> scratch(n);
  const std::int64_t discordant = count_inversions(ys_ordered, scratch, 0, n);

  const std::int64_t concordant = n0 - n1 - n2 + n3 - discordant;
  const double denom = std::sqrt(static_cast<double>(n0 - n1) * static_cast<double>(n0 - n2));
  if (denom == 0.0) {
    throw DataError("kendall_tau: undefined for constant input");
  }
  const double numer = static_cast<double>(concordant) - static_cast<double>(discordant);
  return std::clamp(numer / denom, -1.0, 1.0);
}

CorrelationReport correlation_report(std::span<const double> predicted,
                                     std::span<const double> actual) {
  CorrelationReport report;
  report.kendall_tau = kendall_tau(predicted, actual);
  report.pearson = pearson(predicted, actual);
  report.spearman = spearman(predicted, actual);
  report.n = predicted.size();
  return report;
}

}  // namespace cubicml
