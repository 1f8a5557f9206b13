#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace cubicml {

// All three estimators reject degenerate inputs (mismatched or short vectors,
// zero variance) with DataError instead of returning a silent 0.

double pearson(std::span<const double> x, std::span<const double> y);

// Pearson correlation of average ranks; ties share the mean of their ranks.
double spearman(std::span<const double> x, std::span<const double> y);

// Tie-corrected tau-b, computed in O(n log n).
double kendall_tau(std::span<const double> x, std::span<const double> y);

// 1-based ranks with ties assigned the mean rank of their run.
std::vector<double> average_ranks(std::span<const double> values);

struct CorrelationReport {
  double kendall_tau = 0.0;
  double pearson = 0.0;
  double spearman = 0.0;
  std::size_t n = 0;
};

CorrelationReport correlation_report(std::span<const double> predicted,
                                     std::span<const double> actual);

}  // namespace cubicml
