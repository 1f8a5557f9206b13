#pragma once

#include <span>
#include <vector>

namespace cubicml {

double mean(std::span<const double> values);

// Sample standard deviation (n - 1 denominator); 0.0 for fewer than two values.
double stddev(std::span<const double> values);

// Nearest-rank percentile: the element at 1-based index ceil(p/100 * n) of the
// ascending sort.  p in (0, 100].  Throws on empty input.
double percentile_nearest_rank(std::span<const double> values, double p);

}  // namespace cubicml
