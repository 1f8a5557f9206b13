#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "cubicml/job_store.hpp"
#include "cubicml/predictor.hpp"
#include "cubicml/space.hpp"

namespace cubicml {

struct CurveOptions {
  std::uint32_t perturbations = 10;
  std::uint64_t seed = 0;
  // Boosted trees by default: the curve studies the tabular backend.
  ScorerConfig scorer;
  std::uint32_t threads = 1;

  CurveOptions() { scorer.backend = PredictorBackend::gbdt; }
};

// Correlation statistics of one training-set size, over the perturbations.
// Stds are population stds of the observed values (the plotted band is
// mean +- 2 std).
struct CurvePoint {
  std::size_t train_size = 0;
  double kendall_mean = 0.0;
  double kendall_std = 0.0;
  double pearson_mean = 0.0;
  double pearson_std = 0.0;
  double spearman_mean = 0.0;
  double spearman_std = 0.0;
};

// Predictor quality versus training-set size: for every size, each
// perturbation draws that many records from split.train without replacement,
// fits a fresh scorer, and scores the fixed split.valid; one CurvePoint
// aggregates the perturbations.  Perturbation p uses the same draw order at
// every size, so smaller subsamples nest inside larger ones.  A size below 2
// or beyond the training set, or a perturbation whose correlation is
// undefined, is a DataError.
std::vector<CurvePoint> learning_curve(const SearchSpace& space, const DatasetSplit& split,
                                       std::span<const std::size_t> sizes,
                                       const CurveOptions& options = {});

// size,kendall_mean,kendall_std,pearson_mean,pearson_std,spearman_mean,spearman_std
void write_learning_curve_csv(std::span<const CurvePoint> points,
                              const std::filesystem::path& path);

}  // namespace cubicml
