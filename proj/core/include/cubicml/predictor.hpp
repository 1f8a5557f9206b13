#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "cubicml/gbdt.hpp"
#include "cubicml/job.hpp"
#include "cubicml/mlp_ensemble.hpp"
#include "cubicml/space.hpp"

namespace cubicml {

enum class PredictorBackend { mlp_ensemble, gbdt };

std::string to_string(PredictorBackend backend);
PredictorBackend backend_from_string(const std::string& text);

struct ScorerConfig {
  PredictorBackend backend = PredictorBackend::mlp_ensemble;
  EnsembleTrainConfig ensemble;
  GbdtConfig gbdt;
};

// Binds a predictor backend to a search space: encodes configurations
// (one-hot for the ranking ensemble, mixed numeric/categorical slots for the
// boosted trees), fits on completed job records, and scores configurations.
// Higher scores mean the backend expects a better metric.
class ConfigScorer {
 public:
  static ConfigScorer fit(const SearchSpace& space,
                          std::span<const JobRecord> records,
                          const ScorerConfig& config, std::uint64_t seed);

  double score(const ConfigPoint& point) const;

  PredictorBackend backend() const { return backend_; }
  const SearchSpace& space() const { return space_; }

  // Compact binary snapshot; load restores bit-identical predictions.  The
  // space is not embedded, only fingerprinted: load re-binds to the caller's
  // space and rejects a mismatch.
  void save(const std::filesystem::path& path) const;
  static ConfigScorer load(const std::filesystem::path& path,
                           const SearchSpace& space);

 private:
  explicit ConfigScorer(SearchSpace space);

  SparseVector encode_onehot_sparse(const ConfigPoint& point) const;

  SearchSpace space_;
  PredictorBackend backend_ = PredictorBackend::mlp_ensemble;
  OnehotLayout onehot_;
  MixedLayout mixed_;
  std::optional<EnsemblePredictor> ensemble_;
  std::optional<GbdtModel> gbdt_;
};

}  // namespace cubicml
