#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "cubicml/amsgrad.hpp"
#include "cubicml/mlp.hpp"

namespace cubicml {

struct EnsembleTrainConfig {
  std::uint32_t members = 10;
  std::uint32_t hidden_dim = 1600;
  std::uint32_t epochs = 200;
  std::uint32_t batch_pairs = 64;
  double margin = 0.001;
  double dropout = 0.5;
  AmsgradConfig optimizer;
  std::uint32_t threads = 1;
};

// Ensemble of pairwise-ranking MLPs. Each member trains on randomly drawn
// example pairs with a margin hinge on the score difference; the ensemble
// score is the mean member output. Scores are only meaningful relative to
// each other (higher = better), not in metric units.
class EnsemblePredictor {
 public:
  static EnsemblePredictor fit(const std::vector<SparseVector>& features,
                               std::uint32_t input_dim,
                               const std::vector<double>& metrics,
                               const EnsembleTrainConfig& config,
                               std::uint64_t seed);
  static EnsemblePredictor fit_dense(const std::vector<std::vector<double>>& features,
                                     const std::vector<double>& metrics,
                                     const EnsembleTrainConfig& config,
                                     std::uint64_t seed);

  static EnsemblePredictor from_members(std::vector<MlpModel> members);

  double predict(const SparseVector& features) const;
  double predict_dense(std::span<const double> features) const;

  const std::vector<MlpModel>& members() const { return members_; }
  std::uint32_t input_dim() const { return members_.front().input_dim(); }
  std::uint32_t hidden_dim() const { return members_.front().hidden_dim(); }

 private:
  explicit EnsemblePredictor(std::vector<MlpModel> members);

  std::vector<MlpModel> members_;
};

}  // namespace cubicml
