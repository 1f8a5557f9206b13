#include "cubicml/mlp_ensemble.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <thread>
#include <utility>

#include "cubicml/errors.hpp"
#include "cubicml/rng.hpp"

namespace cubicml {

namespace {

void validate_training_set(const std::vector<SparseVector>& features,
                           std::uint32_t input_dim,
                           const std::vector<double>& metrics) {
  if (features.size() != metrics.size()) {
    throw ValidationError("ensemble fit: feature/metric count mismatch");
  }
  if (features.size() < 2) {
    throw DataError("ensemble fit: need at least 2 examples");
  }
  if (input_dim == 0) {
    throw ValidationError("ensemble fit: input_dim must be positive");
  }
  for (const auto& example : features) {
    for (const auto& [index, value] : example) {
      if (index >= input_dim) {
        throw ValidationError("ensemble fit: feature index out of range");
      }
      if (!std::isfinite(value)) {
        throw DataError("ensemble fit: non-finite feature value");
      }
    }
  }
  bool distinct = false;
  for (std::size_t i = 1; i < metrics.size(); ++i) {
    if (!std::isfinite(metrics[i - 1]) || !std::isfinite(metrics[i])) {
      throw DataError("ensemble fit: non-finite metric");
    }
    if (metrics[i] != metrics[0]) distinct = true;
  }
  if (!std::isfinite(metrics[0])) throw DataError("ensemble fit: non-finite metric");
  if (!distinct) {
    throw DataError("ensemble fit: all metrics identical, nothing to rank");
  }
}

// Trains one member in place. The rng stream covers pair draws and dropout
// masks; everything else is deterministic given the model's init seed.
void train_member(MlpModel& model, const std::vector<SparseVector>& features,
                  const std::vector<double>& metrics,
                  const EnsembleTrainConfig& config, std::uint64_t pair_seed) {
  const std::size_t n = features.size();
  const std::size_t batches_per_epoch =
      (n + config.batch_pairs - 1) / config.batch_pairs;
  const double keep = 1.0 - config.dropout;
  const double dropout_scale = keep > 0.0 ? 1.0 / keep : 1.0;

  Rng rng(pair_seed);
  MlpPairTrainer trainer(model);
  std::vector<double> grads(model.parameter_count(), 0.0);
  AmsgradState optimizer(model.parameter_count());

  for (std::uint32_t epoch = 0; epoch < config.epochs; ++epoch) {
    for (std::size_t batch = 0; batch < batches_per_epoch; ++batch) {
      std::fill(grads.begin(), grads.end(), 0.0);
      std::size_t contributing = 0;
      for (std::uint32_t k = 0; k < config.batch_pairs; ++k) {
        const std::size_t i = static_cast<std::size_t>(rng.below(n));
        const std::size_t j = static_cast<std::size_t>(rng.below(n));
        if (metrics[i] == metrics[j]) continue;
        const int label = metrics[i] > metrics[j] ? 1 : -1;
        trainer.accumulate(model, features[i], features[j], label,
                           config.margin, grads,
                           config.dropout > 0.0 ? &rng : nullptr,
                           dropout_scale);
        ++contributing;
      }
      if (contributing == 0) continue;
      const double inv = 1.0 / static_cast<double>(contributing);
      for (double& g : grads) g *= inv;
      optimizer.step(model.parameters(), grads, config.optimizer);
    }
  }
}

}  // namespace

EnsemblePredictor::EnsemblePredictor(std::vector<MlpModel> members)
    : members_(std::move(members)) {}

EnsemblePredictor EnsemblePredictor::fit(
    const std::vector<SparseVector>& features, std::uint32_t input_dim,
    const std::vector<double>& metrics, const EnsembleTrainConfig& config,
    std::uint64_t seed) {
  validate_training_set(features, input_dim, metrics);
  if (config.members == 0) {
    throw ValidationError("ensemble fit: need at least one member");
  }
  if (config.batch_pairs == 0) {
    throw ValidationError("ensemble fit: batch_pairs must be positive");
  }
  if (config.dropout < 0.0 || config.dropout >= 1.0) {
    throw ValidationError("ensemble fit: dropout must be in [0, 1)");
  }

  std::vector<MlpModel> members;
  members.reserve(config.members);
  for (std::uint32_t m = 0; m < config.members; ++m) {
    members.emplace_back(input_dim, config.hidden_dim, seed + m);
  }

  const std::uint32_t workers =
      std::max<std::uint32_t>(1, std::min(config.threads, config.members));
  if (workers == 1) {
    for (std::uint32_t m = 0; m < config.members; ++m) {
      train_member(members[m], features, metrics, config,
                   derive_seed(seed + m, "pair-sampling"));
    }
  } else {
    // Members are independent, so any assignment of members to threads
    // yields bit-identical results.
    std::vector<std::thread> pool;
    std::vector<std::exception_ptr> errors(workers);
    for (std::uint32_t w = 0; w < workers; ++w) {
      pool.emplace_back([&, w] {
        try {
          for (std::uint32_t m = w; m < config.members; m += workers) {
            train_member(members[m], features, metrics, config,
                         derive_seed(seed + m, "pair-sampling"));
          }
        } catch (...) {
          errors[w] = std::current_exception();
        }
      });
    }
    for (auto& t : pool) t.join();
    for (const auto& err : errors) {
      if (err) std::rethrow_exception(err);
    }
  }
  return EnsemblePredictor(std::move(members));
}

EnsemblePredictor EnsemblePredictor::fit_dense(
    const std::vector<std::vector<double>>& features,
    const std::vector<double>& metrics, const EnsembleTrainConfig& config,
    std::uint64_t seed) {
  if (features.empty()) throw DataError("ensemble fit: empty training set");
  const std::uint32_t input_dim = static_cast<std::uint32_t>(features.front().size());
  std::vector<SparseVector> sparse;
  sparse.reserve(features.size());
  for (const auto& row : features) {
    if (row.size() != input_dim) {
      throw ValidationError("ensemble fit: ragged feature rows");
    }
    sparse.push_back(to_sparse(row));
  }
  return fit(sparse, input_dim, metrics, config, seed);
}

EnsemblePredictor EnsemblePredictor::from_members(std::vector<MlpModel> members) {
  if (members.empty()) {
    throw ValidationError("ensemble: need at least one member");
  }
  for (const auto& m : members) {
    if (m.input_dim() != members.front().input_dim() ||
        m.hidden_dim() != members.front().hidden_dim()) {
      throw ValidationError("ensemble: members disagree on layer sizes");
    }
  }
  return EnsemblePredictor(std::move(members));
}

double EnsemblePredictor::predict(const SparseVector& features) const {
  double total = 0.0;
  for (const auto& m : members_) total += m.score_sparse(features);
  return total / static_cast<double>(members_.size());
}

double EnsemblePredictor::predict_dense(std::span<const double> features) const {
  double total = 0.0;
  for (const auto& m : members_) total += m.score(features);
  return total / static_cast<double>(members_.size());
}

}  // namespace cubicml
