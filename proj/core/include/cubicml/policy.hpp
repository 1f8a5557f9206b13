#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "cubicml/rng.hpp"
#include "cubicml/space.hpp"

namespace cubicml {

// Vanilla Adam (both moments bias-corrected, no decoupled extras); the
// policy's update rule calls for it rather than the variant the predictor
// trains with.
class AdamState {
 public:
  explicit AdamState(std::size_t parameter_count);

  void step(std::span<double> params, std::span<const double> grads, double lr,
            double beta1 = 0.9, double beta2 = 0.999, double epsilon = 1e-8);

  std::int64_t step_count() const { return steps_; }

 private:
  std::vector<double> m_;
  std::vector<double> v_;
  std::int64_t steps_ = 0;
};

struct PolicyUpdateConfig {
  double lr = 0.01;
  double baseline_decay = 0.9;
};

// Factorized categorical policy: one independent softmax per dimension,
// logits stored flat (one-hot layout).  Reward baseline is an exponential
// moving average seeded with the first batch's mean.
class PolicyState {
 public:
  explicit PolicyState(const SearchSpace& space);

  ConfigPoint sample(const SearchSpace& space, Rng& rng) const;

  // Softmax of one dimension's logit block.
  std::vector<double> probabilities(std::size_t dim) const;

  // One REINFORCE ascent step on a batch of (config, reward): the gradient
  // of mean advantage-weighted log-probability, fed through Adam.  The
  // baseline is read before the step and moved toward the batch mean after.
  void update(const SearchSpace& space,
              std::span<const std::pair<ConfigPoint, double>> batch,
              const PolicyUpdateConfig& config);

  std::span<double> logits() { return logits_; }
  std::span<const double> logits() const { return logits_; }
  std::optional<double> baseline() const { return baseline_; }
  std::int64_t update_count() const { return optimizer_.step_count(); }

 private:
  OnehotLayout layout_;
  std::vector<double> logits_;
  std::optional<double> baseline_;
  AdamState optimizer_;
};

}  // namespace cubicml
