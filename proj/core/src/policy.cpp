#include "cubicml/policy.hpp"

#include <algorithm>
#include <cmath>

#include "cubicml/errors.hpp"

namespace cubicml {

AdamState::AdamState(std::size_t parameter_count)
    : m_(parameter_count, 0.0), v_(parameter_count, 0.0) {}

void AdamState::step(std::span<double> params, std::span<const double> grads,
                     double lr, double beta1, double beta2, double epsilon) {
  if (params.size() != m_.size() || grads.size() != m_.size()) {
    throw ValidationError("adam step: parameter count mismatch");
  }
  if (!(lr > 0.0)) throw ValidationError("adam step: lr must be positive");
  ++steps_;
  const double correction1 = 1.0 - std::pow(beta1, static_cast<double>(steps_));
  const double correction2 = 1.0 - std::pow(beta2, static_cast<double>(steps_));
  for (std::size_t i = 0; i < params.size(); ++i) {
    const double g = grads[i];
    if (!std::isfinite(g)) {
      throw NumericError("adam step " + std::to_string(steps_) +
                         ": non-finite gradient at parameter " + std::to_string(i));
    }
    m_[i] = beta1 * m_[i] + (1.0 - beta1) * g;
    v_[i] = beta2 * v_[i] + (1.0 - beta2) * g * g;
    const double m_hat = m_[i] / correction1;
    const double v_hat = v_[i] / correction2;
    params[i] -= lr * m_hat / (std::sqrt(v_hat) + epsilon);
  }
}

namespace {

void softmax_block(std::span<const double> logits, std::span<double> probs) {
  double peak = logits[0];
  for (double l : logits) peak = std::max(peak, l);
  double total = 0.0;
  for (std::size_t i = 0; i < logits.size(); ++i) {
    probs[i] = std::exp(logits[i] - peak);
    total += probs[i];
  }
  for (auto& p : probs) p /= total;
}

}  // namespace

PolicyState::PolicyState(const SearchSpace& space)
    : layout_(onehot_layout(space)),
      logits_(layout_.length, 0.0),
      optimizer_(layout_.length) {}

ConfigPoint PolicyState::sample(const SearchSpace& space, Rng& rng) const {
  if (onehot_layout(space).length != layout_.length) {
    throw ValidationError("policy sample: space does not match policy layout");
  }
  ConfigPoint point;
  point.space_name = space.name();
  point.space_version = space.version();
  point.indices.resize(space.dimension_count());
  std::vector<double> probs;
  for (std::size_t d = 0; d < space.dimension_count(); ++d) {
    const std::uint32_t offset = layout_.offsets[d];
    const std::uint32_t count = space.dimension(d).value_count();
    probs.resize(count);
    softmax_block(std::span(logits_).subspan(offset, count), probs);
    point.indices[d] = static_cast<std::uint32_t>(rng.categorical(probs));
  }
  return point;
}

std::vector<double> PolicyState::probabilities(std::size_t dim) const {
  if (dim + 1 > layout_.offsets.size()) {
    throw ValidationError("policy probabilities: dimension out of range");
  }
  const std::uint32_t offset = layout_.offsets[dim];
  const std::uint32_t end = dim + 1 < layout_.offsets.size()
                                ? layout_.offsets[dim + 1]
                                : layout_.length;
  std::vector<double> probs(end - offset);
  softmax_block(std::span(logits_).subspan(offset, end - offset), probs);
  return probs;
}

void PolicyState::update(const SearchSpace& space,
                         std::span<const std::pair<ConfigPoint, double>> batch,
                         const PolicyUpdateConfig& config) {
  if (batch.empty()) throw ValidationError("policy update: empty batch");
  if (config.baseline_decay < 0.0 || config.baseline_decay >= 1.0) {
    throw ValidationError("policy update: baseline decay must be in [0, 1)");
  }

  double batch_mean = 0.0;
  for (const auto& [point, reward] : batch) {
    if (!std::isfinite(reward)) {
      throw NumericError("policy update: non-finite reward");
    }
    space.check_config(point);
    batch_mean += reward;
  }
  batch_mean /= static_cast<double>(batch.size());
  if (!baseline_.has_value()) baseline_ = batch_mean;

  // Descent on the negated REINFORCE objective: the loss gradient per sample
  // is advantage * (softmax - onehot) for every dimension block.
  std::vector<double> grads(layout_.length, 0.0);
  std::vector<double> probs;
  const double inv = 1.0 / static_cast<double>(batch.size());
  for (const auto& [point, reward] : batch) {
    const double advantage = reward - *baseline_;
    if (advantage == 0.0) continue;
    for (std::size_t d = 0; d < space.dimension_count(); ++d) {
      const std::uint32_t offset = layout_.offsets[d];
      const std::uint32_t count = space.dimension(d).value_count();
      probs.resize(count);
      softmax_block(std::span(logits_).subspan(offset, count), probs);
      for (std::uint32_t v = 0; v < count; ++v) {
        grads[offset + v] += inv * advantage * probs[v];
      }
      grads[offset + point.indices[d]] -= inv * advantage;
    }
  }
  optimizer_.step(logits_, grads, config.lr);

  baseline_ = config.baseline_decay * *baseline_ +
              (1.0 - config.baseline_decay) * batch_mean;
}

}  // namespace cubicml
