#include "cubicml/amsgrad.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "cubicml/errors.hpp"

namespace cubicml {

AmsgradState::AmsgradState(std::size_t parameter_count)
    : m_(parameter_count, 0.0), v_(parameter_count, 0.0), v_hat_(parameter_count, 0.0) {}

void AmsgradState::step(std::span<double> params, std::span<const double> grads,
                        const AmsgradConfig& config) {
  if (params.size() != m_.size() || grads.size() != m_.size()) {
    throw ValidationError("amsgrad step: expected " + std::to_string(m_.size()) +
                          " parameters, got " + std::to_string(params.size()) + "/" +
                          std::to_string(grads.size()));
  }
  if (!(config.lr > 0.0)) {
    throw ValidationError("amsgrad step: learning rate must be positive");
  }
  ++steps_;
  const double correction1 = 1.0 - std::pow(config.beta1, static_cast<double>(steps_));
  for (std::size_t i = 0; i < params.size(); ++i) {
    if (!std::isfinite(grads[i])) {
      throw NumericError("amsgrad step " + std::to_string(steps_) +
                         ": non-finite gradient at parameter " + std::to_string(i) + " (" +
                         std::to_string(grads[i]) + ")");
    }
    const double g = grads[i] + config.weight_decay * params[i];
    m_[i] = config.beta1 * m_[i] + (1.0 - config.beta1) * g;
    v_[i] = config.beta2 * v_[i] + (1.0 - config.beta2) * g * g;
    v_hat_[i] = std::max(v_hat_[i], v_[i]);
    const double m_hat = m_[i] / correction1;
    params[i] -= config.lr * m_hat / (std::sqrt(v_hat_[i]) + config.epsilon);
  }
}

}  // namespace cubicml
