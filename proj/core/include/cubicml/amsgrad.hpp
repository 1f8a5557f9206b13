#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace cubicml {

struct AmsgradConfig {
  double lr = 0.001;
  double weight_decay = 0.005;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

// AMSGrad: Adam with a running elementwise maximum of the second moment, so
// the effective step size never grows back.  Weight decay is coupled L2,
// added to the gradient before the moment updates.
class AmsgradState {
 public:
  explicit AmsgradState(std::size_t parameter_count);

  // params -= lr * m_hat / (sqrt(v_hat) + eps); only the first moment is
  // bias-corrected.  Throws NumericError on a non-finite gradient.
  void step(std::span<double> params, std::span<const double> grads,
            const AmsgradConfig& config);

  std::span<const double> v_hat() const { return v_hat_; }
  std::int64_t step_count() const { return steps_; }

 private:
  std::vector<double> m_;
  std::vector<double> v_;
  std::vector<double> v_hat_;
  std::int64_t steps_ = 0;
};

}  // namespace cubicml
