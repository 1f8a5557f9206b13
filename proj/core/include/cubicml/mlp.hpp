#pragma once

#include <cstdint>
#include <span>
#include <utility>
#include <vector>

namespace cubicml {

// (index, value) pairs for the nonzero entries of a feature vector.  One-hot
// encodings are almost all zeros, so training and scoring walk these instead
// of the dense array.
using SparseVector = std::vector<std::pair<std::uint32_t, double>>;

SparseVector to_sparse(std::span<const double> dense);

// max(0, -label * (score_a - score_b) + margin); label is +1 when a's true
// metric beats b's.  The subgradient at the hinge point is taken as 0.
double ranking_loss(double score_a, double score_b, int label, double margin);

// One-hidden-layer rectifier scorer.  Parameters live in one flat vector,
// [w1 | b1 | w2 | b2] with w1 input-major (w1[i*H + h]), so an optimizer can
// treat the model as a single parameter array.
class MlpModel {
 public:
  MlpModel(std::uint32_t input_dim, std::uint32_t hidden_dim, std::uint64_t seed);

  std::uint32_t input_dim() const { return input_dim_; }
  std::uint32_t hidden_dim() const { return hidden_dim_; }
  std::size_t parameter_count() const { return params_.size(); }
  std::span<double> parameters() { return params_; }
  std::span<const double> parameters() const { return params_; }

  double score(std::span<const double> features) const;
  double score_sparse(const SparseVector& features) const;

 private:
  std::uint32_t input_dim_ = 0;
  std::uint32_t hidden_dim_ = 0;
  std::vector<double> params_;
};

// Scratch buffers plus the forward/backward pass for ranking pairs.  One
// instance per training thread; reusing it keeps the inner loop free of
// allocations.
class MlpPairTrainer {
 public:
  explicit MlpPairTrainer(const MlpModel& model);

  // Accumulates d(ranking_loss)/d(params) into grads and returns the loss.
  // With dropout_scale > 1 a fresh keep/drop mask is drawn per example from
  // rng (inverted dropout: kept units scale by dropout_scale = 1/(1-p)).
  double accumulate(const MlpModel& model, const SparseVector& a, const SparseVector& b,
                    int label, double margin, std::span<double> grads, class Rng* rng,
                    double dropout_scale);

 private:
  double forward(const MlpModel& model, const SparseVector& x, std::vector<double>& z,
                 std::vector<double>& h, const std::vector<std::uint8_t>* mask,
                 double dropout_scale) const;
  void backward(const MlpModel& model, const SparseVector& x, const std::vector<double>& z,
                const std::vector<double>& h, const std::vector<std::uint8_t>* mask,
                double dropout_scale, double upstream, std::span<double> grads) const;

  std::vector<double> za_, ha_, zb_, hb_;
  std::vector<std::uint8_t> mask_a_, mask_b_;
};

// Analytic gradients vs central finite differences (h = 1e-5) of the ranking
// loss on one pair, dropout off.  Returns the maximum relative error.  Pairs
// sitting numerically on the hinge kink are nudged off it by enlarging the
// margin before differencing.
double gradient_check(const MlpModel& model, std::span<const double> features_a,
                      std::span<const double> features_b, int label, double margin);

}  // namespace cubicml
