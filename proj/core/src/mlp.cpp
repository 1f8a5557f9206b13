#include "cubicml/mlp.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "cubicml/errors.hpp"
#include "cubicml/rng.hpp"

namespace cubicml {

namespace {

// flat layout offsets: w1 [0, D*H), b1 [D*H, D*H+H), w2 [.., ..+H), b2 last
std::size_t b1_offset(std::uint32_t d, std::uint32_t h) {
  return static_cast<std::size_t>(d) * h;
}
std::size_t w2_offset(std::uint32_t d, std::uint32_t h) {
  return b1_offset(d, h) + h;
}
std::size_t b2_offset(std::uint32_t d, std::uint32_t h) {
  return w2_offset(d, h) + h;
}

}  // namespace

SparseVector to_sparse(std::span<const double> dense) {
  SparseVector sparse;
  for (std::uint32_t i = 0; i < dense.size(); ++i) {
    if (dense[i] != 0.0) sparse.emplace_back(i, dense[i]);
  }
  return sparse;
}

double ranking_loss(double score_a, double score_b, int label, double margin) {
  if (label != 1 && label != -1) {
    throw ValidationError("ranking_loss: label must be +1 or -1, got " + std::to_string(label));
  }
  if (margin < 0.0) {
    throw ValidationError("ranking_loss: margin must be non-negative");
  }
  const double raw = -static_cast<double>(label) * (score_a - score_b) + margin;
  return raw > 0.0 ? raw : 0.0;
}

MlpModel::MlpModel(std::uint32_t input_dim, std::uint32_t hidden_dim, std::uint64_t seed)
    : input_dim_(input_dim), hidden_dim_(hidden_dim) {
  if (input_dim == 0 || hidden_dim == 0) {
    throw ValidationError("MlpModel: input and hidden dims must be positive");
  }
  params_.assign(b2_offset(input_dim, hidden_dim) + 1, 0.0);
  Rng rng(seed);
  const double s1 = 1.0 / std::sqrt(static_cast<double>(input_dim));
  const double s2 = 1.0 / std::sqrt(static_cast<double>(hidden_dim));
  std::size_t k = 0;
  for (; k < b1_offset(input_dim, hidden_dim); ++k) params_[k] = rng.uniform(-s1, s1);
  for (; k < w2_offset(input_dim, hidden_dim); ++k) params_[k] = rng.uniform(-s1, s1);
  for (; k < b2_offset(input_dim, hidden_dim); ++k) params_[k] = rng.uniform(-s2, s2);
  params_[k] = rng.uniform(-s2, s2);
}

double MlpModel::score(std::span<const double> features) const {
  if (features.size() != input_dim_) {
    throw ValidationError("MlpModel::score: feature length " + std::to_string(features.size()) +
                          " does not match input dim " + std::to_string(input_dim_));
  }
  return score_sparse(to_sparse(features));
}

double MlpModel::score_sparse(const SparseVector& features) const {
  const std::uint32_t h = hidden_dim_;
  const double* w1 = params_.data();
  const double* b1 = params_.data() + b1_offset(input_dim_, h);
  const double* w2 = params_.data() + w2_offset(input_dim_, h);
  const double b2 = params_[b2_offset(input_dim_, h)];

  std::vector<double> z(b1, b1 + h);
  for (const auto& [i, v] : features) {
    if (i >= input_dim_) {
      throw ValidationError("MlpModel::score: feature index " + std::to_string(i) +
                            " out of range");
    }
    const double* row = w1 + static_cast<std::size_t>(i) * h;
    for (std::uint32_t j = 0; j < h; ++j) z[j] += v * row[j];
  }
  double out = b2;
  for (std::uint32_t j = 0; j < h; ++j) {
    if (z[j] > 0.0) out += z[j] * w2[j];
  }
  return out;
}

MlpPairTrainer::MlpPairTrainer(const MlpModel& model)
    : za_(model.hidden_dim()),
      ha_(model.hidden_dim()),
      zb_(model.hidden_dim()),
      hb_(model.hidden_dim()),
      mask_a_(model.hidden_dim()),
      mask_b_(model.hidden_dim()) {}

double MlpPairTrainer::forward(const MlpModel& model, const SparseVector& x,
                               std::vector<double>& z, std::vector<double>& h,
                               const std::vector<std::uint8_t>* mask,
                               double dropout_scale) const {
  const std::uint32_t hd = model.hidden_dim();
  const double* p = model.parameters().data();
  const double* b1 = p + b1_offset(model.input_dim(), hd);
  const double* w2 = p + w2_offset(model.input_dim(), hd);
  const double b2 = p[b2_offset(model.input_dim(), hd)];

  std::copy(b1, b1 + hd, z.begin());
  for (const auto& [i, v] : x) {
    const double* row = p + static_cast<std::size_t>(i) * hd;
    for (std::uint32_t j = 0; j < hd; ++j) z[j] += v * row[j];
  }
  double out = b2;
  for (std::uint32_t j = 0; j < hd; ++j) {
    double hj = z[j] > 0.0 ? z[j] : 0.0;
    if (mask) hj = (*mask)[j] ? hj * dropout_scale : 0.0;
    h[j] = hj;
    out += hj * w2[j];
  }
  return out;
}

void MlpPairTrainer::backward(const MlpModel& model, const SparseVector& x,
                              const std::vector<double>& z, const std::vector<double>&,
                              const std::vector<std::uint8_t>* mask, double dropout_scale,
                              double upstream, std::span<double> grads) const {
  const std::uint32_t hd = model.hidden_dim();
  const double* p = model.parameters().data();
  const double* w2 = p + w2_offset(model.input_dim(), hd);
  double* g_w1 = grads.data();
  double* g_b1 = grads.data() + b1_offset(model.input_dim(), hd);
  double* g_w2 = grads.data() + w2_offset(model.input_dim(), hd);
  double& g_b2 = grads[b2_offset(model.input_dim(), hd)];

  g_b2 += upstream;
  // dz reuses the relu/dropout gates that produced h from z
  std::vector<double> dz(hd);
  for (std::uint32_t j = 0; j < hd; ++j) {
    const double hj = z[j] > 0.0 ? z[j] : 0.0;
    double scaled = hj;
    double gate = z[j] > 0.0 ? 1.0 : 0.0;
    if (mask) {
      scaled = (*mask)[j] ? hj * dropout_scale : 0.0;
      gate *= (*mask)[j] ? dropout_scale : 0.0;
    }
    g_w2[j] += upstream * scaled;
    dz[j] = upstream * w2[j] * gate;
    g_b1[j] += dz[j];
  }
  for (const auto& [i, v] : x) {
    double* row = g_w1 + static_cast<std::size_t>(i) * hd;
    for (std::uint32_t j = 0; j < hd; ++j) row[j] += v * dz[j];
  }
}

double MlpPairTrainer::accumulate(const MlpModel& model, const SparseVector& a,
                                  const SparseVector& b, int label, double margin,
                                  std::span<double> grads, Rng* rng, double dropout_scale) {
  if (grads.size() != model.parameter_count()) {
    throw ValidationError("MlpPairTrainer: gradient buffer size mismatch");
  }
  const bool dropout = rng != nullptr && dropout_scale > 1.0;
  if (dropout) {
    const double keep = 1.0 / dropout_scale;
    for (auto& m : mask_a_) m = rng->bernoulli(keep) ? 1 : 0;
    for (auto& m : mask_b_) m = rng->bernoulli(keep) ? 1 : 0;
  }
  const std::vector<std::uint8_t>* ma = dropout ? &mask_a_ : nullptr;
  const std::vector<std::uint8_t>* mb = dropout ? &mask_b_ : nullptr;

  const double sa = forward(model, a, za_, ha_, ma, dropout_scale);
  const double sb = forward(model, b, zb_, hb_, mb, dropout_scale);
  const double loss = ranking_loss(sa, sb, label, margin);
  if (loss > 0.0) {
    const double go = -static_cast<double>(label);
    backward(model, a, za_, ha_, ma, dropout_scale, go, grads);
    backward(model, b, zb_, hb_, mb, dropout_scale, -go, grads);
  }
  return loss;
}

double gradient_check(const MlpModel& model, std::span<const double> features_a,
                      std::span<const double> features_b, int label, double margin) {
  const SparseVector a = to_sparse(features_a);
  const SparseVector b = to_sparse(features_b);

  // nudge off the hinge kink so the two-sided difference sees one regime
  double use_margin = margin;
  {
    const double sa = model.score(features_a);
    const double sb = model.score(features_b);
    if (std::abs(-static_cast<double>(label) * (sa - sb) + use_margin) < 1e-6) {
      use_margin += 1e-3;
    }
  }

  MlpModel probe = model;
  std::vector<double> analytic(model.parameter_count(), 0.0);
  MlpPairTrainer trainer(probe);
  trainer.accumulate(probe, a, b, label, use_margin, analytic, nullptr, 1.0);

  const double h = 1e-5;
  double max_rel = 0.0;
  std::span<double> params = probe.parameters();
  for (std::size_t k = 0; k < params.size(); ++k) {
    const double saved = params[k];
    params[k] = saved + h;
    const double up = ranking_loss(probe.score_sparse(a), probe.score_sparse(b), label,
                                   use_margin);
    params[k] = saved - h;
    const double down = ranking_loss(probe.score_sparse(a), probe.score_sparse(b), label,
                                     use_margin);
    params[k] = saved;
    const double numeric = (up - down) / (2.0 * h);
    const double denom = std::max({1e-3, std::abs(analytic[k]), std::abs(numeric)});
    max_rel = std::max(max_rel, std::abs(analytic[k] - numeric) / denom);
  }
  return max_rel;
}

}  // namespace cubicml
