#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>

#include "cubicml/job.hpp"
#include "cubicml/space.hpp"

namespace cubicml {

// Fictional words-per-second model for large-model training jobs.  Base
// throughput scales linearly with the accelerator count; parallelism choices
// multiply in efficiency penalties; a slow drift against the timestamp stands
// in for the systems/model churn that makes old jobs stale.
struct LlmSimParams {
  std::string name;
  double vocab_size = 0.0;
  double base_mfu = 0.0;
  std::map<std::string, double> peak_flops;      // by hardware label
  std::map<std::string, double> fp8_multiplier;  // by hardware label, > 1
  double fp8_drift = 0.0;           // added to the multiplier at full horizon
  double tp_overhead = 0.0;
  double tp_overhead_drift = 0.0;   // change at full horizon (usually < 0)
  double cp_overhead = 0.0;
  double dp_overhead = 0.0;
  double head_dim_target = 128.0;
  double head_dim_penalty = 0.0;
  // Saturation cost per log2 GPU step past the knee, by hardware label.
  std::map<std::string, double> fabric_overhead;
  double fabric_knee_log2 = 64.0;   // fabric scales freely up to here
  double global_drift = 0.0;        // throughput growth at full horizon
  double time_horizon = 1.0;        // timestamps map to [0,1] over this span
  double memory_budget_bytes = 0.0;
  double weight_bytes = 4.0;        // per parameter, divided by tp*pp
  double optimizer_bytes = 12.0;    // per parameter, divided by tp*pp*dp
  double activation_bytes_per_token = 34.0;
  double noise_amplitude = 0.0;
  std::uint64_t noise_seed = 0;

  static LlmSimParams from_json(const std::string& text);
  static LlmSimParams load(const std::filesystem::path& file);
  void validate() const;
};

class LlmExecutor final : public Executor {
 public:
  LlmExecutor(SearchSpace space, LlmSimParams params);

  std::string_view name() const override { return params_.name; }
  const SearchSpace& space() const override { return space_; }
  bool deterministic() const override { return params_.noise_amplitude == 0.0; }
  JobRecord execute(const ConfigPoint& config, double timestamp) override;

  // Biased toward runnable configs: the parallelism split is drawn from the
  // compositions that actually multiply out to the GPU count.
  ConfigPoint sample_config(Rng& rng) override;

 private:
  struct Decoded {
    double layers = 0.0, model_dim = 0.0, heads = 0.0, ffn_dim = 0.0;
    double micro_batches = 0.0, seq_len = 0.0;
    double tp = 0.0, pp = 0.0, cp = 0.0, dp = 0.0;
    double gpus = 0.0;
    bool fp8 = false;
    std::string hardware;
  };
  Decoded decode(const ConfigPoint& config) const;

  SearchSpace space_;
  LlmSimParams params_;
  std::map<std::string, std::size_t> dim_;  // name -> dimension index
};

}  // namespace cubicml
