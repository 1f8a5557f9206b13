#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "cubicml/job.hpp"
#include "cubicml/space.hpp"

namespace cubicml {

// Analytic stand-in for a sharded recommendation-training cluster.  Entirely
// fictional numbers; the point is the qualitative trade-off: less sharding
// costs memory, more sharding costs communication.
struct FsdpSimParams {
  std::string name;
  std::vector<double> layer_params;  // dense parameter count per layer
  double gpu_count = 0.0;
  double memory_bytes_per_gpu = 0.0;
  double bytes_per_param = 4.0;
  double optimizer_state_multiplier = 2.0;
  double allgather_bandwidth = 0.0;      // bytes per second
  double reducescatter_bandwidth = 0.0;  // bytes per second
  double embedding_bytes_per_gpu = 0.0;
  double activation_bytes_per_example = 0.0;
  double runtime_overhead_bytes = 0.0;
  double compute_fixed_s = 0.0;
  double compute_per_example_s = 0.0;
  std::uint32_t step_samples = 2000;
  double noise_amplitude = 0.0;  // relative, must stay under 5%
  std::uint64_t noise_seed = 0;

  static FsdpSimParams from_json(const std::string& text);
  static FsdpSimParams load(const std::filesystem::path& file);
  void validate() const;
};

enum class ShardingStage { no_shard, shard_grad_op, full_shard };

ShardingStage sharding_from_label(const std::string& label);

// Per-GPU bytes one layer occupies under a sharding stage.
double fsdp_layer_memory(double layer_params, ShardingStage stage,
                         const FsdpSimParams& params);

// Seconds of collective traffic one layer adds to a step.
double fsdp_layer_comm_time(double layer_params, ShardingStage stage,
                            const FsdpSimParams& params);

class FsdpExecutor final : public Executor {
 public:
  FsdpExecutor(SearchSpace space, FsdpSimParams params);

  std::string_view name() const override { return params_.name; }
  const SearchSpace& space() const override { return space_; }
  bool deterministic() const override { return params_.noise_amplitude == 0.0; }
  JobRecord execute(const ConfigPoint& config, double timestamp) override;

 private:
  struct Decoded {
    std::vector<ShardingStage> stages;
    std::int64_t batch = 0;
    bool balanced_reservation = false;
    double dense_fraction = 0.0;
  };
  Decoded decode(const ConfigPoint& config) const;

  SearchSpace space_;
  FsdpSimParams params_;
  std::vector<std::size_t> layer_dims_;
  std::size_t batch_dim_ = 0;
  std::size_t reservation_dim_ = 0;
};

}  // namespace cubicml
