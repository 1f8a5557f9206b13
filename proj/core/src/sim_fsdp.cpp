#include "cubicml/sim_fsdp.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <fstream>
#include <sstream>
#include <utility>

#include "cubicml/errors.hpp"
#include "cubicml/rng.hpp"
#include "cubicml/stats.hpp"
#include "json.hpp"

namespace cubicml {

namespace {

double require_positive(const nlohmann::json& obj, const char* key) {
  if (!obj.contains(key) || !obj[key].is_number()) {
    throw DataError(std::string("fsdp params: missing numeric field '") + key + "'");
  }
  const double value = obj[key].get<double>();
  if (!(value > 0.0)) {
    throw DataError(std::string("fsdp params: '") + key + "' must be positive");
  }
  return value;
}

// All-gather traffic grows with sharding aggressiveness: NO_SHARD pays one
// gather-equivalent (its half of the gradient all-reduce), SHARD_GRAD_OP
// re-gathers updated parameters, FULL_SHARD gathers parameters in both
// passes.  Reduce-scatter volume is one gradient pass for every stage.
constexpr double kAllgatherUnits[] = {1.0, 1.6, 2.4};
constexpr double kReducescatterUnits[] = {1.0, 1.0, 1.0};

}  // namespace

FsdpSimParams FsdpSimParams::from_json(const std::string& text) {
  nlohmann::json obj;
  try {
    obj = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& err) {
    throw DataError(std::string("fsdp params: bad JSON: ") + err.what());
  }
  if (!obj.is_object()) throw DataError("fsdp params: expected a JSON object");

  FsdpSimParams params;
  if (!obj.contains("name") || !obj["name"].is_string()) {
    throw DataError("fsdp params: missing 'name'");
  }
  params.name = obj["name"].get<std::string>();
  if (!obj.contains("layer_params") || !obj["layer_params"].is_array() ||
      obj["layer_params"].empty()) {
    throw DataError("fsdp params: 'layer_params' must be a non-empty array");
  }
  for (const auto& entry : obj["layer_params"]) {
    if (!entry.is_number() || !(entry.get<double>() > 0.0)) {
      throw DataError("fsdp params: layer parameter counts must be positive");
    }
    params.layer_params.push_back(entry.get<double>());
  }
  params.gpu_count = require_positive(obj, "gpu_count");
  params.memory_bytes_per_gpu = require_positive(obj, "memory_bytes_per_gpu");
  params.bytes_per_param = require_positive(obj, "bytes_per_param");
  params.optimizer_state_multiplier =
      require_positive(obj, "optimizer_state_multiplier");
  params.allgather_bandwidth = require_positive(obj, "allgather_bandwidth");
  params.reducescatter_bandwidth = require_positive(obj, "reducescatter_bandwidth");
  params.embedding_bytes_per_gpu = require_positive(obj, "embedding_bytes_per_gpu");
  params.activation_bytes_per_example =
      require_positive(obj, "activation_bytes_per_example");
  params.runtime_overhead_bytes = require_positive(obj, "runtime_overhead_bytes");
  params.compute_fixed_s = require_positive(obj, "compute_fixed_s");
  params.compute_per_example_s = require_positive(obj, "compute_per_example_s");
  params.step_samples = obj.value("step_samples", 2000u);
  if (obj.contains("noise_amplitude")) {
    params.noise_amplitude = obj["noise_amplitude"].get<double>();
  }
  params.noise_seed = obj.value("noise_seed", std::uint64_t{0});
  params.validate();
  return params;
}

FsdpSimParams FsdpSimParams::load(const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) throw IoError("cannot read " + file.string());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return from_json(buffer.str());
}

void FsdpSimParams::validate() const {
  if (layer_params.empty()) throw ValidationError("fsdp params: no layers");
  if (noise_amplitude < 0.0 || noise_amplitude >= 0.05) {
    throw ValidationError("fsdp params: noise amplitude must be in [0, 0.05)");
  }
  if (step_samples == 0) {
    throw ValidationError("fsdp params: step_samples must be positive");
  }
  if (gpu_count < 2.0) {
    throw ValidationError("fsdp params: sharding needs at least 2 GPUs");
  }
}

ShardingStage sharding_from_label(const std::string& label) {
  if (label == "NO_SHARD") return ShardingStage::no_shard;
  if (label == "SHARD_GRAD_OP") return ShardingStage::shard_grad_op;
  if (label == "FULL_SHARD") return ShardingStage::full_shard;
  throw ValidationError("unknown sharding strategy '" + label + "'");
}

double fsdp_layer_memory(double layer_params, ShardingStage stage,
                         const FsdpSimParams& params) {
  const double full =
      layer_params * params.bytes_per_param *
      (2.0 + params.optimizer_state_multiplier);  // params + grads + opt states
  switch (stage) {
    case ShardingStage::no_shard:
      return full;
    case ShardingStage::shard_grad_op:
      // Parameters stay resident; gradients and optimizer states shard.
      return layer_params * params.bytes_per_param *
             (1.0 + (1.0 + params.optimizer_state_multiplier) / params.gpu_count);
    case ShardingStage::full_shard:
      return full / params.gpu_count;
  }
  throw ValidationError("unknown sharding stage");
}

double fsdp_layer_comm_time(double layer_params, ShardingStage stage,
                            const FsdpSimParams& params) {
  const double bytes = layer_params * params.bytes_per_param;
  const auto s = static_cast<std::size_t>(stage);
  return bytes * (kAllgatherUnits[s] / params.allgather_bandwidth +
                  kReducescatterUnits[s] / params.reducescatter_bandwidth);
}

FsdpExecutor::FsdpExecutor(SearchSpace space, FsdpSimParams params)
    : space_(std::move(space)), params_(std::move(params)) {
  params_.validate();
  for (std::size_t d = 0; d < space_.dimension_count(); ++d) {
    const auto& dim = space_.dimension(d);
    if (dim.name().starts_with("layer_") && dim.name().ends_with("_sharding")) {
      if (dim.kind() != DimensionKind::categorical) {
        throw ValidationError("fsdp executor: sharding dimensions must be categorical");
      }
      for (const auto& label : dim.labels()) sharding_from_label(label);
      layer_dims_.push_back(d);
    } else if (dim.name() == "local_batch_size") {
      batch_dim_ = d;
    } else if (dim.name() == "storage_reservation") {
      reservation_dim_ = d;
    } else {
      throw ValidationError("fsdp executor: unexpected dimension '" +
                            dim.name() + "'");
    }
  }
  if (layer_dims_.size() != params_.layer_params.size()) {
    throw ValidationError("fsdp executor: space has " +
                          std::to_string(layer_dims_.size()) +
                          " sharding dimensions but params describe " +
                          std::to_string(params_.layer_params.size()) + " layers");
  }
  if (space_.dimension(batch_dim_).kind() != DimensionKind::stepped_integer) {
    throw ValidationError("fsdp executor: local_batch_size must be a stepped integer");
  }
  // Surface bad reservation labels at construction, not execution.
  for (const auto& label : space_.dimension(reservation_dim_).labels()) {
    if (label == "memory_balanced") continue;
    if (label.starts_with("fixed_")) {
      const Decimal fraction = Decimal::parse(label.substr(6));
      const double f = fraction.to_double();
      if (f <= 0.0 || f >= 1.0) {
        throw ValidationError("fsdp executor: reservation fraction out of (0,1)");
      }
      continue;
    }
    throw ValidationError("fsdp executor: unknown reservation label '" + label + "'");
  }
}

FsdpExecutor::Decoded FsdpExecutor::decode(const ConfigPoint& config) const {
  space_.check_config(config);
  Decoded decoded;
  decoded.stages.reserve(layer_dims_.size());
  for (std::size_t d : layer_dims_) {
    decoded.stages.push_back(
        sharding_from_label(space_.dimension(d).label_at(config.indices[d])));
  }
  decoded.batch = space_.dimension(batch_dim_).int_at(config.indices[batch_dim_]);
  const std::string& label =
      space_.dimension(reservation_dim_).label_at(config.indices[reservation_dim_]);
  if (label == "memory_balanced") {
    decoded.balanced_reservation = true;
  } else {
    decoded.dense_fraction = Decimal::parse(label.substr(6)).to_double();
  }
  return decoded;
}

JobRecord FsdpExecutor::execute(const ConfigPoint& config, double timestamp) {
  const Decoded decoded = decode(config);

  JobRecord record;
  record.config = config;
  record.timestamp = timestamp;
  record.scale = static_cast<std::int64_t>(params_.gpu_count);

  double dense_demand = params_.runtime_overhead_bytes +
                        params_.activation_bytes_per_example *
                            static_cast<double>(decoded.batch);
  for (std::size_t i = 0; i < decoded.stages.size(); ++i) {
    dense_demand +=
        fsdp_layer_memory(params_.layer_params[i], decoded.stages[i], params_);
  }

  bool fits = false;
  if (decoded.balanced_reservation) {
    fits = dense_demand + params_.embedding_bytes_per_gpu <=
           params_.memory_bytes_per_gpu;
  } else {
    const double dense_budget =
        decoded.dense_fraction * params_.memory_bytes_per_gpu;
    const double embedding_budget =
        params_.memory_bytes_per_gpu - dense_budget;
    fits = dense_demand <= dense_budget &&
           params_.embedding_bytes_per_gpu <= embedding_budget;
  }
  if (!fits) {
    record.status = JobStatus::failed_oom;
    return record;
  }

  double step_time = params_.compute_fixed_s +
                     params_.compute_per_example_s *
                         static_cast<double>(decoded.batch);
  for (std::size_t i = 0; i < decoded.stages.size(); ++i) {
    step_time +=
        fsdp_layer_comm_time(params_.layer_params[i], decoded.stages[i], params_);
  }

  const double examples_per_step =
      static_cast<double>(decoded.batch) * params_.gpu_count;
  record.status = JobStatus::completed;
  if (params_.noise_amplitude == 0.0) {
    record.metric = examples_per_step / step_time;
    return record;
  }

  // Per-step noise stream keyed by the config alone, so re-running a config
  // reproduces the same reading no matter when or in what order.
  Rng rng(derive_seed(params_.noise_seed, "fsdp-steps", config_hash(config)));
  std::vector<double> samples;
  samples.reserve(params_.step_samples);
  for (std::uint32_t s = 0; s < params_.step_samples; ++s) {
    const double wobble = 1.0 + params_.noise_amplitude * rng.uniform(-1.0, 1.0);
    samples.push_back(examples_per_step / (step_time * wobble));
  }
  record.metric = percentile_nearest_rank(samples, 90.0);
  return record;
}

}  // namespace cubicml
