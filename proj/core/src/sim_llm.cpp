#include "cubicml/sim_llm.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <fstream>
#include <sstream>
#include <utility>

#include "cubicml/errors.hpp"
#include "cubicml/rng.hpp"
#include "json.hpp"

namespace cubicml {

namespace {

double require_number(const nlohmann::json& obj, const char* key) {
  if (!obj.contains(key) || !obj[key].is_number()) {
    throw DataError(std::string("llm params: missing numeric field '") + key + "'");
  }
  return obj[key].get<double>();
}

std::map<std::string, double> require_map(const nlohmann::json& obj,
                                          const char* key) {
  if (!obj.contains(key) || !obj[key].is_object() || obj[key].empty()) {
    throw DataError(std::string("llm params: '") + key +
                    "' must be a non-empty object");
  }
  std::map<std::string, double> out;
  for (const auto& [label, value] : obj[key].items()) {
    if (!value.is_number()) {
      throw DataError(std::string("llm params: '") + key + "' values must be numbers");
    }
    out[label] = value.get<double>();
  }
  return out;
}

}  // namespace

LlmSimParams LlmSimParams::from_json(const std::string& text) {
  nlohmann::json obj;
  try {
    obj = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& err) {
    throw DataError(std::string("llm params: bad JSON: ") + err.what());
  }
  if (!obj.is_object()) throw DataError("llm params: expected a JSON object");

  LlmSimParams params;
  if (!obj.contains("name") || !obj["name"].is_string()) {
    throw DataError("llm params: missing 'name'");
  }
  params.name = obj["name"].get<std::string>();
  params.vocab_size = require_number(obj, "vocab_size");
  params.base_mfu = require_number(obj, "base_mfu");
  params.peak_flops = require_map(obj, "peak_flops");
  params.fp8_multiplier = require_map(obj, "fp8_multiplier");
  params.fp8_drift = obj.value("fp8_drift", 0.0);
  params.tp_overhead = require_number(obj, "tp_overhead");
  params.tp_overhead_drift = obj.value("tp_overhead_drift", 0.0);
  params.cp_overhead = require_number(obj, "cp_overhead");
  params.dp_overhead = require_number(obj, "dp_overhead");
  params.head_dim_target = obj.value("head_dim_target", 128.0);
  params.head_dim_penalty = obj.value("head_dim_penalty", 0.0);
  if (obj.contains("fabric_overhead")) {
    if (obj["fabric_overhead"].is_number()) {
      for (const auto& [label, unused] : params.peak_flops) {
        params.fabric_overhead[label] = obj["fabric_overhead"].get<double>();
      }
    } else {
      params.fabric_overhead = require_map(obj, "fabric_overhead");
    }
  }
  params.fabric_knee_log2 = obj.value("fabric_knee_log2", 64.0);
  params.global_drift = obj.value("global_drift", 0.0);
  params.time_horizon = require_number(obj, "time_horizon");
  params.memory_budget_bytes = require_number(obj, "memory_budget_bytes");
  params.weight_bytes = require_number(obj, "weight_bytes");
  params.optimizer_bytes = require_number(obj, "optimizer_bytes");
  params.activation_bytes_per_token = require_number(obj, "activation_bytes_per_token");
  if (obj.contains("noise_amplitude")) {
    params.noise_amplitude = obj["noise_amplitude"].get<double>();
  }
  params.noise_seed = obj.value("noise_seed", std::uint64_t{0});
  params.validate();
  return params;
}

LlmSimParams LlmSimParams::load(const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) throw IoError("cannot read " + file.string());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return from_json(buffer.str());
}

void LlmSimParams::validate() const {
  if (!(vocab_size > 0.0) || !(base_mfu > 0.0) || !(time_horizon > 0.0) ||
      !(memory_budget_bytes > 0.0)) {
    throw ValidationError("llm params: core constants must be positive");
  }
  for (const auto& [label, flops] : peak_flops) {
    if (!(flops > 0.0)) {
      throw ValidationError("llm params: peak flops must be positive for " + label);
    }
  }
  for (const auto& [label, mult] : fp8_multiplier) {
    if (!(mult > 1.0)) {
      throw ValidationError("llm params: fp8 multiplier must exceed 1 for " + label);
    }
  }
  if (tp_overhead < 0.0 || cp_overhead < 0.0 || dp_overhead < 0.0) {
    throw ValidationError("llm params: overheads must be non-negative");
  }
  for (const auto& [label, overhead] : fabric_overhead) {
    if (overhead < 0.0) {
      throw ValidationError("llm params: fabric overhead must be non-negative for " +
                            label);
    }
  }
  if (tp_overhead + tp_overhead_drift < 0.0) {
    throw ValidationError("llm params: tp overhead goes negative over the horizon");
  }
  if (noise_amplitude < 0.0 || noise_amplitude >= 0.05) {
    throw ValidationError("llm params: noise amplitude must be in [0, 0.05)");
  }
}

LlmExecutor::LlmExecutor(SearchSpace space, LlmSimParams params)
    : space_(std::move(space)), params_(std::move(params)) {
  params_.validate();
  const char* required[] = {
      "num_layers",         "model_dim",
      "num_heads",          "ffn_dim",
      "micro_batches",      "seq_len_log2",
      "tensor_parallel_log2", "pipeline_parallel_log2",
      "context_parallel_log2", "data_parallel_log2",
      "precision",          "gpu_count_log2",
      "hardware"};
  for (const char* name : required) {
    dim_[name] = space_.dimension_index(name);
  }
  for (const auto& label : space_.dimension(dim_["hardware"]).labels()) {
    if (params_.peak_flops.count(label) == 0 ||
        params_.fp8_multiplier.count(label) == 0) {
      throw ValidationError("llm executor: params lack constants for hardware '" +
                            label + "'");
    }
  }
  for (const auto& label : space_.dimension(dim_["precision"]).labels()) {
    if (label != "BF16" && label != "FP8") {
      throw ValidationError("llm executor: unknown precision label '" + label + "'");
    }
  }
}

LlmExecutor::Decoded LlmExecutor::decode(const ConfigPoint& config) const {
  space_.check_config(config);
  const auto value = [&](const char* name) {
    const std::size_t d = dim_.at(name);
    return static_cast<double>(space_.dimension(d).int_at(config.indices[d]));
  };
  Decoded decoded;
  decoded.layers = value("num_layers");
  decoded.model_dim = value("model_dim");
  decoded.heads = value("num_heads");
  decoded.ffn_dim = value("ffn_dim");
  decoded.micro_batches = value("micro_batches");
  decoded.seq_len = std::exp2(value("seq_len_log2"));
  decoded.tp = std::exp2(value("tensor_parallel_log2"));
  decoded.pp = std::exp2(value("pipeline_parallel_log2"));
  decoded.cp = std::exp2(value("context_parallel_log2"));
  decoded.dp = std::exp2(value("data_parallel_log2"));
  decoded.gpus = std::exp2(value("gpu_count_log2"));
  const std::size_t precision = dim_.at("precision");
  decoded.fp8 =
      space_.dimension(precision).label_at(config.indices[precision]) == "FP8";
  const std::size_t hardware = dim_.at("hardware");
  decoded.hardware =
      space_.dimension(hardware).label_at(config.indices[hardware]);
  return decoded;
}

JobRecord LlmExecutor::execute(const ConfigPoint& config, double timestamp) {
  const Decoded d = decode(config);

  JobRecord record;
  record.config = config;
  record.timestamp = timestamp;
  record.scale = static_cast<std::int64_t>(d.gpus);

  if (d.tp * d.pp * d.cp * d.dp != d.gpus) {
    record.status = JobStatus::failed_infra;
    return record;
  }

  const double params_total =
      d.layers * (4.0 * d.model_dim * d.model_dim +
                  3.0 * d.model_dim * d.ffn_dim) +
      params_.vocab_size * d.model_dim;

  const double weight_mem = params_total * params_.weight_bytes / (d.tp * d.pp);
  const double optimizer_mem =
      params_total * params_.optimizer_bytes / (d.tp * d.pp * d.dp);
  const double activation_mem = params_.activation_bytes_per_token * d.seq_len *
                                d.model_dim * d.micro_batches *
                                (d.layers / d.pp) / (d.tp * d.cp);
  if (weight_mem + optimizer_mem + activation_mem > params_.memory_budget_bytes) {
    record.status = JobStatus::failed_oom;
    return record;
  }

  const double tau =
      std::clamp(timestamp / params_.time_horizon, 0.0, 1.0);
  const double flops_per_token =
      6.0 * params_total + 12.0 * d.layers * d.model_dim * d.seq_len;

  const double pipeline_eff =
      d.micro_batches / (d.micro_batches + d.pp - 1.0);
  const double tp_overhead = params_.tp_overhead + params_.tp_overhead_drift * tau;
  const double tensor_eff = 1.0 / (1.0 + tp_overhead * (d.tp - 1.0));
  const double context_eff = 1.0 / (1.0 + params_.cp_overhead * (d.cp - 1.0));
  const double data_eff = 1.0 / (1.0 + params_.dp_overhead * std::log2(d.dp == 0.0 ? 1.0 : d.dp));
  const double head_dim = d.model_dim / d.heads;
  const double head_eff =
      1.0 / (1.0 + params_.head_dim_penalty *
                       std::abs(head_dim - params_.head_dim_target));
  // Fabrics saturate past the knee, each generation differently; pipeline
  // stages localize their traffic, so the hit shrinks with pipeline degree.
  const auto fabric_it = params_.fabric_overhead.find(d.hardware);
  const double fabric_ovh =
      fabric_it == params_.fabric_overhead.end() ? 0.0 : fabric_it->second;
  const double fabric_eff =
      1.0 / (1.0 + fabric_ovh *
                       std::max(0.0, std::log2(d.gpus) - params_.fabric_knee_log2) /
                       d.pp);
  const double efficiency =
      pipeline_eff * tensor_eff * context_eff * data_eff * head_eff * fabric_eff;

  const double precision_mult =
      d.fp8 ? params_.fp8_multiplier.at(d.hardware) + params_.fp8_drift * tau
            : 1.0;

  double wps = d.gpus * params_.peak_flops.at(d.hardware) * params_.base_mfu *
               precision_mult * efficiency * (1.0 + params_.global_drift * tau) /
               flops_per_token;

  if (params_.noise_amplitude > 0.0) {
    const std::uint64_t stamp = std::bit_cast<std::uint64_t>(timestamp);
    Rng rng(derive_seed(params_.noise_seed ^ stamp, "llm-noise",
                        config_hash(config)));
    wps *= 1.0 + params_.noise_amplitude * rng.uniform(-1.0, 1.0);
  }

  record.status = JobStatus::completed;
  record.metric = wps;
  return record;
}

ConfigPoint LlmExecutor::sample_config(Rng& rng) {
  ConfigPoint point = space_.sample_uniform(rng);

  const auto& gpu_dim = space_.dimension(dim_.at("gpu_count_log2"));
  const std::int64_t gpu_log2 = gpu_dim.int_at(point.indices[dim_.at("gpu_count_log2")]);

  // Enumerate the viable (tp, pp, cp) splits for this GPU count and give the
  // remainder to data parallelism.
  struct Split {
    std::int64_t tp, pp, cp, dp;
  };
  std::vector<Split> splits;
  const auto range = [&](const char* name) {
    const auto& dim = space_.dimension(dim_.at(name));
    return std::pair(dim.int_at(0), dim.int_at(dim.value_count() - 1));
  };
  const auto [tp_lo, tp_hi] = range("tensor_parallel_log2");
  const auto [pp_lo, pp_hi] = range("pipeline_parallel_log2");
  const auto [cp_lo, cp_hi] = range("context_parallel_log2");
  const auto [dp_lo, dp_hi] = range("data_parallel_log2");
  for (std::int64_t tp = tp_lo; tp <= tp_hi; ++tp) {
    for (std::int64_t pp = pp_lo; pp <= pp_hi; ++pp) {
      for (std::int64_t cp = cp_lo; cp <= cp_hi; ++cp) {
        const std::int64_t dp = gpu_log2 - tp - pp - cp;
        if (dp >= dp_lo && dp <= dp_hi) splits.push_back({tp, pp, cp, dp});
      }
    }
  }
  if (splits.empty()) return point;  // nothing runnable at this scale; let it fail

  const Split& pick = splits[rng.below(splits.size())];
  const auto set_log2 = [&](const char* name, std::int64_t log2_value) {
    const std::size_t d = dim_.at(name);
    const auto& dim = space_.dimension(d);
    for (std::uint32_t i = 0; i < dim.value_count(); ++i) {
      if (dim.int_at(i) == log2_value) {
        point.indices[d] = i;
        return;
      }
    }
    throw ValidationError("llm executor: no index for log2 value");
  };
  set_log2("tensor_parallel_log2", pick.tp);
  set_log2("pipeline_parallel_log2", pick.pp);
  set_log2("context_parallel_log2", pick.cp);
  set_log2("data_parallel_log2", pick.dp);
  return point;
}

}  // namespace cubicml
