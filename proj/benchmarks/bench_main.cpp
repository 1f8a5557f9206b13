#include <benchmark/benchmark.h>

#include "cubicml/space.hpp"

namespace {

const cubicml::SearchSpace& ads_space() {
  static const cubicml::SearchSpace space =
      cubicml::load_space(CUBICML_REPO_DIR "/spaces/ads_fsdp.space");
  return space;
}

void BM_encode_onehot(benchmark::State& state) {
  const auto& space = ads_space();
  const cubicml::ConfigPoint config = space.sample_uniform(1);
  for (auto _ : state) {
    benchmark::DoNotOptimize(cubicml::encode_onehot(space, config));
  }
}
BENCHMARK(BM_encode_onehot);

void BM_sample_uniform(benchmark::State& state) {
  const auto& space = ads_space();
  cubicml::Rng rng(7);
  for (auto _ : state) {
    benchmark::DoNotOptimize(space.sample_uniform(rng));
  }
}
BENCHMARK(BM_sample_uniform);

}  // namespace

BENCHMARK_MAIN();
