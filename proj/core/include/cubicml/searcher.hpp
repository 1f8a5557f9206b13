#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "cubicml/policy.hpp"
#include "cubicml/space.hpp"

namespace cubicml {

struct SearcherConfig {
  std::uint32_t trials = 3;
  std::uint32_t samples_per_trial = 2000;
  std::uint32_t batch = 30;
  double lr = 0.01;
  std::uint32_t top_k = 50;
  double baseline_decay = 0.9;
  std::uint32_t threads = 1;
};

struct SearchProposal {
  ConfigPoint config;
  double predicted_score = 0.0;
  std::uint64_t trial_seed = 0;
  std::uint32_t trial_ordinal = 0;
  std::uint32_t sample_index = 0;
};

using ScoreFn = std::function<double(const ConfigPoint&)>;

// One policy-gradient trial: samples batches from the policy, scores every
// sample (reward = raw predicted score), updates after each batch, and
// returns all samples_per_trial proposals in draw order.  Scores are
// memoized per distinct config within the trial.
std::vector<SearchProposal> reinforce_trial(const SearchSpace& space,
                                            const ScoreFn& score,
                                            std::uint64_t trial_seed,
                                            std::uint32_t trial_ordinal,
                                            const SearcherConfig& config);

// Runs config.trials independent trials (seeds derived from search_seed) and
// returns one proposal list per trial.  Trials share nothing but the frozen
// score function, so they may run on separate threads.
std::vector<std::vector<SearchProposal>> run_trials(const SearchSpace& space,
                                                    const ScoreFn& score,
                                                    std::uint64_t search_seed,
                                                    const SearcherConfig& config);

// Merge across trials: deduplicate identical configs keeping the highest
// score, drop configs already in history, sort by score descending (ties by
// trial ordinal then sample index), cut to k.
std::vector<SearchProposal> propose_topk(
    std::span<const std::vector<SearchProposal>> trials,
    std::span<const ConfigPoint> history, std::uint32_t k);

std::vector<ConfigPoint> random_search(const SearchSpace& space,
                                       std::uint32_t budget,
                                       std::uint64_t seed);

}  // namespace cubicml
