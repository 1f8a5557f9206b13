#include "cubicml/searcher.hpp"

#include <algorithm>
#include <exception>
#include <map>
#include <set>
#include <thread>

#include "cubicml/errors.hpp"
#include "cubicml/rng.hpp"

namespace cubicml {

std::vector<SearchProposal> reinforce_trial(const SearchSpace& space,
                                            const ScoreFn& score,
                                            std::uint64_t trial_seed,
                                            std::uint32_t trial_ordinal,
                                            const SearcherConfig& config) {
  if (config.samples_per_trial == 0) {
    throw ValidationError("reinforce trial: samples_per_trial must be positive");
  }
  if (config.batch == 0) {
    throw ValidationError("reinforce trial: batch must be positive");
  }
  if (!score) throw ValidationError("reinforce trial: missing score function");

  Rng rng(trial_seed);
  PolicyState policy(space);
  PolicyUpdateConfig update;
  update.lr = config.lr;
  update.baseline_decay = config.baseline_decay;

  std::map<std::vector<std::uint32_t>, double> memo;
  std::vector<SearchProposal> proposals;
  proposals.reserve(config.samples_per_trial);
  std::vector<std::pair<ConfigPoint, double>> batch;

  std::uint32_t drawn = 0;
  while (drawn < config.samples_per_trial) {
    const std::uint32_t take =
        std::min(config.batch, config.samples_per_trial - drawn);
    batch.clear();
    for (std::uint32_t b = 0; b < take; ++b) {
      ConfigPoint point = policy.sample(space, rng);
      auto found = memo.find(point.indices);
      if (found == memo.end()) {
        found = memo.emplace(point.indices, score(point)).first;
      }
      const double predicted = found->second;
      proposals.push_back(SearchProposal{point, predicted, trial_seed,
                                         trial_ordinal, drawn + b});
      batch.emplace_back(std::move(point), predicted);
    }
    policy.update(space, batch, update);
    drawn += take;
  }
  return proposals;
}

std::vector<std::vector<SearchProposal>> run_trials(
    const SearchSpace& space, const ScoreFn& score, std::uint64_t search_seed,
    const SearcherConfig& config) {
  if (config.trials == 0) {
    throw ValidationError("run trials: trials must be positive");
  }
  std::vector<std::vector<SearchProposal>> all(config.trials);
  std::vector<std::uint64_t> seeds(config.trials);
  for (std::uint32_t t = 0; t < config.trials; ++t) {
    seeds[t] = derive_seed(search_seed, "rl-trial", t);
  }

  const std::uint32_t workers =
      std::max<std::uint32_t>(1, std::min(config.threads, config.trials));
  if (workers == 1) {
    for (std::uint32_t t = 0; t < config.trials; ++t) {
      all[t] = reinforce_trial(space, score, seeds[t], t, config);
    }
  } else {
    std::vector<std::thread> pool;
    std::vector<std::exception_ptr> errors(workers);
    for (std::uint32_t w = 0; w < workers; ++w) {
      pool.emplace_back([&, w] {
        try {
          for (std::uint32_t t = w; t < config.trials; t += workers) {
            all[t] = reinforce_trial(space, score, seeds[t], t, config);
          }
        } catch (...) {
          errors[w] = std::current_exception();
        }
      });
    }
    for (auto& t : pool) t.join();
    for (const auto& err : errors) {
      if (err) std::rethrow_exception(err);
    }
  }
  return all;
}

std::vector<SearchProposal> propose_topk(
    std::span<const std::vector<SearchProposal>> trials,
    std::span<const ConfigPoint> history, std::uint32_t k) {
  if (k == 0) throw ValidationError("propose topk: k must be positive");

  std::set<std::vector<std::uint32_t>> seen;
  for (const auto& point : history) seen.insert(point.indices);

  // Deduplicate keeping the best score; on equal scores keep the proposal
  // that sorts first (earlier trial, then earlier sample).
  std::map<std::vector<std::uint32_t>, SearchProposal> unique;
  for (const auto& trial : trials) {
    for (const auto& proposal : trial) {
      if (seen.count(proposal.config.indices) > 0) continue;
      auto [it, inserted] = unique.emplace(proposal.config.indices, proposal);
      if (inserted) continue;
      SearchProposal& kept = it->second;
      const bool better =
          proposal.predicted_score > kept.predicted_score ||
          (proposal.predicted_score == kept.predicted_score &&
           std::pair(proposal.trial_ordinal, proposal.sample_index) <
               std::pair(kept.trial_ordinal, kept.sample_index));
      if (better) kept = proposal;
    }
  }

  std::vector<SearchProposal> merged;
  merged.reserve(unique.size());
  for (auto& [indices, proposal] : unique) merged.push_back(std::move(proposal));
  std::sort(merged.begin(), merged.end(),
            [](const SearchProposal& a, const SearchProposal& b) {
              if (a.predicted_score != b.predicted_score) {
                return a.predicted_score > b.predicted_score;
              }
              return std::pair(a.trial_ordinal, a.sample_index) <
                     std::pair(b.trial_ordinal, b.sample_index);
            });
  if (merged.size() > k) merged.resize(k);
  return merged;
}

std::vector<ConfigPoint> random_search(const SearchSpace& space,
                                       std::uint32_t budget,
                                       std::uint64_t seed) {
  if (budget == 0) throw ValidationError("random search: budget must be positive");
  Rng rng(seed);
  std::vector<ConfigPoint> picks;
  picks.reserve(budget);
  for (std::uint32_t i = 0; i < budget; ++i) {
    picks.push_back(space.sample_uniform(rng));
  }
  return picks;
}

}  // namespace cubicml
