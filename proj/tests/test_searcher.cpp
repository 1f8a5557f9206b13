#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <vector>

#include "cubicml/errors.hpp"
#include "cubicml/policy.hpp"
#include "cubicml/rng.hpp"
#include "cubicml/searcher.hpp"
#include "cubicml/space.hpp"
#include "doctest.h"

namespace {

using namespace cubicml;

SearchSpace bandit_space() {
  std::vector<Dimension> dims;
  dims.push_back(Dimension::categorical("arm", {"best", "worst"}, RoleTag::other));
  return SearchSpace("bandit", 1, std::move(dims));
}

SearchSpace grid_space() {
  std::vector<Dimension> dims;
  dims.push_back(Dimension::stepped_integer("a", 0, 3, 1, RoleTag::other));
  dims.push_back(Dimension::stepped_integer("b", 0, 3, 1, RoleTag::other));
  dims.push_back(Dimension::stepped_integer("c", 0, 3, 1, RoleTag::other));
  dims.push_back(Dimension::stepped_integer("d", 0, 3, 1, RoleTag::other));
  return SearchSpace("grid", 1, std::move(dims));
}

double grid_score(const ConfigPoint& point) {
  return 8.0 * point.indices[0] + 4.0 * point.indices[1] +
         2.0 * point.indices[2] + 1.0 * point.indices[3];
}

// Runs one bandit update round: samples a batch from the policy and rewards
// arm 0 with `good`, arm 1 with `bad`.
void bandit_round(PolicyState& policy, const SearchSpace& space, Rng& rng,
                  double good, double bad, const PolicyUpdateConfig& config) {
  std::vector<std::pair<ConfigPoint, double>> batch;
  for (int i = 0; i < 30; ++i) {
    auto point = policy.sample(space, rng);
    const double reward = point.indices[0] == 0 ? good : bad;
    batch.emplace_back(std::move(point), reward);
  }
  policy.update(space, batch, config);
}

}  // namespace

TEST_SUITE("searcher") {

TEST_CASE("fresh policy is uniform and probabilities sum to one") {
  const auto space = grid_space();
  PolicyState policy(space);
  for (std::size_t d = 0; d < space.dimension_count(); ++d) {
    const auto probs = policy.probabilities(d);
    REQUIRE(probs.size() == 4);
    double total = 0.0;
    for (double p : probs) {
      CHECK(p == doctest::Approx(0.25).epsilon(1e-12));
      total += p;
    }
    CHECK(std::abs(total - 1.0) <= 1e-12);
  }

  // Frequency check on one dimension: uniform within 5 sigma.
  Rng rng(100);
  std::vector<int> counts(4, 0);
  const int draws = 40000;
  for (int i = 0; i < draws; ++i) {
    ++counts[policy.sample(space, rng).indices[0]];
  }
  const double expected = draws / 4.0;
  const double sigma = std::sqrt(draws * 0.25 * 0.75);
  for (int c : counts) {
    CHECK(std::abs(c - expected) <= 5.0 * sigma);
  }
}

TEST_CASE("probabilities stay normalized through updates") {
  const auto space = grid_space();
  PolicyState policy(space);
  Rng rng(7);
  PolicyUpdateConfig config;
  for (int round = 0; round < 25; ++round) {
    std::vector<std::pair<ConfigPoint, double>> batch;
    for (int i = 0; i < 30; ++i) {
      auto point = policy.sample(space, rng);
      batch.emplace_back(point, grid_score(point));
    }
    policy.update(space, batch, config);
    for (std::size_t d = 0; d < space.dimension_count(); ++d) {
      const auto probs = policy.probabilities(d);
      double total = 0.0;
      for (double p : probs) total += p;
      CHECK(std::abs(total - 1.0) <= 1e-12);
    }
  }
}

TEST_CASE("a dominant logit saturates sampling") {
  const auto space = bandit_space();
  PolicyState policy(space);
  policy.logits()[0] = 20.0;
  const auto probs = policy.probabilities(0);
  CHECK(probs[0] > 0.999);

  Rng rng(3);
  int hits = 0;
  for (int i = 0; i < 5000; ++i) {
    if (policy.sample(space, rng).indices[0] == 0) ++hits;
  }
  CHECK(hits >= 4980);
}

TEST_CASE("sampling is deterministic per seed") {
  const auto space = grid_space();
  PolicyState policy(space);
  Rng first(42), second(42);
  for (int i = 0; i < 50; ++i) {
    CHECK(policy.sample(space, first).indices ==
          policy.sample(space, second).indices);
  }
}

TEST_CASE("two-arm bandit converges in most seeds") {
  const auto space = bandit_space();
  PolicyUpdateConfig config;
  config.lr = 0.25;
  int converged = 0;
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    PolicyState policy(space);
    Rng rng(seed);
    for (int update = 0; update < 50; ++update) {
      bandit_round(policy, space, rng, 1.0, 0.0, config);
    }
    if (policy.probabilities(0)[0] > 0.95) ++converged;
  }
  CHECK(converged >= 9);
}

TEST_CASE("rewards equal to the baseline leave logits untouched") {
  const auto space = grid_space();
  PolicyState policy(space);
  Rng rng(11);
  PolicyUpdateConfig config;
  for (int round = 0; round < 3; ++round) {
    std::vector<std::pair<ConfigPoint, double>> batch;
    for (int i = 0; i < 30; ++i) {
      batch.emplace_back(policy.sample(space, rng), 2.5);
    }
    policy.update(space, batch, config);
    for (double logit : policy.logits()) CHECK(logit == 0.0);
  }
}

TEST_CASE("constant reward shift preserves the bandit argmax trajectory") {
  const auto space = bandit_space();
  PolicyUpdateConfig config;
  config.lr = 0.25;
  PolicyState plain(space), shifted(space);
  Rng rng_plain(5), rng_shifted(5);
  for (int update = 0; update < 50; ++update) {
    bandit_round(plain, space, rng_plain, 1.0, 0.0, config);
    bandit_round(shifted, space, rng_shifted, 11.0, 10.0, config);
    const auto p = plain.probabilities(0);
    const auto s = shifted.probabilities(0);
    CHECK((p[0] > p[1]) == (s[0] > s[1]));
  }
}

TEST_CASE("trial returns exactly the requested sample count") {
  const auto space = grid_space();
  SearcherConfig config;
  config.samples_per_trial = 200;
  const auto proposals = reinforce_trial(space, grid_score, 77, 0, config);
  CHECK(proposals.size() == 200);
  for (std::size_t i = 0; i < proposals.size(); ++i) {
    CHECK(proposals[i].sample_index == i);
    CHECK(proposals[i].trial_seed == 77);
    CHECK(proposals[i].predicted_score == grid_score(proposals[i].config));
  }
}

TEST_CASE("trial finds the top percentile of a linear landscape") {
  const auto space = grid_space();

  std::vector<double> all_scores;
  for_each_config(space, [&](const ConfigPoint& point) {
    all_scores.push_back(grid_score(point));
  });
  std::sort(all_scores.rbegin(), all_scores.rend());
  const std::size_t cutoff_rank = std::max<std::size_t>(
      1, static_cast<std::size_t>(std::ceil(all_scores.size() * 0.01)));
  const double cutoff = all_scores[cutoff_rank - 1];

  SearcherConfig config;
  const auto proposals = reinforce_trial(space, grid_score, 123, 0, config);
  double best = -1.0;
  for (const auto& proposal : proposals) {
    best = std::max(best, proposal.predicted_score);
  }
  CHECK(best >= cutoff);
}

TEST_CASE("different trial seeds explore differently") {
  const auto space = grid_space();
  SearcherConfig config;
  config.samples_per_trial = 120;
  const auto first = reinforce_trial(space, grid_score, 1, 0, config);
  const auto second = reinforce_trial(space, grid_score, 2, 1, config);
  bool any_difference = false;
  for (std::size_t i = 0; i < first.size(); ++i) {
    if (first[i].config.indices != second[i].config.indices) {
      any_difference = true;
      break;
    }
  }
  CHECK(any_difference);
}

TEST_CASE("policy improves its own proxy within a trial") {
  const auto space = grid_space();
  SearcherConfig config;
  int improved = 0;
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    const auto proposals = reinforce_trial(space, grid_score, seed, 0, config);
    double early = 0.0, late = 0.0;
    for (std::size_t i = 0; i < 100; ++i) {
      early += proposals[i].predicted_score;
      late += proposals[proposals.size() - 100 + i].predicted_score;
    }
    if (late >= early) ++improved;
  }
  CHECK(improved >= 8);
}

TEST_CASE("run_trials is deterministic and trial-count faithful") {
  const auto space = grid_space();
  SearcherConfig config;
  config.samples_per_trial = 90;
  config.trials = 3;
  const auto first = run_trials(space, grid_score, 2025, config);
  const auto second = run_trials(space, grid_score, 2025, config);
  REQUIRE(first.size() == 3);
  for (std::size_t t = 0; t < 3; ++t) {
    REQUIRE(first[t].size() == 90);
    for (std::size_t i = 0; i < 90; ++i) {
      CHECK(first[t][i].config.indices == second[t][i].config.indices);
    }
  }
}

TEST_CASE("threaded trials match serial trials") {
  const auto space = grid_space();
  SearcherConfig config;
  config.samples_per_trial = 60;
  config.trials = 3;
  const auto serial = run_trials(space, grid_score, 9, config);
  config.threads = 3;
  const auto parallel = run_trials(space, grid_score, 9, config);
  for (std::size_t t = 0; t < 3; ++t) {
    REQUIRE(serial[t].size() == parallel[t].size());
    for (std::size_t i = 0; i < serial[t].size(); ++i) {
      CHECK(serial[t][i].config.indices == parallel[t][i].config.indices);
      CHECK(serial[t][i].predicted_score == parallel[t][i].predicted_score);
    }
  }
}

TEST_CASE("topk deduplicates identical configs across trials") {
  const auto space = bandit_space();
  ConfigPoint point;
  point.space_name = "bandit";
  point.space_version = 1;
  point.indices = {0};
  SearchProposal proposal{point, 1.0, 1, 0, 0};
  std::vector<std::vector<SearchProposal>> trials(3, {proposal});
  trials[1][0].trial_ordinal = 1;
  trials[2][0].trial_ordinal = 2;
  const auto picked = propose_topk(trials, {}, 50);
  REQUIRE(picked.size() == 1);
  CHECK(picked[0].trial_ordinal == 0);
}

TEST_CASE("topk keeps the max score for duplicates") {
  ConfigPoint point;
  point.space_name = "bandit";
  point.space_version = 1;
  point.indices = {0};
  std::vector<std::vector<SearchProposal>> trials;
  trials.push_back({SearchProposal{point, 1.0, 1, 0, 0}});
  trials.push_back({SearchProposal{point, 3.5, 2, 1, 4}});
  const auto picked = propose_topk(trials, {}, 10);
  REQUIRE(picked.size() == 1);
  CHECK(picked[0].predicted_score == 3.5);
  CHECK(picked[0].trial_ordinal == 1);
}

TEST_CASE("topk returns fewer than k when novelty runs out") {
  const auto space = grid_space();
  SearcherConfig config;
  config.samples_per_trial = 40;
  const auto proposals = reinforce_trial(space, grid_score, 55, 0, config);
  std::vector<std::vector<SearchProposal>> trials = {proposals};
  const auto picked = propose_topk(trials, {}, 5000);
  std::set<std::vector<std::uint32_t>> unique;
  for (const auto& proposal : proposals) unique.insert(proposal.config.indices);
  CHECK(picked.size() == unique.size());
}

TEST_CASE("topk drops configs already in history") {
  const auto space = grid_space();
  SearcherConfig config;
  config.samples_per_trial = 60;
  const auto proposals = reinforce_trial(space, grid_score, 31, 0, config);
  std::vector<std::vector<SearchProposal>> trials = {proposals};

  std::vector<ConfigPoint> history = {proposals[0].config, proposals[1].config};
  const auto picked = propose_topk(trials, history, 1000);
  for (const auto& proposal : picked) {
    CHECK(proposal.config.indices != history[0].indices);
    CHECK(proposal.config.indices != history[1].indices);
  }
}

TEST_CASE("topk output is unique, sorted, and capped") {
  const auto space = grid_space();
  SearcherConfig config;
  config.trials = 3;
  config.samples_per_trial = 150;
  const auto trials = run_trials(space, grid_score, 404, config);
  const auto picked = propose_topk(trials, {}, 10);
  CHECK(picked.size() <= 10);
  std::set<std::vector<std::uint32_t>> unique;
  for (std::size_t i = 0; i < picked.size(); ++i) {
    unique.insert(picked[i].config.indices);
    if (i > 0) {
      CHECK(picked[i - 1].predicted_score >= picked[i].predicted_score);
    }
  }
  CHECK(unique.size() == picked.size());
}

TEST_CASE("topk breaks score ties by trial then sample order") {
  ConfigPoint a, b, c, d;
  a.space_name = b.space_name = c.space_name = d.space_name = "grid";
  a.space_version = b.space_version = c.space_version = d.space_version = 1;
  a.indices = {0, 0, 0, 0};
  b.indices = {1, 0, 0, 0};
  c.indices = {2, 0, 0, 0};
  d.indices = {3, 0, 0, 0};
  std::vector<std::vector<SearchProposal>> trials;
  trials.push_back({SearchProposal{a, 5.0, 1, 0, 0},
                    SearchProposal{b, 3.0, 1, 0, 1}});
  trials.push_back({SearchProposal{c, 3.0, 2, 1, 0},
                    SearchProposal{d, 1.0, 2, 1, 1}});
  const auto picked = propose_topk(trials, {}, 2);
  REQUIRE(picked.size() == 2);
  CHECK(picked[0].predicted_score == 5.0);
  CHECK(picked[1].predicted_score == 3.0);
  CHECK(picked[1].trial_ordinal == 0);  // tie goes to the earlier trial
  CHECK(picked[1].config.indices == b.indices);
}

TEST_CASE("random search honors budget and seed") {
  const auto space = grid_space();
  const auto batch = random_search(space, 480, 99);
  CHECK(batch.size() == 480);
  const auto single = random_search(space, 1, 99);
  CHECK(single.size() == 1);
  const auto again = random_search(space, 480, 99);
  for (std::size_t i = 0; i < batch.size(); ++i) {
    CHECK(batch[i].indices == again[i].indices);
  }
  CHECK_THROWS_AS(random_search(space, 0, 1), ValidationError);
}

TEST_CASE("policy update rejects bad input") {
  const auto space = bandit_space();
  PolicyState policy(space);
  std::vector<std::pair<ConfigPoint, double>> empty;
  CHECK_THROWS_AS(policy.update(space, empty, PolicyUpdateConfig{}),
                  ValidationError);

  ConfigPoint point;
  point.space_name = "bandit";
  point.space_version = 1;
  point.indices = {0};
  std::vector<std::pair<ConfigPoint, double>> nan_batch = {
      {point, std::numeric_limits<double>::infinity()}};
  CHECK_THROWS_AS(policy.update(space, nan_batch, PolicyUpdateConfig{}),
                  NumericError);
}

}  // TEST_SUITE
