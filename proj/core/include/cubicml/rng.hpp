#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <string_view>

namespace cubicml {

// splitmix64 finalizer; good avalanche, stable across platforms.
std::uint64_t mix64(std::uint64_t x);

// Component seed = mix64(global ^ fnv1a(name)). Every stage of a run derives
// its stream from the one global seed through this.
std::uint64_t fnv1a64(std::string_view text);
std::uint64_t derive_seed(std::uint64_t global_seed, std::string_view component);
std::uint64_t derive_seed(std::uint64_t global_seed, std::string_view component,
                          std::uint64_t index);

// mt19937_64 with hand-rolled draw helpers so results do not depend on the
// standard library's distribution implementations.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : gen_(seed) {}

  std::uint64_t next_u64() { return gen_(); }

  // Unbiased integer in [0, n) by rejection.
  std::uint64_t below(std::uint64_t n);

  // Double in [0, 1) with 53 random bits.
  double unit() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * unit(); }

  bool bernoulli(double p) { return unit() < p; }

  // Index drawn from a normalized probability vector (CDF walk).
  std::size_t categorical(std::span<const double> probs);

 private:
  std::mt19937_64 gen_;
};

}  // namespace cubicml
