#include "cubicml/rng.hpp"

#include "cubicml/errors.hpp"

namespace cubicml {

std::uint64_t mix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ull;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
  return x ^ (x >> 31);
}

std::uint64_t fnv1a64(std::string_view text) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  return h;
}

std::uint64_t derive_seed(std::uint64_t global_seed, std::string_view component) {
  return mix64(global_seed ^ fnv1a64(component));
}

std::uint64_t derive_seed(std::uint64_t global_seed, std::string_view component,
                          std::uint64_t index) {
  return mix64(derive_seed(global_seed, component) ^ mix64(index));
}

std::uint64_t Rng::below(std::uint64_t n) {
  if (n == 0) throw ValidationError("Rng::below: n must be positive");
  const std::uint64_t limit = ~std::uint64_t{0} - (~std::uint64_t{0} % n + 1) % n;
  std::uint64_t x;
  do {
    x = gen_();
  } while (x > limit);
  return x % n;
}

std::size_t Rng::categorical(std::span<const double> probs) {
  if (probs.empty()) throw ValidationError("Rng::categorical: empty probability vector");
  const double u = unit();
  double cdf = 0.0;
  for (std::size_t i = 0; i < probs.size(); ++i) {
    cdf += probs[i];
    if (u < cdf) return i;
  }
  return probs.size() - 1;
}

}  // namespace cubicml
