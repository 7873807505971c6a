#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace tcda {

using Rng = std::mt19937_64;

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

inline std::uint64_t fnv1a(std::string_view s) {
  std::uint64_t h = 0xCBF29CE484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001B3ULL;
  }
  return h;
}

// Independent stream seed for one sample. Depends only on its arguments, so
// the draw order across workers never matters.
inline std::uint64_t derive_seed(std::uint64_t master, std::string_view violation,
                                 std::string_view regime, std::uint64_t index) {
  std::uint64_t s = splitmix64(master);
  s = splitmix64(s ^ fnv1a(violation));
  s = splitmix64(s ^ fnv1a(regime));
  return splitmix64(s ^ index);
}

inline double standard_normal(Rng& rng) {
  return std::normal_distribution<double>(0.0, 1.0)(rng);
}

inline double uniform(Rng& rng, double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

inline bool bernoulli(Rng& rng, double p) {
  return std::bernoulli_distribution(p)(rng);
}

inline int uniform_int(Rng& rng, int lo, int hi) {
  return std::uniform_int_distribution<int>(lo, hi)(rng);
}

}  // namespace tcda
