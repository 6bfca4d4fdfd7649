#pragma once

#include <cstdint>
#include <random>

namespace eiwv {

using Rng = std::mt19937_64;

// Independent stream per (seed, stream id) so the crowd, the environment and
// the agent never share draws.
inline Rng make_rng(std::uint64_t seed, std::uint64_t stream = 0) {
  std::seed_seq sseq{seed, stream, std::uint64_t{0x9e3779b97f4a7c15ull}};
  return Rng(sseq);
}

inline double uniform(Rng& rng, double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

// uniform integer in [0, n)
inline std::size_t uniform_index(Rng& rng, std::size_t n) {
  return std::uniform_int_distribution<std::size_t>(0, n - 1)(rng);
}

}  // namespace eiwv
