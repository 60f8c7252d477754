#pragma once

// Deterministic stream splitting: every task draws from its own generator seeded by
// (master seed, task path), so results do not depend on scheduling or thread count.

#include <cstdint>
#include <initializer_list>
#include <random>
#include <vector>

namespace mcmr {

using Rng = std::mt19937_64;

namespace stream_tag {
inline constexpr std::uint64_t kSequences = 1;
inline constexpr std::uint64_t kProbeShots = 2;
inline constexpr std::uint64_t kFocusShots = 3;
inline constexpr std::uint64_t kBootstrap = 4;
inline constexpr std::uint64_t kDepump = 5;
inline constexpr std::uint64_t kExperiment = 6;
inline constexpr std::uint64_t kTrial = 7;
}  // namespace stream_tag

inline Rng make_stream(std::uint64_t seed, std::initializer_list<std::uint64_t> path) {
  std::vector<std::uint32_t> words;
  words.reserve(2 * (path.size() + 1));
  auto push = [&words](std::uint64_t v) {
    words.push_back(static_cast<std::uint32_t>(v & 0xffffffffu));
    words.push_back(static_cast<std::uint32_t>(v >> 32));
  };
  push(seed);
  for (auto p : path) push(p);
  std::seed_seq seq(words.begin(), words.end());
  return Rng(seq);
}

/// Derives a child seed, for handing a sub-computation its own master seed.
inline std::uint64_t derive_seed(std::uint64_t seed, std::initializer_list<std::uint64_t> path) {
  Rng rng = make_stream(seed, path);
  return rng();
}

}  // namespace mcmr
