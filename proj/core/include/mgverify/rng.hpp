#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>
#include <vector>

namespace mgv {

using Rng = std::mt19937_64;

/// Independent stream keyed by (seed, key...). Streams with different keys
/// do not depend on evaluation order.
inline Rng make_stream(std::uint64_t seed, std::initializer_list<std::uint64_t> key = {}) {
  std::vector<std::uint32_t> words;
  words.reserve(2 + 2 * key.size());
  auto push = [&](std::uint64_t v) {
    words.push_back(static_cast<std::uint32_t>(v));
    words.push_back(static_cast<std::uint32_t>(v >> 32));
  };
  push(seed);
  for (auto k : key) push(k);
  std::seed_seq seq(words.begin(), words.end());
  return Rng(seq);
}

/// Uniform double in [0, 1).
inline double uniform01(Rng& rng) { return std::generate_canonical<double, 53>(rng); }

}  // namespace mgv
