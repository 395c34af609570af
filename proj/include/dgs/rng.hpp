#pragma once

#include <cstdint>
#include <random>
#include <string_view>
#include <utility>
#include <vector>

namespace dgs {

// Bit-reproducible draws; no std::*_distribution.
// std::mt19937_64's output sequence is fixed by the standard.

/// FNV-1a, 64-bit.
constexpr std::uint64_t fnv1a64(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

/// SplitMix64 finalizer.
constexpr std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Seed for the stream identified by (seed, label, index).
constexpr std::uint64_t derive_seed(std::uint64_t seed, std::string_view label,
                                    std::uint64_t index) {
  return splitmix64(splitmix64(seed ^ fnv1a64(label)) + index);
}

constexpr std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index) {
  return splitmix64(splitmix64(seed) + index);
}

using Engine = std::mt19937_64;

/// Uniform integer in [0, bound) by rejection, bound > 0.
inline std::uint64_t uniform_below(Engine& engine, std::uint64_t bound) {
  const std::uint64_t threshold = (0 - bound) % bound;
  for (;;) {
    const std::uint64_t r = engine();
    if (r >= threshold) return r % bound;
  }
}

/// Uniform real in [0, 1) from the top 53 bits.
inline double uniform_unit(Engine& engine) {
  return static_cast<double>(engine() >> 11) * 0x1.0p-53;
}

/// Moves a uniformly random k-subset to the front of `items` (partial
/// Fisher-Yates) and truncates to it.
template <typename T>
void sample_without_replacement(std::vector<T>& items, std::size_t k,
                                Engine& engine) {
  const std::size_t n = items.size();
  if (k > n) k = n;
  for (std::size_t i = 0; i < k; ++i) {
    const auto j = i + static_cast<std::size_t>(uniform_below(engine, n - i));
    using std::swap;
    swap(items[i], items[j]);
  }
  items.resize(k);
}

}  // namespace dgs
