#pragma once

#include <algorithm>
#include <cstdint>
#include <random>
#include <string_view>

namespace tradenet {

using Rng = std::mt19937_64;

inline std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

inline std::uint64_t fnv1a64(std::string_view s) noexcept {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

/// Named seed derivation: every random consumer gets its own stream from
/// (master seed, stage name, index), so adding a consumer never shifts
/// the streams of the others.
inline std::uint64_t derive_seed(std::uint64_t master, std::string_view stage,
                                 std::uint64_t index = 0) noexcept {
  return splitmix64(splitmix64(master ^ fnv1a64(stage)) + splitmix64(index));
}

/// Uniform double in [0, 1) from the top 53 bits. Used instead of
/// std::uniform_real_distribution, whose output is implementation-defined.
inline double uniform01(Rng& rng) noexcept {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

/// Uniform integer in [0, n) by rejection; portable across standard libraries.
inline std::uint64_t uniform_index(Rng& rng, std::uint64_t n) noexcept {
  const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
  std::uint64_t x;
  do {
    x = rng();
  } while (x >= limit);
  return x % n;
}

template <class RandomIt>
void shuffle(RandomIt first, RandomIt last, Rng& rng) {
  const auto n = static_cast<std::uint64_t>(last - first);
  for (std::uint64_t i = n; i > 1; --i) {
    const auto j = uniform_index(rng, i);
    std::iter_swap(first + (i - 1), first + j);
  }
}

}  // namespace tradenet
