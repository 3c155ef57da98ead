#pragma once

#include <cstdint>
#include <random>

namespace pet {

inline constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

/// Independent seed for a named stream (marking, traffic, agent i, ...).
inline constexpr std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream,
                                           std::uint64_t index = 0) noexcept {
  return splitmix64(splitmix64(seed ^ splitmix64(stream)) + index);
}

// Portable [0,1) draw; std::uniform_real_distribution is not bit-stable
// across standard libraries.
inline double uniform01(std::mt19937_64& rng) noexcept {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

inline std::uint64_t uniform_index(std::mt19937_64& rng, std::uint64_t n) noexcept {
  return static_cast<std::uint64_t>(uniform01(rng) * static_cast<double>(n));
}

namespace streams {
inline constexpr std::uint64_t kMarking = 1;
inline constexpr std::uint64_t kTraffic = 2;
inline constexpr std::uint64_t kAgent = 3;
inline constexpr std::uint64_t kFailure = 4;
inline constexpr std::uint64_t kInit = 5;
inline constexpr std::uint64_t kIncast = 6;
}  // namespace streams

}  // namespace pet
