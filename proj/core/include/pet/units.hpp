#pragma once

#include <chrono>
#include <cstdint>

namespace pet {

/// Simulation time axis. Integer nanoseconds only; no floating-point time.
using SimTime = std::chrono::nanoseconds;

using Bytes = std::uint64_t;

/// Link rates in bits per second.
using BitsPerSec = std::uint64_t;

inline constexpr Bytes kKiB = 1024;
inline constexpr Bytes kMiB = 1024 * 1024;

inline constexpr double to_seconds(SimTime t) { return static_cast<double>(t.count()) * 1e-9; }

inline SimTime from_seconds(double s) {
  return SimTime{static_cast<std::int64_t>(s * 1e9 + (s >= 0 ? 0.5 : -0.5))};
}

/// Serialization delay of `bytes` on a link of `rate` bits/s, rounded up to 1 ns.
inline constexpr SimTime serialization_delay(Bytes bytes, BitsPerSec rate) {
  const std::uint64_t bits_ns = bytes * 8ULL * 1'000'000'000ULL;
  return SimTime{static_cast<std::int64_t>((bits_ns + rate - 1) / rate)};
}

}  // namespace pet
