#pragma once

#include "pet/units.hpp"

namespace pet::queue {

/// RED-style ECN marking parameters applied to one port queue.
struct EcnConfig {
  Bytes k_min = 5 * kKiB;
  Bytes k_max = 200 * kKiB;
  double p_max = 0.2;

  friend bool operator==(const EcnConfig&, const EcnConfig&) = default;
};

/// Marking probability for an instantaneous queue length.
///
/// 0 at or below k_min, 1 at or above k_max, and linear from 0 up to p_max
/// in between. Total on any config with k_min < k_max.
double mark_probability(Bytes qlen, const EcnConfig& config) noexcept;

/// Throws ConfigError unless 0 < k_min < k_max and p_max is in (0, 1].
void validate(const EcnConfig& config);

/// True when p_max lies on the 5% grid {0.05, ..., 1.00}.
bool on_probability_grid(double p_max) noexcept;

}  // namespace pet::queue
