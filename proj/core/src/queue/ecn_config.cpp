#include "pet/queue/ecn_config.hpp"

#include <cmath>
#include <string>

#include "pet/errors.hpp"

namespace pet::queue {

double mark_probability(Bytes qlen, const EcnConfig& config) noexcept {
  if (qlen <= config.k_min) return 0.0;
  if (qlen >= config.k_max) return 1.0;
  const double span = static_cast<double>(config.k_max - config.k_min);
  return config.p_max * static_cast<double>(qlen - config.k_min) / span;
}

void validate(const EcnConfig& config) {
  if (config.k_min == 0) throw ConfigError("ecn: k_min must be positive");
  if (config.k_min >= config.k_max) {
    throw ConfigError("ecn: k_min (" + std::to_string(config.k_min) +
                      ") must be below k_max (" + std::to_string(config.k_max) + ")");
  }
  if (!(config.p_max > 0.0 && config.p_max <= 1.0)) {
    throw ConfigError("ecn: p_max must lie in (0, 1]");
  }
}

bool on_probability_grid(double p_max) noexcept {
  const double steps = p_max / 0.05;
  const double nearest = std::round(steps);
  return nearest >= 1.0 && nearest <= 20.0 && std::abs(steps - nearest) < 1e-9;
}

}  // namespace pet::queue
