#include "pet/agent/reward.hpp"

#include <algorithm>
#include <cmath>

#include "pet/errors.hpp"

namespace pet::agent {

RewardSpec web_search_reward(double link_bw) { return {0.3, 0.7, link_bw}; }
RewardSpec data_mining_reward(double link_bw) { return {0.7, 0.3, link_bw}; }

void validate(const RewardSpec& spec) {
  if (spec.beta1 < 0 || spec.beta1 > 1 || spec.beta2 < 0 || spec.beta2 > 1) {
    throw ConfigError("reward: beta1 and beta2 must lie in [0,1]");
  }
  if (std::abs(spec.beta1 + spec.beta2 - 1.0) > 1e-12) {
    throw ConfigError("reward: beta1 + beta2 must equal 1");
  }
  if (!(spec.link_bw > 0)) throw ConfigError("reward: link_bw must be > 0");
}

IntervalStats interval_stats(Bytes tx_bytes, long double qlen_area_byte_ns, SimTime duration,
                             Bytes mtu) {
  IntervalStats s;
  if (duration <= SimTime{0}) return s;
  const double secs = to_seconds(duration);
  s.tx_rate = static_cast<double>(tx_bytes) * 8.0 / secs;
  s.avg_qlen_packets = static_cast<double>(qlen_area_byte_ns / static_cast<long double>(duration.count())) /
                       static_cast<double>(mtu);
  return s;
}

double compute_reward(const IntervalStats& stats, const RewardSpec& spec) {
  const double util = std::clamp(stats.tx_rate / spec.link_bw, 0.0, 1.0);
  const double latency = 1.0 / std::max(1.0, stats.avg_qlen_packets);
  return spec.beta1 * util + spec.beta2 * latency;
}

}  // namespace pet::agent
