#pragma once

#include "pet/units.hpp"

namespace pet::agent {

/// r = beta1 * utilization + beta2 / max(1, avg queue in packets).
struct RewardSpec {
  double beta1 = 0.3;
  double beta2 = 0.7;
  double link_bw = 10e9;  // bits/s
};

/// Throughput-leaning and latency-leaning weightings.
RewardSpec web_search_reward(double link_bw);
RewardSpec data_mining_reward(double link_bw);

/// Throws ConfigError unless both weights lie in [0,1] and sum to 1.
void validate(const RewardSpec& spec);

struct IntervalStats {
  double tx_rate = 0;            // bits/s over the interval
  double avg_qlen_packets = 0;   // time-averaged, in MTU packets
};

/// From raw interval counters: bytes sent, byte-ns queue area, duration.
IntervalStats interval_stats(Bytes tx_bytes, long double qlen_area_byte_ns, SimTime duration,
                             Bytes mtu);

double compute_reward(const IntervalStats& stats, const RewardSpec& spec);

}  // namespace pet::agent
