#pragma once

#include <cstdint>
#include <deque>
#include <limits>
#include <optional>
#include <random>
#include <vector>

#include "pet/queue/ecn_config.hpp"
#include "pet/queue/packet.hpp"

namespace pet::queue {

enum class EnqueueOutcome { accepted, accepted_marked, dropped };

struct QueueCounters {
  std::uint64_t enq = 0;
  std::uint64_t deq = 0;
  std::uint64_t marked = 0;
  std::uint64_t dropped = 0;
  std::uint64_t dropped_bytes = 0;
  std::uint64_t tx_bytes = 0;
  std::uint64_t tx_marked_bytes = 0;
  std::uint64_t config_applications = 0;
  std::uint64_t clamp_warnings = 0;
};

inline constexpr Bytes kUnlimitedCapacity = std::numeric_limits<Bytes>::max();

/// Single FIFO egress queue with probabilistic ECN marking on admission.
///
/// The marking decision uses the queue length after the arriving packet is
/// admitted. Marking randomness comes from a generator owned by the queue so
/// that it never interleaves with routing or traffic randomness.
class PortQueue {
 public:
  PortQueue(Bytes capacity, EcnConfig config, std::uint64_t seed);

  EnqueueOutcome enqueue(Packet pkt, SimTime now);
  std::optional<Packet> dequeue(SimTime now);

  /// Install a new marking configuration. k_min >= k_max is rejected with
  /// ConfigError; k_max above the buffer capacity is clamped (and k_min kept
  /// strictly below it) and counted in clamp_warnings.
  void apply_ecn_config(const EcnConfig& config, SimTime now);

  /// Drop everything queued (link went down); the packets are returned in
  /// FIFO order and counted as drops.
  std::vector<Packet> flush(SimTime now);

  Bytes qlen_bytes() const noexcept { return qlen_bytes_; }
  std::size_t qlen_packets() const noexcept { return packets_.size(); }
  bool empty() const noexcept { return packets_.empty(); }
  Bytes capacity() const noexcept { return capacity_; }
  const EcnConfig& config() const noexcept { return config_; }
  const QueueCounters& counters() const noexcept { return counters_; }

  /// Integral of qlen_bytes over time up to `now`, in byte-nanoseconds.
  long double qlen_area(SimTime now) const noexcept;

 private:
  void advance_area(SimTime now) noexcept;

  std::deque<Packet> packets_;
  Bytes qlen_bytes_ = 0;
  Bytes capacity_;
  EcnConfig config_;
  QueueCounters counters_;
  std::mt19937_64 rng_;
  long double area_ = 0;
  SimTime area_at_{0};
};

}  // namespace pet::queue
