#pragma once

#include <array>
#include <cstdint>
#include <deque>
#include <functional>
#include <span>
#include <vector>

#include "pet/queue/ecn_config.hpp"
#include "pet/queue/packet.hpp"
#include "pet/units.hpp"

namespace pet::ncm {

/// Six-factor port observation for one slot.
struct NetState {
  Bytes qlen = 0;
  double tx_rate = 0;         // bits/s
  double tx_rate_marked = 0;  // bits/s of CE-marked departures
  queue::EcnConfig ecn_current;
  std::uint32_t d_incast = 0;
  double r_flow = 0.5;
};

inline constexpr std::size_t kStateDim = 6;
using NormalizedState = std::array<double, kStateDim>;

enum StateComponent : std::size_t { kQlen = 0, kTxRate, kTxRateMarked, kEcn, kIncast, kRatio };

struct NormalizationEnv {
  Bytes buffer_capacity = 300 * kKiB;
  double link_rate = 10e9;
  std::uint32_t max_n = 9;
  std::uint32_t host_count = 32;
  double alpha_kb = 20;
  // ablation switches: force the component to zero
  bool mask_incast = false;
  bool mask_ratio = false;
};

/// Continuous exponent n with k = alpha * 2^n KiB, clamped to [0, max_n].
double ecn_exponent(Bytes threshold, double alpha_kb, std::uint32_t max_n);

NormalizedState normalize(const NetState& state, const NormalizationEnv& env);
NormalizedState clamp_unit(NormalizedState s);

/// A flow seen at the port during the slot.
struct FlowObservation {
  std::uint32_t flow = 0;
  std::uint32_t src = 0;
  std::uint32_t dst = 0;
  Bytes cumulative_bytes = 0;
};

/// Max over destinations of the number of distinct senders toward it.
std::uint32_t incast_degree(std::span<const FlowObservation> flows);

/// Fraction of observed flows that are mice; 0.5 when nothing was seen.
double flow_ratio(std::span<const FlowObservation> flows);

/// The last k normalized slots, oldest first.
class StateWindow {
 public:
  struct Slot {
    SimTime end{0};
    NormalizedState state{};
  };

  StateWindow(std::size_t k, SimTime slot_period);

  void push(SimTime slot_end, const NormalizedState& state);
  /// Drops slots whose end time is at or before now - k * slot_period.
  /// Returns the number evicted.
  std::size_t cleanup_expired(SimTime now);

  std::size_t k() const noexcept { return k_; }
  SimTime slot_period() const noexcept { return slot_period_; }
  std::size_t size() const noexcept { return slots_.size(); }
  const std::deque<Slot>& slots() const noexcept { return slots_; }

  /// Flattened k x 6 sequence, zero-padded at the old end, newest last.
  std::vector<double> sequence() const;

 private:
  std::size_t k_;
  SimTime slot_period_;
  std::deque<Slot> slots_;
};

/// Cumulative queue counters read at a slot boundary.
struct PortCounters {
  Bytes qlen = 0;
  Bytes tx_bytes = 0;
  Bytes tx_marked_bytes = 0;
  queue::EcnConfig ecn;
};

struct AuxRecord {
  SimTime t{0};
  std::uint32_t flow = 0;
  std::uint32_t src = 0;
  std::uint32_t dst = 0;
};

/// Per-port Network Condition Monitor: slot sampling, the derived incast and
/// mice/elephant factors, the k-slot window, and expiry cleanup.
class Monitor {
 public:
  struct Config {
    std::size_t k = 8;
    SimTime slot_period = std::chrono::microseconds(50);
    std::size_t record_budget = 1 << 16;
    double memory_threshold = 0.8;  // fraction of record_budget
    NormalizationEnv env;
  };

  using CumulativeBytes = std::function<Bytes(std::uint32_t flow)>;

  explicit Monitor(Config config);

  /// Header record for an admitted packet. Triggers the threshold cleanup
  /// when memory usage reaches the threshold.
  void record(const Packet& pkt, SimTime now);

  /// Closes the slot ending at `now`.
  NetState observe_slot(const PortCounters& counters, const CumulativeBytes& cumulative,
                        SimTime now);

  /// Scheduled expiry of window slots; if memory_usage >= threshold, also
  /// evicts the oldest half of the retained auxiliary records.
  void cleanup_expired(SimTime now, double memory_usage);

  double memory_usage() const noexcept;
  std::size_t aux_records() const noexcept { return records_.size(); }
  std::uint64_t threshold_cleanups() const noexcept { return threshold_cleanups_; }
  const StateWindow& window() const noexcept { return window_; }
  const Config& config() const noexcept { return config_; }
  const NetState& last_state() const noexcept { return last_; }

 private:
  Config config_;
  StateWindow window_;
  std::deque<AuxRecord> records_;
  PortCounters prev_{};
  NetState last_{};
  std::uint64_t threshold_cleanups_ = 0;
};

}  // namespace pet::ncm
