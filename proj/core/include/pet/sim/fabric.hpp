#pragma once

#include <cstdint>
#include <deque>
#include <optional>
#include <span>
#include <vector>

#include "pet/queue/port_queue.hpp"
#include "pet/sim/event.hpp"
#include "pet/sim/topology.hpp"
#include "pet/transport/dctcp.hpp"

namespace pet::sim {

struct FabricConfig {
  TopologyConfig topology;
  queue::EcnConfig initial_ecn{5 * kKiB, 200 * kKiB, 0.2};
  std::uint32_t initial_cwnd_mtus = 10;
  double dctcp_gain = 1.0 / 16.0;
  /// Floor on the retransmission timeout (2 x smoothed RTT otherwise).
  SimTime rto_min = std::chrono::milliseconds(1);
};

enum class DropCause { overflow, link_down, no_route };

struct SimStats {
  std::uint64_t packets_injected = 0;
  std::uint64_t packets_delivered = 0;
  std::uint64_t packets_dropped = 0;
  Bytes bytes_injected = 0;
  Bytes bytes_delivered = 0;
  Bytes bytes_dropped = 0;
  Bytes bytes_in_flight = 0;
  std::uint64_t drops_overflow = 0;
  std::uint64_t drops_link = 0;
  std::uint64_t drops_no_route = 0;
  std::uint64_t flows_started = 0;
  std::uint64_t flows_completed = 0;
  std::uint64_t timeouts = 0;
  std::uint64_t ce_delivered = 0;
  std::uint64_t ece_received = 0;
  std::optional<SimTime> first_drop;
  std::optional<SimTime> last_drop;
  std::uint64_t events = 0;
  std::uint64_t trace_hash = 0;

  friend bool operator==(const SimStats&, const SimStats&) = default;
};

/// Per-flow sender and receiver state.
struct FlowState {
  transport::Flow flow;
  transport::SenderCc cc;
  transport::PathBaseline baseline;
  SimTime ack_delay{0};
  Bytes snd_una = 0;
  Bytes snd_nxt = 0;
  Bytes high_water = 0;  // cumulative distinct bytes sent so far
  Bytes window_end = 0;
  double srtt_ns = 0;
  SimTime rto_deadline{0};
  Bytes rcv_nxt = 0;
  std::uint64_t ce_delivered = 0;
  std::uint64_t ece_received = 0;
  std::uint64_t timeouts = 0;
  bool started = false;
  bool done = false;
  bool timer_armed = false;
  bool in_ring = false;
};

class Fabric;

/// Hooks for monitoring and control layered on top of the fabric.
class FabricObserver {
 public:
  virtual ~FabricObserver() = default;
  virtual void on_enqueue(std::uint32_t /*port*/, const Packet& /*pkt*/, SimTime /*now*/) {}
  virtual void on_slot(Fabric& /*fabric*/, SimTime /*now*/) {}
  virtual void on_tick(Fabric& /*fabric*/, SimTime /*now*/) {}
  virtual void on_flow_complete(const transport::FctRecord& /*record*/) {}
  virtual void on_drop(const Packet& /*pkt*/, DropCause /*cause*/, SimTime /*now*/) {}
  virtual void on_marker(std::uint32_t /*id*/, SimTime /*now*/) {}
};

/// Packet-level leaf-spine network with DCTCP senders on every host.
///
/// Hosts pull packets round-robin from their sendable flows whenever the NIC
/// is idle, so queueing happens only at switch egress ports. ACKs are
/// returned after the one-way propagation delay of the path without
/// occupying switch queues.
class Fabric final : public EventHandler {
 public:
  Fabric(FabricConfig config, std::uint64_t seed);

  Fabric(const Fabric&) = delete;
  Fabric& operator=(const Fabric&) = delete;

  const Topology& topology() const noexcept { return topology_; }
  const FabricConfig& config() const noexcept { return config_; }

  /// Registers flows; ids are assigned in call order starting at the current
  /// flow count. Zero-size flows and src == dst are rejected.
  void add_flows(std::span<const transport::FlowSpec> flows);
  void add_observer(FabricObserver* observer) { observers_.push_back(observer); }

  /// Enables slot_boundary events every `slot` and an agent_tick every
  /// `slots_per_tick` slots (dispatched right after that slot's boundary).
  void enable_slots(SimTime slot, std::uint32_t slots_per_tick);

  /// From `at`, the cable is up/down. Down: in-flight packets on it are lost,
  /// its queues are flushed, and ECMP stops using it. Throws ConfigError for
  /// an unknown cable id.
  void set_link_state(std::uint32_t cable, bool up, SimTime at);
  /// Schedules a workload_switch marker that is forwarded to observers.
  void schedule_marker(std::uint32_t id, SimTime at);

  SimStats run_until(SimTime t_end);
  /// Runs until every registered flow has completed or `limit` is reached.
  SimStats run_until_drained(SimTime limit, SimTime chunk = std::chrono::milliseconds(1));

  SimTime now() const noexcept { return engine_.now(); }
  SimStats stats() const;
  bool all_flows_done() const noexcept { return stats_.flows_completed == flows_.size(); }

  std::uint32_t port_count() const noexcept { return topology_.port_count(); }
  const queue::PortQueue& port_queue(std::uint32_t port) const { return ports_.at(port).queue; }
  void apply_ecn_config(std::uint32_t port, const queue::EcnConfig& config);

  std::size_t flow_count() const noexcept { return flows_.size(); }
  const FlowState& flow(std::uint32_t id) const { return flows_.at(id); }
  bool cable_up(std::uint32_t cable) const { return cables_.at(cable).up; }

  /// Live ECMP candidate spines for traffic from `leaf` to `dst_leaf`.
  std::vector<std::uint32_t> ecmp_candidates(std::uint32_t leaf, std::uint32_t dst_leaf) const;

  /// Throws std::logic_error if injected != delivered + dropped + in flight.
  void check_conservation() const;

  void handle(const Event& event, Engine& engine) override;

 private:
  struct PortState {
    queue::PortQueue queue;
    bool busy = false;
  };
  struct HostState {
    bool busy = false;
    std::deque<std::uint32_t> ring;
  };
  struct CableState {
    bool up = true;
    std::uint32_t epoch = 0;
  };

  void on_arrival(const Event& e);
  void on_switch_receive(std::uint32_t node, Packet pkt);
  void on_host_receive(std::uint32_t host, const Packet& pkt);
  void on_port_departure(std::uint32_t port);
  void on_host_departure(std::uint32_t host);
  void on_flow_start(std::uint32_t flow);
  void on_ack(std::uint32_t flow, const Packet& ack);
  void on_rto(std::uint32_t flow);
  void on_link_change(std::uint32_t cable, bool up);
  void on_slot_boundary();

  void start_transmission(std::uint32_t port);
  void kick_host(std::uint32_t host);
  bool can_send(const FlowState& f) const noexcept;
  void send_packet(FlowState& f);
  void enlist(FlowState& f);
  SimTime rto(const FlowState& f) const noexcept;
  void record_drop(const Packet& pkt, DropCause cause);

  FabricConfig config_;
  Topology topology_;
  Engine engine_;
  std::vector<PortState> ports_;
  std::vector<HostState> hosts_;
  std::vector<CableState> cables_;
  std::vector<FlowState> flows_;
  std::vector<FabricObserver*> observers_;
  SimStats stats_;
  Bytes queued_bytes_ = 0;
  Bytes transit_bytes_ = 0;
  SimTime slot_period_{0};
  std::uint32_t slots_per_tick_ = 0;
  std::uint64_t slot_index_ = 0;
};

}  // namespace pet::sim
