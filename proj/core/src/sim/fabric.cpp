#include "pet/sim/fabric.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include "pet/errors.hpp"
#include "pet/random.hpp"

namespace pet::sim {

namespace {
constexpr std::uint32_t kHostNic = 1;
}  // namespace

Fabric::Fabric(FabricConfig config, std::uint64_t seed)
    : config_(config), topology_(config.topology), engine_(*this) {
  queue::validate(config_.initial_ecn);
  ports_.reserve(topology_.port_count());
  for (std::uint32_t p = 0; p < topology_.port_count(); ++p) {
    ports_.push_back({queue::PortQueue(config_.topology.buffer_capacity, config_.initial_ecn,
                                       derive_seed(seed, streams::kMarking, p)),
                      false});
  }
  hosts_.resize(topology_.host_count());
  cables_.resize(topology_.cable_count());
}

void Fabric::add_flows(std::span<const transport::FlowSpec> flows) {
  flows_.reserve(flows_.size() + flows.size());
  for (const auto& spec : flows) {
    if (spec.size == 0) throw ConfigError("flow: size must be > 0");
    if (spec.src == spec.dst) throw ConfigError("flow: src equals dst");
    if (spec.src >= topology_.host_count() || spec.dst >= topology_.host_count()) {
      throw ConfigError("flow: host id out of range");
    }
    FlowState f;
    f.flow.id = static_cast<std::uint32_t>(flows_.size());
    f.flow.src = spec.src;
    f.flow.dst = spec.dst;
    f.flow.size = spec.size;
    f.flow.start = spec.start;
    f.flow.klass = transport::classify_flow(spec.size);
    f.baseline = topology_.baseline(spec.src, spec.dst);
    f.ack_delay = topology_.one_way_propagation(spec.dst, spec.src);
    flows_.push_back(f);
    engine_.schedule(std::max(spec.start, engine_.now()), EventKind::flow_start, f.flow.id);
  }
}

void Fabric::enable_slots(SimTime slot, std::uint32_t slots_per_tick) {
  if (slot <= SimTime{0} || slots_per_tick == 0) {
    throw ConfigError("fabric: slot period and slots_per_tick must be positive");
  }
  slot_period_ = slot;
  slots_per_tick_ = slots_per_tick;
  slot_index_ = 0;
  engine_.schedule(engine_.now() + slot, EventKind::slot_boundary);
}

void Fabric::set_link_state(std::uint32_t cable, bool up, SimTime at) {
  if (cable >= cables_.size()) {
    throw ConfigError("link: unknown link id " + std::to_string(cable));
  }
  engine_.schedule(at, EventKind::link_state_change, cable, up ? 1 : 0);
}

void Fabric::schedule_marker(std::uint32_t id, SimTime at) {
  engine_.schedule(at, EventKind::workload_switch, id);
}

SimStats Fabric::run_until(SimTime t_end) {
  engine_.run_until(t_end);
  return stats();
}

SimStats Fabric::run_until_drained(SimTime limit, SimTime chunk) {
  while (!all_flows_done() && engine_.now() < limit) {
    engine_.run_until(std::min(limit, engine_.now() + chunk));
  }
  return stats();
}

SimStats Fabric::stats() const {
  SimStats s = stats_;
  s.bytes_in_flight = queued_bytes_ + transit_bytes_;
  s.events = engine_.stats().dispatched;
  s.trace_hash = engine_.stats().trace_hash;
  return s;
}

void Fabric::apply_ecn_config(std::uint32_t port, const queue::EcnConfig& config) {
  ports_.at(port).queue.apply_ecn_config(config, engine_.now());
}

std::vector<std::uint32_t> Fabric::ecmp_candidates(std::uint32_t leaf,
                                                   std::uint32_t dst_leaf) const {
  std::vector<std::uint32_t> out;
  for (std::uint32_t s = 0; s < topology_.config().n_spine; ++s) {
    if (cables_[topology_.fabric_cable(leaf, s)].up &&
        cables_[topology_.fabric_cable(dst_leaf, s)].up) {
      out.push_back(s);
    }
  }
  return out;
}

void Fabric::check_conservation() const {
  const auto s = stats();
  if (s.bytes_injected != s.bytes_delivered + s.bytes_dropped + s.bytes_in_flight) {
    std::ostringstream msg;
    msg << "byte conservation violated: injected=" << s.bytes_injected
        << " delivered=" << s.bytes_delivered << " dropped=" << s.bytes_dropped
        << " in_flight=" << s.bytes_in_flight;
    throw std::logic_error(msg.str());
  }
}

void Fabric::handle(const Event& e, Engine& /*engine*/) {
  switch (e.kind) {
    case EventKind::packet_arrival: on_arrival(e); break;
    case EventKind::packet_departure:
      if (e.aux == kHostNic) {
        on_host_departure(e.target);
      } else {
        on_port_departure(e.target);
      }
      break;
    case EventKind::flow_start: on_flow_start(e.target); break;
    case EventKind::ack_arrival: on_ack(e.target, e.packet); break;
    case EventKind::rto_timer: on_rto(e.target); break;
    case EventKind::link_state_change: on_link_change(e.target, e.aux != 0); break;
    case EventKind::slot_boundary: on_slot_boundary(); break;
    case EventKind::agent_tick:
      for (auto* o : observers_) o->on_tick(*this, engine_.now());
      break;
    case EventKind::workload_switch:
      for (auto* o : observers_) o->on_marker(e.target, engine_.now());
      break;
    case EventKind::custom: break;
  }
}

void Fabric::record_drop(const Packet& pkt, DropCause cause) {
  ++stats_.packets_dropped;
  stats_.bytes_dropped += pkt.size;
  switch (cause) {
    case DropCause::overflow: ++stats_.drops_overflow; break;
    case DropCause::link_down: ++stats_.drops_link; break;
    case DropCause::no_route: ++stats_.drops_no_route; break;
  }
  const auto now = engine_.now();
  if (!stats_.first_drop) stats_.first_drop = now;
  stats_.last_drop = now;
  for (auto* o : observers_) o->on_drop(pkt, cause, now);
}

void Fabric::on_arrival(const Event& e) {
  transit_bytes_ -= e.packet.size;
  if (e.packet.link_epoch != cables_[e.aux].epoch) {
    record_drop(e.packet, DropCause::link_down);
    return;
  }
  if (topology_.is_host(e.target)) {
    on_host_receive(e.target, e.packet);
  } else {
    on_switch_receive(e.target, e.packet);
  }
}

void Fabric::on_switch_receive(std::uint32_t node, Packet pkt) {
  const auto dst_leaf = topology_.leaf_of_host(pkt.dst);
  std::uint32_t port = 0;
  if (topology_.is_leaf(node)) {
    const auto leaf = node - topology_.host_count();
    if (dst_leaf == leaf) {
      port = topology_.leaf_host_port(leaf, pkt.dst);
    } else {
      std::uint32_t candidates[64];
      std::uint32_t n = 0;
      const auto spines = std::min<std::uint32_t>(topology_.config().n_spine, 64);
      for (std::uint32_t s = 0; s < spines; ++s) {
        if (cables_[topology_.fabric_cable(leaf, s)].up &&
            cables_[topology_.fabric_cable(dst_leaf, s)].up) {
          candidates[n++] = s;
        }
      }
      if (n == 0) {
        record_drop(pkt, DropCause::no_route);
        return;
      }
      const auto spine = ecmp_select({pkt.flow, pkt.src, pkt.dst}, {candidates, n});
      port = topology_.leaf_uplink_port(leaf, spine);
    }
  } else {
    const auto spine = node - topology_.host_count() - topology_.config().n_leaf;
    port = topology_.spine_port(spine, dst_leaf);
  }

  const auto& info = topology_.port(port);
  if (!cables_[info.cable].up) {
    record_drop(pkt, DropCause::no_route);
    return;
  }
  auto& ps = ports_[port];
  const auto outcome = ps.queue.enqueue(pkt, engine_.now());
  if (outcome == queue::EnqueueOutcome::dropped) {
    record_drop(pkt, DropCause::overflow);
    return;
  }
  queued_bytes_ += pkt.size;
  for (auto* o : observers_) o->on_enqueue(port, pkt, engine_.now());
  if (!ps.busy) start_transmission(port);
}

void Fabric::start_transmission(std::uint32_t port) {
  auto& ps = ports_[port];
  const auto& info = topology_.port(port);
  auto pkt = ps.queue.dequeue(engine_.now());
  if (!pkt) return;
  queued_bytes_ -= pkt->size;
  ps.busy = true;
  const auto ser = serialization_delay(pkt->size, info.link.rate);
  const auto now = engine_.now();
  engine_.schedule(now + ser, EventKind::packet_departure, port, 0);
  pkt->link_epoch = cables_[info.cable].epoch;
  transit_bytes_ += pkt->size;
  engine_.schedule(now + ser + info.link.delay, EventKind::packet_arrival, info.peer_node,
                   info.cable, *pkt);
}

void Fabric::on_port_departure(std::uint32_t port) {
  auto& ps = ports_[port];
  ps.busy = false;
  if (!ps.queue.empty() && cables_[topology_.port(port).cable].up) start_transmission(port);
}

void Fabric::on_host_receive(std::uint32_t /*host*/, const Packet& pkt) {
  ++stats_.packets_delivered;
  stats_.bytes_delivered += pkt.size;
  auto& f = flows_[pkt.flow];
  if (pkt.ce) {
    ++f.ce_delivered;
    ++stats_.ce_delivered;
  }
  if (pkt.seq == f.rcv_nxt) f.rcv_nxt += pkt.size;
  Packet ack;
  ack.flow = pkt.flow;
  ack.src = pkt.dst;
  ack.dst = pkt.src;
  ack.seq = f.rcv_nxt;
  ack.ce = pkt.ce;
  ack.sent_ns = pkt.sent_ns;
  engine_.schedule(engine_.now() + f.ack_delay, EventKind::ack_arrival, pkt.flow, 0, ack);
}

void Fabric::on_flow_start(std::uint32_t id) {
  auto& f = flows_[id];
  f.started = true;
  ++stats_.flows_started;
  const double mss = static_cast<double>(config_.topology.mtu);
  f.cc.cwnd = mss * std::max<std::uint32_t>(1, config_.initial_cwnd_mtus);
  f.cc.g = config_.dctcp_gain;
  f.srtt_ns = static_cast<double>(f.baseline.base_rtt.count());
  enlist(f);
  kick_host(f.flow.src);
}

SimTime Fabric::rto(const FlowState& f) const noexcept {
  const auto twice = SimTime{static_cast<std::int64_t>(2.0 * f.srtt_ns)};
  return std::max(twice, config_.rto_min);
}

bool Fabric::can_send(const FlowState& f) const noexcept {
  if (f.done || !f.started || f.snd_nxt >= f.flow.size) return false;
  const Bytes inflight = f.snd_nxt - f.snd_una;
  const Bytes next = std::min<Bytes>(config_.topology.mtu, f.flow.size - f.snd_nxt);
  return static_cast<double>(inflight + next) <= f.cc.cwnd || inflight == 0;
}

void Fabric::enlist(FlowState& f) {
  if (!f.in_ring && can_send(f)) {
    f.in_ring = true;
    hosts_[f.flow.src].ring.push_back(f.flow.id);
  }
}

void Fabric::kick_host(std::uint32_t host) {
  auto& h = hosts_[host];
  if (h.busy || !cables_[host].up) return;
  while (!h.ring.empty()) {
    const auto id = h.ring.front();
    h.ring.pop_front();
    auto& f = flows_[id];
    if (can_send(f)) {
      send_packet(f);
      h.ring.push_back(id);
      return;
    }
    f.in_ring = false;
  }
}

void Fabric::send_packet(FlowState& f) {
  const auto now = engine_.now();
  const auto host = f.flow.src;
  Packet pkt;
  pkt.flow = f.flow.id;
  pkt.src = f.flow.src;
  pkt.dst = f.flow.dst;
  pkt.seq = f.snd_nxt;
  pkt.size = static_cast<std::uint32_t>(std::min<Bytes>(config_.topology.mtu, f.flow.size - f.snd_nxt));
  pkt.sent_ns = now.count();
  if (f.snd_nxt == f.snd_una) f.rto_deadline = now + rto(f);
  f.snd_nxt += pkt.size;
  f.high_water = std::max(f.high_water, f.snd_nxt);
  ++stats_.packets_injected;
  stats_.bytes_injected += pkt.size;

  hosts_[host].busy = true;
  const auto& link = topology_.config().host_link;
  const auto ser = serialization_delay(pkt.size, link.rate);
  engine_.schedule(now + ser, EventKind::packet_departure, host, kHostNic);
  pkt.link_epoch = cables_[host].epoch;
  transit_bytes_ += pkt.size;
  engine_.schedule(now + ser + link.delay, EventKind::packet_arrival,
                   topology_.leaf_node(topology_.leaf_of_host(host)), host, pkt);

  if (!f.timer_armed) {
    f.timer_armed = true;
    engine_.schedule(f.rto_deadline, EventKind::rto_timer, f.flow.id);
  }
}

void Fabric::on_host_departure(std::uint32_t host) {
  hosts_[host].busy = false;
  kick_host(host);
}

void Fabric::on_ack(std::uint32_t id, const Packet& ack) {
  auto& f = flows_[id];
  if (f.done) return;
  const auto now = engine_.now();
  if (ack.ce) {
    ++f.ece_received;
    ++stats_.ece_received;
  }
  const double sample = static_cast<double>(now.count() - ack.sent_ns);
  f.srtt_ns = 0.875 * f.srtt_ns + 0.125 * sample;

  ++f.cc.window_total;
  if (ack.ce) ++f.cc.window_marked;

  if (ack.seq > f.snd_una) {
    f.snd_una = ack.seq;
    f.snd_nxt = std::max(f.snd_nxt, f.snd_una);
    f.flow.bytes_acked = f.snd_una;
    f.rto_deadline = now + rto(f);
    if (f.snd_una >= f.window_end) {
      f.cc = transport::on_window_complete(f.cc.window_marked, f.cc.window_total, f.cc,
                                           config_.topology.mtu);
      f.window_end = f.snd_nxt;
    }
  }

  if (f.snd_una >= f.flow.size) {
    f.done = true;
    f.flow.fct = now - f.flow.start;
    ++stats_.flows_completed;
    const auto record = transport::record_fct(f.flow, now, f.baseline);
    for (auto* o : observers_) o->on_flow_complete(record);
    return;
  }
  enlist(f);
  kick_host(f.flow.src);
}

void Fabric::on_rto(std::uint32_t id) {
  auto& f = flows_[id];
  if (f.done) {
    f.timer_armed = false;
    return;
  }
  const auto now = engine_.now();
  if (now < f.rto_deadline) {
    engine_.schedule(f.rto_deadline, EventKind::rto_timer, id);
    return;
  }
  if (f.snd_una < f.snd_nxt) {
    ++f.timeouts;
    ++stats_.timeouts;
    f.snd_nxt = f.snd_una;
    f.cc.cwnd = std::max(static_cast<double>(config_.topology.mtu), f.cc.cwnd / 2.0);
    f.cc.window_marked = 0;
    f.cc.window_total = 0;
    f.window_end = f.snd_una;
    f.rto_deadline = now + rto(f);
    engine_.schedule(f.rto_deadline, EventKind::rto_timer, id);
    enlist(f);
    kick_host(f.flow.src);
    return;
  }
  f.timer_armed = false;
}

void Fabric::on_link_change(std::uint32_t cable, bool up) {
  auto& c = cables_[cable];
  if (c.up == up) return;
  c.up = up;
  const auto now = engine_.now();
  const auto ports = topology_.ports_on_cable(cable);
  if (!up) {
    ++c.epoch;  // invalidates everything currently on the wire
    for (auto p : ports) {
      for (const auto& pkt : ports_[p].queue.flush(now)) {
        queued_bytes_ -= pkt.size;
        record_drop(pkt, DropCause::link_down);
      }
    }
  } else {
    for (auto p : ports) {
      if (!ports_[p].busy && !ports_[p].queue.empty()) start_transmission(p);
    }
    if (cable < topology_.host_count()) kick_host(cable);
  }
}

void Fabric::on_slot_boundary() {
  const auto now = engine_.now();
  for (auto* o : observers_) o->on_slot(*this, now);
  ++slot_index_;
  if (slot_index_ % slots_per_tick_ == 0) engine_.schedule(now, EventKind::agent_tick);
  engine_.schedule(now + slot_period_, EventKind::slot_boundary);
}

}  // namespace pet::sim
