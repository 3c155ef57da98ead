#include "pet/sim/event.hpp"

#include <sstream>
#include <stdexcept>

#include "pet/errors.hpp"

namespace pet::sim {

std::string_view to_string(EventKind kind) noexcept {
  switch (kind) {
    case EventKind::packet_arrival: return "packet-arrival";
    case EventKind::packet_departure: return "packet-departure";
    case EventKind::flow_start: return "flow-start";
    case EventKind::agent_tick: return "agent-tick";
    case EventKind::link_state_change: return "link-state-change";
    case EventKind::workload_switch: return "workload-switch";
    case EventKind::slot_boundary: return "slot-boundary";
    case EventKind::ack_arrival: return "ack-arrival";
    case EventKind::rto_timer: return "rto-timer";
    case EventKind::custom: return "custom";
  }
  return "unknown";
}

std::uint64_t EventQueue::push(Event e) {
  e.seq = next_seq_++;
  heap_.push(e);
  return e.seq;
}

Event EventQueue::pop() {
  Event e = heap_.top();
  heap_.pop();
  return e;
}

std::uint64_t Engine::schedule(SimTime time, EventKind kind, std::uint32_t target,
                               std::uint32_t aux, const Packet& packet) {
  if (time < now_) {
    std::ostringstream msg;
    msg << "schedule: event " << to_string(kind) << " at " << time.count()
        << "ns is before now (" << now_.count() << "ns)";
    throw std::logic_error(msg.str());
  }
  Event e;
  e.time = time;
  e.kind = kind;
  e.target = target;
  e.aux = aux;
  e.packet = packet;
  return queue_.push(e);
}

namespace {
inline void fnv_mix(std::uint64_t& h, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) {
    h ^= (v >> (8 * i)) & 0xffU;
    h *= 0x100000001b3ULL;
  }
}
}  // namespace

const EngineStats& Engine::run_until(SimTime t_end) {
  while (!queue_.empty() && queue_.top().time <= t_end) {
    const Event e = queue_.pop();
    now_ = e.time;
    ++stats_.dispatched;
    fnv_mix(stats_.trace_hash, static_cast<std::uint64_t>(e.time.count()));
    fnv_mix(stats_.trace_hash, static_cast<std::uint64_t>(e.kind) |
                                   (static_cast<std::uint64_t>(e.target) << 8) |
                                   (static_cast<std::uint64_t>(e.aux) << 40));
    try {
      handler_->handle(e, *this);
    } catch (const std::exception& ex) {
      std::ostringstream msg;
      msg << "handler failed on event " << to_string(e.kind) << " (t=" << e.time.count()
          << "ns, seq=" << e.seq << ", target=" << e.target << "): " << ex.what();
      throw SimError(msg.str());
    }
  }
  if (t_end > now_ && t_end != SimTime::max()) now_ = t_end;
  return stats_;
}

}  // namespace pet::sim
