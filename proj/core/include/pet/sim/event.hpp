#pragma once

#include <cstdint>
#include <queue>
#include <string_view>
#include <vector>

#include "pet/queue/packet.hpp"
#include "pet/units.hpp"

namespace pet::sim {

enum class EventKind : std::uint8_t {
  packet_arrival,
  packet_departure,
  flow_start,
  agent_tick,
  link_state_change,
  workload_switch,
  slot_boundary,
  ack_arrival,
  rto_timer,
  custom,
};

std::string_view to_string(EventKind kind) noexcept;

struct Event {
  SimTime time{0};
  std::uint64_t seq = 0;
  EventKind kind = EventKind::custom;
  std::uint32_t target = 0;
  std::uint32_t aux = 0;
  Packet packet{};
};

/// Min-heap over (time, seq). seq is assigned on push and is unique.
class EventQueue {
 public:
  /// Returns the sequence number assigned to the event.
  std::uint64_t push(Event e);
  const Event& top() const { return heap_.top(); }
  Event pop();
  bool empty() const noexcept { return heap_.empty(); }
  std::size_t size() const noexcept { return heap_.size(); }
  std::uint64_t next_seq() const noexcept { return next_seq_; }

 private:
  struct Later {
    bool operator()(const Event& a, const Event& b) const noexcept {
      return a.time != b.time ? a.time > b.time : a.seq > b.seq;
    }
  };
  std::priority_queue<Event, std::vector<Event>, Later> heap_;
  std::uint64_t next_seq_ = 0;
};

class Engine;

class EventHandler {
 public:
  virtual ~EventHandler() = default;
  virtual void handle(const Event& event, Engine& engine) = 0;
};

struct EngineStats {
  std::uint64_t dispatched = 0;
  std::uint64_t trace_hash = 0xcbf29ce484222325ULL;  // FNV-1a offset basis
};

/// Single-threaded discrete-event loop.
class Engine {
 public:
  explicit Engine(EventHandler& handler) : handler_(&handler) {}

  /// Throws std::logic_error when `time` is before now().
  std::uint64_t schedule(SimTime time, EventKind kind, std::uint32_t target = 0,
                         std::uint32_t aux = 0, const Packet& packet = {});

  /// Dispatch every event with time <= t_end; afterwards now() == t_end
  /// (or the later current time). Handler exceptions are rethrown as
  /// SimError naming the event.
  const EngineStats& run_until(SimTime t_end);

  SimTime now() const noexcept { return now_; }
  bool idle() const noexcept { return queue_.empty(); }
  std::size_t pending() const noexcept { return queue_.size(); }
  const EngineStats& stats() const noexcept { return stats_; }

 private:
  EventHandler* handler_;
  EventQueue queue_;
  SimTime now_{0};
  EngineStats stats_;
};

}  // namespace pet::sim
