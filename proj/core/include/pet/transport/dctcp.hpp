#pragma once

#include <cstdint>
#include <optional>
#include <string_view>

#include "pet/units.hpp"

namespace pet::transport {

enum class FlowClass { mouse, elephant };

std::string_view to_string(FlowClass c) noexcept;

/// Elephant iff strictly more than 1 MiB has been (or will be) carried.
constexpr FlowClass classify_flow(Bytes cumulative_bytes) noexcept {
  return cumulative_bytes > kMiB ? FlowClass::elephant : FlowClass::mouse;
}

/// DCTCP sender congestion state. cwnd is kept in bytes.
struct SenderCc {
  double cwnd = 0;
  double alpha = 0;
  double g = 1.0 / 16.0;
  std::uint64_t window_marked = 0;
  std::uint64_t window_total = 0;
};

/// End-of-window update: alpha <- (1-g) alpha + g F, then either a
/// multiplicative cut by alpha/2 (any mark) or +1 MTU. cwnd stays >= 1 MTU.
/// Window counters are reset in the result.
SenderCc on_window_complete(std::uint64_t marked, std::uint64_t total, SenderCc cc, Bytes mtu);

/// Static description of a flow to inject.
struct FlowSpec {
  SimTime start{0};
  std::uint32_t src = 0;
  std::uint32_t dst = 0;
  Bytes size = 0;

  friend bool operator==(const FlowSpec&, const FlowSpec&) = default;
};

struct Flow {
  std::uint32_t id = 0;
  std::uint32_t src = 0;
  std::uint32_t dst = 0;
  Bytes size = 0;
  SimTime start{0};
  Bytes bytes_acked = 0;
  std::optional<SimTime> fct;
  FlowClass klass = FlowClass::mouse;
};

/// What the ideal, uncongested transfer of a flow looks like on its path.
struct PathBaseline {
  BitsPerSec bottleneck_rate = 0;
  SimTime base_rtt{0};
};

SimTime ideal_fct(Bytes size, const PathBaseline& path);

struct FctRecord {
  std::uint32_t flow_id = 0;
  std::uint32_t src = 0;
  std::uint32_t dst = 0;
  Bytes size = 0;
  SimTime start{0};
  SimTime fct{0};
  double normalized = 0;
  FlowClass klass = FlowClass::mouse;
};

/// Completed-flow record; normalized FCT = raw / (size/bottleneck + base_rtt).
/// Throws std::logic_error if the flow has not finished.
FctRecord record_fct(const Flow& flow, SimTime now, const PathBaseline& path);

}  // namespace pet::transport
