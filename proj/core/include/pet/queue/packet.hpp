#pragma once

#include <cstdint>

#include "pet/units.hpp"

namespace pet {

/// A data segment in flight. Headers are not modelled; size is payload bytes.
struct Packet {
  std::uint32_t flow = 0;
  std::uint32_t src = 0;
  std::uint32_t dst = 0;
  std::uint32_t size = 0;
  std::uint64_t seq = 0;        // byte offset of the first payload byte
  std::int64_t sent_ns = 0;     // sender timestamp, echoed by the ACK
  std::uint32_t link_epoch = 0; // epoch of the cable the packet is travelling on
  bool ce = false;              // congestion experienced
};

}  // namespace pet
