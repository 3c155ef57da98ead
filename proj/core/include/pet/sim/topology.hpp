#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "pet/transport/dctcp.hpp"
#include "pet/units.hpp"

namespace pet::sim {

struct LinkSpec {
  BitsPerSec rate = 0;
  SimTime delay{0};
};

/// Two-tier leaf-spine fabric. Defaults are the desk-scale setting:
/// 2 spines, 4 leaves, 8 hosts per leaf, 10G host links, 40G fabric links,
/// 4 us per hop, 300 KiB per port.
struct TopologyConfig {
  std::uint32_t n_spine = 2;
  std::uint32_t n_leaf = 4;
  std::uint32_t hosts_per_leaf = 8;
  LinkSpec host_link{10'000'000'000ULL, std::chrono::microseconds(4)};
  LinkSpec fabric_link{40'000'000'000ULL, std::chrono::microseconds(4)};
  Bytes buffer_capacity = 300 * kKiB;
  Bytes mtu = 1000;
};

void validate(const TopologyConfig& config);

struct PortInfo {
  std::uint32_t switch_node = 0;
  std::uint32_t local_index = 0;
  std::uint32_t peer_node = 0;
  std::uint32_t cable = 0;
  LinkSpec link;
  bool host_facing = false;
};

struct FlowKey {
  std::uint32_t flow = 0;
  std::uint32_t src = 0;
  std::uint32_t dst = 0;
};

/// Deterministic ECMP pick: a pure function of the flow key and the
/// (ordered) candidate set. Candidates must be non-empty.
std::uint32_t ecmp_select(const FlowKey& key, std::span<const std::uint32_t> candidates) noexcept;

/// Node, port and cable numbering for a leaf-spine fabric.
///
/// Nodes: hosts [0,H), leaves [H,H+L), spines [H+L,H+L+S).
/// Switch egress ports: each leaf has hosts_per_leaf host-facing ports then
/// one uplink per spine; spines follow with one downlink per leaf.
/// Cables: host cable h joins host h to its leaf; fabric cable H + l*S + s
/// joins leaf l and spine s.
class Topology {
 public:
  explicit Topology(TopologyConfig config);

  const TopologyConfig& config() const noexcept { return config_; }
  std::uint32_t host_count() const noexcept { return hosts_; }
  std::uint32_t node_count() const noexcept { return hosts_ + config_.n_leaf + config_.n_spine; }
  std::uint32_t port_count() const noexcept { return static_cast<std::uint32_t>(ports_.size()); }
  std::uint32_t cable_count() const noexcept { return hosts_ + config_.n_leaf * config_.n_spine; }

  bool is_host(std::uint32_t node) const noexcept { return node < hosts_; }
  bool is_leaf(std::uint32_t node) const noexcept {
    return node >= hosts_ && node < hosts_ + config_.n_leaf;
  }
  std::uint32_t leaf_node(std::uint32_t leaf) const noexcept { return hosts_ + leaf; }
  std::uint32_t spine_node(std::uint32_t spine) const noexcept {
    return hosts_ + config_.n_leaf + spine;
  }
  std::uint32_t leaf_of_host(std::uint32_t host) const noexcept {
    return host / config_.hosts_per_leaf;
  }

  std::uint32_t leaf_host_port(std::uint32_t leaf, std::uint32_t host) const noexcept;
  std::uint32_t leaf_uplink_port(std::uint32_t leaf, std::uint32_t spine) const noexcept;
  std::uint32_t spine_port(std::uint32_t spine, std::uint32_t leaf) const noexcept;
  std::uint32_t fabric_cable(std::uint32_t leaf, std::uint32_t spine) const noexcept {
    return hosts_ + leaf * config_.n_spine + spine;
  }
  std::vector<std::uint32_t> fabric_cables() const;
  /// Switch egress ports carried by a cable (one for host cables, two for fabric cables).
  std::vector<std::uint32_t> ports_on_cable(std::uint32_t cable) const;

  const PortInfo& port(std::uint32_t index) const { return ports_.at(index); }
  const std::vector<PortInfo>& ports() const noexcept { return ports_; }

  /// Number of links a packet crosses between two hosts (2 or 4).
  std::uint32_t hop_count(std::uint32_t src, std::uint32_t dst) const noexcept;
  SimTime one_way_propagation(std::uint32_t src, std::uint32_t dst) const noexcept;
  /// Round-trip propagation plus one-MTU store-and-forward on each forward hop.
  SimTime base_rtt(std::uint32_t src, std::uint32_t dst) const noexcept;
  transport::PathBaseline baseline(std::uint32_t src, std::uint32_t dst) const noexcept;
  /// Largest base RTT between any two hosts.
  SimTime max_base_rtt() const noexcept;

 private:
  TopologyConfig config_;
  std::uint32_t hosts_;
  std::vector<PortInfo> ports_;
};

}  // namespace pet::sim
