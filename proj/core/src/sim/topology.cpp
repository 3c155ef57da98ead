#include "pet/sim/topology.hpp"

#include <algorithm>

#include "pet/errors.hpp"
#include "pet/random.hpp"

namespace pet::sim {

void validate(const TopologyConfig& c) {
  if (c.n_spine < 1 || c.n_leaf < 1 || c.hosts_per_leaf < 1) {
    throw ConfigError("topology: n_spine, n_leaf and hosts_per_leaf must be >= 1");
  }
  if (c.n_leaf * c.hosts_per_leaf < 2) throw ConfigError("topology: need at least two hosts");
  if (c.host_link.rate == 0 || c.fabric_link.rate == 0) {
    throw ConfigError("topology: link rates must be > 0");
  }
  if (c.host_link.delay <= SimTime{0} || c.fabric_link.delay <= SimTime{0}) {
    throw ConfigError("topology: link delays must be > 0");
  }
  if (c.buffer_capacity < c.mtu) throw ConfigError("topology: buffer smaller than one MTU");
  if (c.mtu == 0) throw ConfigError("topology: mtu must be > 0");
}

std::uint32_t ecmp_select(const FlowKey& key, std::span<const std::uint32_t> candidates) noexcept {
  const std::uint64_t h =
      splitmix64((static_cast<std::uint64_t>(key.flow) << 32) ^
                 splitmix64((static_cast<std::uint64_t>(key.src) << 32) | key.dst));
  return candidates[h % candidates.size()];
}

Topology::Topology(TopologyConfig config)
    : config_(config), hosts_(config.n_leaf * config.hosts_per_leaf) {
  validate(config_);
  const auto L = config_.n_leaf;
  const auto S = config_.n_spine;
  const auto hpl = config_.hosts_per_leaf;
  ports_.reserve(L * (hpl + S) + S * L);
  for (std::uint32_t l = 0; l < L; ++l) {
    for (std::uint32_t i = 0; i < hpl; ++i) {
      const auto host = l * hpl + i;
      ports_.push_back({leaf_node(l), i, host, host, config_.host_link, true});
    }
    for (std::uint32_t s = 0; s < S; ++s) {
      ports_.push_back({leaf_node(l), hpl + s, spine_node(s), fabric_cable(l, s),
                        config_.fabric_link, false});
    }
  }
  for (std::uint32_t s = 0; s < S; ++s) {
    for (std::uint32_t l = 0; l < L; ++l) {
      ports_.push_back({spine_node(s), l, leaf_node(l), fabric_cable(l, s), config_.fabric_link,
                        false});
    }
  }
}

std::uint32_t Topology::leaf_host_port(std::uint32_t leaf, std::uint32_t host) const noexcept {
  return leaf * (config_.hosts_per_leaf + config_.n_spine) + (host % config_.hosts_per_leaf);
}

std::uint32_t Topology::leaf_uplink_port(std::uint32_t leaf, std::uint32_t spine) const noexcept {
  return leaf * (config_.hosts_per_leaf + config_.n_spine) + config_.hosts_per_leaf + spine;
}

std::uint32_t Topology::spine_port(std::uint32_t spine, std::uint32_t leaf) const noexcept {
  return config_.n_leaf * (config_.hosts_per_leaf + config_.n_spine) + spine * config_.n_leaf +
         leaf;
}

std::vector<std::uint32_t> Topology::fabric_cables() const {
  std::vector<std::uint32_t> out;
  for (std::uint32_t c = hosts_; c < cable_count(); ++c) out.push_back(c);
  return out;
}

std::vector<std::uint32_t> Topology::ports_on_cable(std::uint32_t cable) const {
  std::vector<std::uint32_t> out;
  if (cable < hosts_) {
    out.push_back(leaf_host_port(leaf_of_host(cable), cable));
  } else if (cable < cable_count()) {
    const auto idx = cable - hosts_;
    const auto leaf = idx / config_.n_spine;
    const auto spine = idx % config_.n_spine;
    out.push_back(leaf_uplink_port(leaf, spine));
    out.push_back(spine_port(spine, leaf));
  }
  return out;
}

std::uint32_t Topology::hop_count(std::uint32_t src, std::uint32_t dst) const noexcept {
  return leaf_of_host(src) == leaf_of_host(dst) ? 2 : 4;
}

SimTime Topology::one_way_propagation(std::uint32_t src, std::uint32_t dst) const noexcept {
  SimTime t = 2 * config_.host_link.delay;
  if (hop_count(src, dst) == 4) t += 2 * config_.fabric_link.delay;
  return t;
}

SimTime Topology::base_rtt(std::uint32_t src, std::uint32_t dst) const noexcept {
  SimTime ser = 2 * serialization_delay(config_.mtu, config_.host_link.rate);
  if (hop_count(src, dst) == 4) ser += 2 * serialization_delay(config_.mtu, config_.fabric_link.rate);
  return 2 * one_way_propagation(src, dst) + ser;
}

transport::PathBaseline Topology::baseline(std::uint32_t src, std::uint32_t dst) const noexcept {
  BitsPerSec rate = config_.host_link.rate;
  if (hop_count(src, dst) == 4) rate = std::min(rate, config_.fabric_link.rate);
  return {rate, base_rtt(src, dst)};
}

SimTime Topology::max_base_rtt() const noexcept {
  if (config_.n_leaf > 1) return base_rtt(0, config_.hosts_per_leaf);
  return base_rtt(0, 1);
}

}  // namespace pet::sim
