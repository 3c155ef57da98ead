#include "pet/ncm/monitor.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_map>

#include "pet/errors.hpp"
#include "pet/transport/dctcp.hpp"

namespace pet::ncm {

double ecn_exponent(Bytes threshold, double alpha_kb, std::uint32_t max_n) {
  const double base = alpha_kb * static_cast<double>(kKiB);
  if (threshold == 0 || base <= 0) return 0.0;
  const double n = std::log2(static_cast<double>(threshold) / base);
  return std::clamp(n, 0.0, static_cast<double>(max_n));
}

NormalizedState clamp_unit(NormalizedState s) {
  for (auto& v : s) v = std::isfinite(v) ? std::clamp(v, 0.0, 1.0) : 0.0;
  return s;
}

NormalizedState normalize(const NetState& state, const NormalizationEnv& env) {
  NormalizedState s{};
  s[kQlen] = static_cast<double>(state.qlen) / static_cast<double>(env.buffer_capacity);
  s[kTxRate] = state.tx_rate / env.link_rate;
  s[kTxRateMarked] = state.tx_rate_marked / env.link_rate;
  s[kEcn] = ecn_exponent(state.ecn_current.k_min, env.alpha_kb, env.max_n) /
            static_cast<double>(env.max_n);
  const auto hosts = std::max<std::uint32_t>(1, env.host_count);
  s[kIncast] = static_cast<double>(std::min(state.d_incast, hosts)) / static_cast<double>(hosts);
  s[kRatio] = state.r_flow;
  if (env.mask_incast) s[kIncast] = 0.0;
  if (env.mask_ratio) s[kRatio] = 0.0;
  return clamp_unit(s);
}

std::uint32_t incast_degree(std::span<const FlowObservation> flows) {
  std::unordered_map<std::uint32_t, std::vector<std::uint32_t>> senders;
  for (const auto& f : flows) senders[f.dst].push_back(f.src);
  std::uint32_t best = 0;
  for (auto& [dst, srcs] : senders) {
    std::sort(srcs.begin(), srcs.end());
    const auto distinct =
        static_cast<std::uint32_t>(std::unique(srcs.begin(), srcs.end()) - srcs.begin());
    best = std::max(best, distinct);
  }
  return best;
}

double flow_ratio(std::span<const FlowObservation> flows) {
  if (flows.empty()) return 0.5;
  std::size_t mice = 0;
  for (const auto& f : flows) {
    if (transport::classify_flow(f.cumulative_bytes) == transport::FlowClass::mouse) ++mice;
  }
  return static_cast<double>(mice) / static_cast<double>(flows.size());
}

StateWindow::StateWindow(std::size_t k, SimTime slot_period) : k_(k), slot_period_(slot_period) {
  if (k == 0) throw ConfigError("ncm: window length k must be >= 1");
}

void StateWindow::push(SimTime slot_end, const NormalizedState& state) {
  slots_.push_back({slot_end, state});
}

std::size_t StateWindow::cleanup_expired(SimTime now) {
  const SimTime horizon = now - static_cast<std::int64_t>(k_) * slot_period_;
  std::size_t evicted = 0;
  while (!slots_.empty() && slots_.front().end <= horizon) {
    slots_.pop_front();
    ++evicted;
  }
  // Never expose more than k slots even if timestamps are irregular.
  while (slots_.size() > k_) {
    slots_.pop_front();
    ++evicted;
  }
  return evicted;
}

std::vector<double> StateWindow::sequence() const {
  std::vector<double> out(k_ * kStateDim, 0.0);
  const std::size_t n = std::min(k_, slots_.size());
  const std::size_t pad = k_ - n;
  for (std::size_t i = 0; i < n; ++i) {
    const auto& s = slots_[slots_.size() - n + i].state;
    std::copy(s.begin(), s.end(), out.begin() + static_cast<std::ptrdiff_t>((pad + i) * kStateDim));
  }
  return out;
}

Monitor::Monitor(Config config) : config_(config), window_(config.k, config.slot_period) {
  if (config_.slot_period <= SimTime{0}) throw ConfigError("ncm: slot period must be > 0");
  if (config_.record_budget == 0) throw ConfigError("ncm: record budget must be > 0");
}

double Monitor::memory_usage() const noexcept {
  return static_cast<double>(records_.size()) / static_cast<double>(config_.record_budget);
}

void Monitor::record(const Packet& pkt, SimTime now) {
  records_.push_back({now, pkt.flow, pkt.src, pkt.dst});
  const double usage = memory_usage();
  if (usage >= config_.memory_threshold) cleanup_expired(now, usage);
}

void Monitor::cleanup_expired(SimTime now, double memory_usage) {
  window_.cleanup_expired(now);
  if (memory_usage >= config_.memory_threshold) {
    const std::size_t evict = records_.size() / 2;
    records_.erase(records_.begin(), records_.begin() + static_cast<std::ptrdiff_t>(evict));
    ++threshold_cleanups_;
  }
}

NetState Monitor::observe_slot(const PortCounters& counters, const CumulativeBytes& cumulative,
                               SimTime now) {
  const double seconds = to_seconds(config_.slot_period);
  NetState s;
  s.qlen = counters.qlen;
  s.tx_rate = static_cast<double>(counters.tx_bytes - prev_.tx_bytes) * 8.0 / seconds;
  s.tx_rate_marked =
      static_cast<double>(counters.tx_marked_bytes - prev_.tx_marked_bytes) * 8.0 / seconds;
  s.ecn_current = counters.ecn;

  const SimTime slot_start = now - config_.slot_period;
  std::vector<AuxRecord> in_slot;
  for (const auto& r : records_) {
    if (r.t >= slot_start && r.t <= now) in_slot.push_back(r);
  }
  std::sort(in_slot.begin(), in_slot.end(),
            [](const AuxRecord& a, const AuxRecord& b) { return a.flow < b.flow; });
  in_slot.erase(std::unique(in_slot.begin(), in_slot.end(),
                            [](const AuxRecord& a, const AuxRecord& b) { return a.flow == b.flow; }),
                in_slot.end());
  std::vector<FlowObservation> flows;
  flows.reserve(in_slot.size());
  for (const auto& r : in_slot) {
    flows.push_back({r.flow, r.src, r.dst, cumulative ? cumulative(r.flow) : 0});
  }
  s.d_incast = incast_degree(flows);
  s.r_flow = flow_ratio(flows);

  prev_ = counters;
  last_ = s;
  window_.push(now, normalize(s, config_.env));

  // Records from this slot have been consumed by the computation above.
  records_.clear();
  cleanup_expired(now, memory_usage());
  return s;
}

}  // namespace pet::ncm
