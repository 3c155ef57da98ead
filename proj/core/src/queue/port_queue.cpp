#include "pet/queue/port_queue.hpp"

#include <algorithm>

#include "pet/random.hpp"

namespace pet::queue {

PortQueue::PortQueue(Bytes capacity, EcnConfig config, std::uint64_t seed)
    : capacity_(capacity), rng_(seed) {
  apply_ecn_config(config, SimTime{0});
  counters_.config_applications = 0;
}

void PortQueue::advance_area(SimTime now) noexcept {
  if (now > area_at_) {
    area_ += static_cast<long double>(qlen_bytes_) * static_cast<long double>((now - area_at_).count());
    area_at_ = now;
  }
}

long double PortQueue::qlen_area(SimTime now) const noexcept {
  if (now <= area_at_) return area_;
  return area_ + static_cast<long double>(qlen_bytes_) *
                     static_cast<long double>((now - area_at_).count());
}

EnqueueOutcome PortQueue::enqueue(Packet pkt, SimTime now) {
  if (pkt.size > capacity_ - qlen_bytes_) {
    ++counters_.dropped;
    counters_.dropped_bytes += pkt.size;
    return EnqueueOutcome::dropped;
  }
  advance_area(now);
  qlen_bytes_ += pkt.size;
  ++counters_.enq;

  const double p = mark_probability(qlen_bytes_, config_);
  bool mark = false;
  if (p >= 1.0) {
    mark = true;
  } else if (p > 0.0) {
    mark = uniform01(rng_) < p;
  }
  if (mark) {
    pkt.ce = true;
    ++counters_.marked;
  }
  packets_.push_back(pkt);
  return mark ? EnqueueOutcome::accepted_marked : EnqueueOutcome::accepted;
}

std::optional<Packet> PortQueue::dequeue(SimTime now) {
  if (packets_.empty()) return std::nullopt;
  advance_area(now);
  Packet pkt = packets_.front();
  packets_.pop_front();
  qlen_bytes_ -= pkt.size;
  ++counters_.deq;
  counters_.tx_bytes += pkt.size;
  if (pkt.ce) counters_.tx_marked_bytes += pkt.size;
  return pkt;
}

void PortQueue::apply_ecn_config(const EcnConfig& config, SimTime /*now*/) {
  validate(config);
  EcnConfig effective = config;
  if (effective.k_max > capacity_) {
    effective.k_max = capacity_;
    effective.k_min = std::min(effective.k_min, capacity_ - 1);
    ++counters_.clamp_warnings;
  }
  config_ = effective;
  ++counters_.config_applications;
}

std::vector<Packet> PortQueue::flush(SimTime now) {
  advance_area(now);
  std::vector<Packet> out(packets_.begin(), packets_.end());
  for (const Packet& pkt : out) counters_.dropped_bytes += pkt.size;
  counters_.dropped += out.size();
  packets_.clear();
  qlen_bytes_ = 0;
  return out;
}

}  // namespace pet::queue
