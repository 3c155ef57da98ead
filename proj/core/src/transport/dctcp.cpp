#include "pet/transport/dctcp.hpp"

#include <algorithm>
#include <stdexcept>
#include <string>

namespace pet::transport {

std::string_view to_string(FlowClass c) noexcept {
  return c == FlowClass::elephant ? "elephant" : "mouse";
}

SenderCc on_window_complete(std::uint64_t marked, std::uint64_t total, SenderCc cc, Bytes mtu) {
  const double mss = static_cast<double>(mtu);
  if (total == 0) return cc;
  marked = std::min(marked, total);
  const double fraction = static_cast<double>(marked) / static_cast<double>(total);
  cc.alpha = std::clamp((1.0 - cc.g) * cc.alpha + cc.g * fraction, 0.0, 1.0);
  if (marked > 0) {
    cc.cwnd = std::max(mss, cc.cwnd * (1.0 - cc.alpha / 2.0));
  } else {
    cc.cwnd = std::max(mss, cc.cwnd + mss);
  }
  cc.window_marked = 0;
  cc.window_total = 0;
  return cc;
}

SimTime ideal_fct(Bytes size, const PathBaseline& path) {
  return serialization_delay(size, path.bottleneck_rate) + path.base_rtt;
}

FctRecord record_fct(const Flow& flow, SimTime now, const PathBaseline& path) {
  if (flow.size == 0 || flow.bytes_acked < flow.size) {
    throw std::logic_error("record_fct: flow " + std::to_string(flow.id) + " is not complete");
  }
  FctRecord r;
  r.flow_id = flow.id;
  r.src = flow.src;
  r.dst = flow.dst;
  r.size = flow.size;
  r.start = flow.start;
  r.fct = flow.fct.value_or(now - flow.start);
  const auto ideal = ideal_fct(flow.size, path);
  r.normalized = static_cast<double>(r.fct.count()) / static_cast<double>(ideal.count());
  r.klass = classify_flow(flow.size);
  return r;
}

}  // namespace pet::transport
