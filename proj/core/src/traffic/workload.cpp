#include "pet/traffic/workload.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "pet/errors.hpp"
#include "pet/random.hpp"

namespace pet::traffic {

FlowSizeCdf::FlowSizeCdf(std::vector<CdfPoint> points) : points_(std::move(points)) {
  if (points_.size() < 2) throw ConfigError("cdf: need at least two points");
  if (points_.front().probability < 0.0) throw ConfigError("cdf: first probability is negative");
  if (points_.back().probability != 1.0) throw ConfigError("cdf: last probability must be 1");
  if (points_.front().size_bytes <= 0.0) throw ConfigError("cdf: sizes must be positive");
  for (std::size_t i = 1; i < points_.size(); ++i) {
    if (!(points_[i].size_bytes > points_[i - 1].size_bytes) ||
        !(points_[i].probability > points_[i - 1].probability)) {
      throw ConfigError("cdf: points must be strictly increasing (point " + std::to_string(i) + ")");
    }
  }
}

Bytes FlowSizeCdf::sample(double u) const {
  u = std::clamp(u, 0.0, 1.0);
  double size = points_.front().size_bytes;
  if (u > points_.front().probability) {
    auto it = std::lower_bound(points_.begin(), points_.end(), u,
                               [](const CdfPoint& p, double v) { return p.probability < v; });
    if (it == points_.end()) {
      size = points_.back().size_bytes;
    } else {
      const auto& hi = *it;
      const auto& lo = *(it - 1);
      const double frac = (u - lo.probability) / (hi.probability - lo.probability);
      size = lo.size_bytes + frac * (hi.size_bytes - lo.size_bytes);
    }
  }
  return std::max<Bytes>(1, static_cast<Bytes>(std::llround(size)));
}

double FlowSizeCdf::mean_bytes() const {
  double mean = points_.front().probability * points_.front().size_bytes;
  for (std::size_t i = 1; i < points_.size(); ++i) {
    const double mass = points_[i].probability - points_[i - 1].probability;
    mean += mass * 0.5 * (points_[i].size_bytes + points_[i - 1].size_bytes);
  }
  return mean;
}

double FlowSizeCdf::cdf_at(double size_bytes) const {
  if (size_bytes < points_.front().size_bytes) return 0.0;
  if (size_bytes >= points_.back().size_bytes) return 1.0;
  auto it = std::upper_bound(points_.begin(), points_.end(), size_bytes,
                             [](double v, const CdfPoint& p) { return v < p.size_bytes; });
  const auto& hi = *it;
  const auto& lo = *(it - 1);
  const double frac = (size_bytes - lo.size_bytes) / (hi.size_bytes - lo.size_bytes);
  return lo.probability + frac * (hi.probability - lo.probability);
}

FlowSizeCdf parse_cdf(std::istream& in) {
  std::vector<CdfPoint> pts;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    std::istringstream ls(line);
    CdfPoint p;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    if (!(ls >> p.size_bytes)) throw ParseError("cdf: expected a numeric flow size", lineno);
    if (!(ls >> p.probability)) throw ParseError("cdf: expected 'size_bytes probability'", lineno);
    std::string extra;
    if (ls >> extra) throw ParseError("cdf: trailing field '" + extra + "'", lineno);
    pts.push_back(p);
  }
  return FlowSizeCdf(std::move(pts));
}

FlowSizeCdf load_cdf_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open cdf file '" + path + "'");
  return parse_cdf(in);
}

void write_cdf(std::ostream& out, const FlowSizeCdf& cdf) {
  for (const auto& p : cdf.points()) out << p.size_bytes << ' ' << p.probability << '\n';
}

FlowSizeCdf builtin_web_search_cdf() {
  return FlowSizeCdf({{1000, 0},       {10000, 0.15},   {20000, 0.2},    {30000, 0.3},
                      {50000, 0.4},    {80000, 0.53},   {200000, 0.6},   {1000000, 0.7},
                      {2000000, 0.8},  {5000000, 0.9},  {10000000, 0.97}, {30000000, 1}});
}

FlowSizeCdf builtin_data_mining_cdf() {
  return FlowSizeCdf({{100, 0},       {180, 0.1},      {216, 0.2},       {560, 0.3},
                      {900, 0.4},     {1100, 0.5},     {1870, 0.6},      {3160, 0.7},
                      {10000, 0.8},   {400000, 0.9},   {3160000, 0.95},  {100000000, 1}});
}

std::string to_string(WorkloadName name) {
  switch (name) {
    case WorkloadName::web_search: return "web_search";
    case WorkloadName::data_mining: return "data_mining";
    case WorkloadName::custom: return "custom";
  }
  return "custom";
}

WorkloadName workload_name_from_string(const std::string& s) {
  if (s == "web_search") return WorkloadName::web_search;
  if (s == "data_mining") return WorkloadName::data_mining;
  if (s == "custom") return WorkloadName::custom;
  throw ConfigError("unknown workload name '" + s + "'");
}

void validate(const WorkloadSpec& spec) {
  if (spec.cdf.points().empty()) throw ConfigError("workload: empty cdf");
  if (!(spec.load > 0.0 && spec.load < 1.0)) throw ConfigError("workload: load must lie in (0,1)");
  if (spec.incast) {
    if (spec.incast->fan_in < 2) throw ConfigError("workload: incast fan_in must be >= 2");
    if (spec.incast->period <= SimTime{0}) throw ConfigError("workload: incast period must be > 0");
    if (spec.incast->response_size == 0) throw ConfigError("workload: incast response_size must be > 0");
  }
}

double arrival_rate(double load, BitsPerSec link_rate, double mean_size_bytes) {
  return load * static_cast<double>(link_rate) / (8.0 * mean_size_bytes);
}

SimTime next_arrival(std::mt19937_64& rng, double load, BitsPerSec link_rate,
                     double mean_size_bytes) {
  const double lambda = arrival_rate(load, link_rate, mean_size_bytes);
  const double u = uniform01(rng);
  const double seconds = -std::log1p(-u) / lambda;
  if (!std::isfinite(seconds) || seconds > 1e9) return SimTime::max();
  return SimTime{static_cast<std::int64_t>(std::llround(seconds * 1e9))};
}

std::vector<transport::FlowSpec> make_incast_burst(std::uint32_t fan_in, std::uint32_t receiver,
                                                   Bytes response_size, SimTime at,
                                                   std::uint32_t host_count,
                                                   std::mt19937_64& rng) {
  if (fan_in < 2) throw ConfigError("incast: fan_in must be >= 2");
  if (receiver >= host_count) throw ConfigError("incast: receiver out of range");
  if (fan_in > host_count - 1) {
    throw ConfigError("incast: fan_in " + std::to_string(fan_in) + " exceeds the " +
                      std::to_string(host_count - 1) + " available senders");
  }
  if (response_size == 0) throw ConfigError("incast: response_size must be positive");
  std::vector<std::uint32_t> candidates;
  candidates.reserve(host_count - 1);
  for (std::uint32_t h = 0; h < host_count; ++h) {
    if (h != receiver) candidates.push_back(h);
  }
  // partial Fisher-Yates
  for (std::uint32_t i = 0; i < fan_in; ++i) {
    const auto j = i + uniform_index(rng, candidates.size() - i);
    std::swap(candidates[i], candidates[j]);
  }
  std::vector<transport::FlowSpec> flows;
  flows.reserve(fan_in);
  for (std::uint32_t i = 0; i < fan_in; ++i) {
    flows.push_back({at, candidates[i], receiver, response_size});
  }
  std::sort(flows.begin(), flows.end(),
            [](const auto& a, const auto& b) { return a.src < b.src; });
  return flows;
}

TrafficGenerator::TrafficGenerator(WorkloadSpec initial, std::uint32_t host_count,
                                   BitsPerSec host_rate, std::uint64_t seed)
    : host_count_(host_count), host_rate_(host_rate), seed_(seed) {
  if (host_count < 2) throw ConfigError("traffic: need at least two hosts");
  validate(initial);
  regimes_.push_back({SimTime{0}, std::move(initial)});
}

void TrafficGenerator::switch_workload(const WorkloadSpec& to, SimTime at) {
  validate(to);
  Regime r{at, to};
  auto it = std::upper_bound(regimes_.begin(), regimes_.end(), at,
                             [](SimTime t, const Regime& x) { return t < x.at; });
  regimes_.insert(it, std::move(r));
}

const WorkloadSpec& TrafficGenerator::active_at(SimTime t) const {
  auto it = std::upper_bound(regimes_.begin(), regimes_.end(), t,
                             [](SimTime v, const Regime& x) { return v < x.at; });
  return (it == regimes_.begin() ? *it : *(it - 1)).spec;
}

std::vector<SimTime> TrafficGenerator::switch_times() const {
  std::vector<SimTime> out;
  for (std::size_t i = 1; i < regimes_.size(); ++i) out.push_back(regimes_[i].at);
  return out;
}

std::vector<transport::FlowSpec> TrafficGenerator::generate(SimTime end) const {
  std::vector<transport::FlowSpec> flows;
  const auto boundaries = switch_times();

  for (std::uint32_t host = 0; host < host_count_; ++host) {
    std::mt19937_64 rng(derive_seed(seed_, streams::kTraffic, host));
    SimTime t{0};
    while (t < end) {
      const WorkloadSpec& spec = active_at(t);
      const SimTime gap = next_arrival(rng, spec.load, host_rate_, spec.cdf.mean_bytes());
      SimTime next_switch = SimTime::max();
      for (SimTime b : boundaries) {
        if (b > t) {
          next_switch = b;
          break;
        }
      }
      // Memoryless: an arrival that would cross a regime boundary is redrawn
      // from the boundary with the new rate.
      if (gap == SimTime::max() || t + gap >= next_switch) {
        if (next_switch == SimTime::max()) break;
        t = next_switch;
        continue;
      }
      t += gap;
      if (t >= end) break;
      const WorkloadSpec& at_spec = active_at(t);
      auto dst = static_cast<std::uint32_t>(uniform_index(rng, host_count_ - 1));
      if (dst >= host) ++dst;
      flows.push_back({t, host, dst, at_spec.cdf.sample(uniform01(rng))});
    }
  }

  std::mt19937_64 incast_rng(derive_seed(seed_, streams::kIncast));
  for (std::size_t r = 0; r < regimes_.size(); ++r) {
    const auto& regime = regimes_[r];
    if (!regime.spec.incast) continue;
    const SimTime regime_end = r + 1 < regimes_.size() ? regimes_[r + 1].at : end;
    const auto& inc = *regime.spec.incast;
    for (SimTime t = regime.at + inc.period; t < std::min(regime_end, end); t += inc.period) {
      const auto receiver = static_cast<std::uint32_t>(uniform_index(incast_rng, host_count_));
      auto burst = make_incast_burst(inc.fan_in, receiver, inc.response_size, t, host_count_,
                                     incast_rng);
      flows.insert(flows.end(), burst.begin(), burst.end());
    }
  }

  std::stable_sort(flows.begin(), flows.end(), [](const auto& a, const auto& b) {
    if (a.start != b.start) return a.start < b.start;
    if (a.src != b.src) return a.src < b.src;
    return a.dst < b.dst;
  });
  return flows;
}

void write_trace(std::ostream& out, const std::vector<transport::FlowSpec>& flows) {
  out << "start_ns,src,dst,size_bytes\n";
  for (const auto& f : flows) {
    out << f.start.count() << ',' << f.src << ',' << f.dst << ',' << f.size << '\n';
  }
}

std::vector<transport::FlowSpec> read_trace(std::istream& in) {
  std::vector<transport::FlowSpec> flows;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (lineno == 1 && line.rfind("start_ns", 0) == 0) continue;
    std::istringstream ls(line);
    std::string a, b, c, d, extra;
    if (!std::getline(ls, a, ',') || !std::getline(ls, b, ',') || !std::getline(ls, c, ',') ||
        !std::getline(ls, d, ',') || std::getline(ls, extra, ',')) {
      throw ParseError("trace: expected 4 comma-separated fields", lineno);
    }
    try {
      std::size_t pos = 0;
      transport::FlowSpec f;
      const long long start = std::stoll(a, &pos);
      if (pos != a.size() || start < 0) throw std::invalid_argument("start");
      f.start = SimTime{start};
      const unsigned long long src = std::stoull(b, &pos);
      if (pos != b.size()) throw std::invalid_argument("src");
      const unsigned long long dst = std::stoull(c, &pos);
      if (pos != c.size()) throw std::invalid_argument("dst");
      const unsigned long long size = std::stoull(d, &pos);
      if (pos != d.size() || size == 0) throw std::invalid_argument("size");
      f.src = static_cast<std::uint32_t>(src);
      f.dst = static_cast<std::uint32_t>(dst);
      f.size = size;
      if (f.src == f.dst) throw std::invalid_argument("src == dst");
      flows.push_back(f);
    } catch (const std::exception& e) {
      throw ParseError(std::string("trace: bad field (") + e.what() + ")", lineno);
    }
  }
  std::stable_sort(flows.begin(), flows.end(),
                   [](const auto& x, const auto& y) { return x.start < y.start; });
  return flows;
}

std::vector<transport::FlowSpec> load_trace_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open trace file '" + path + "'");
  return read_trace(in);
}

}  // namespace pet::traffic
