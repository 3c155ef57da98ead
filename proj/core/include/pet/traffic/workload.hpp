#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "pet/transport/dctcp.hpp"
#include "pet/units.hpp"

namespace pet::traffic {

struct CdfPoint {
  double size_bytes = 0;
  double probability = 0;
};

/// Piecewise-linear flow-size CDF.
class FlowSizeCdf {
 public:
  FlowSizeCdf() = default;
  /// Throws ConfigError unless both coordinates strictly increase, the first
  /// probability is >= 0, the last is exactly 1, and sizes are positive.
  explicit FlowSizeCdf(std::vector<CdfPoint> points);

  /// Inverse CDF with linear interpolation between bracketing knots.
  Bytes sample(double u) const;
  double mean_bytes() const;
  double cdf_at(double size_bytes) const;
  const std::vector<CdfPoint>& points() const noexcept { return points_; }

 private:
  std::vector<CdfPoint> points_;
};

/// One `size_bytes probability` pair per line; '#' starts a comment.
FlowSizeCdf parse_cdf(std::istream& in);
FlowSizeCdf load_cdf_file(const std::string& path);
void write_cdf(std::ostream& out, const FlowSizeCdf& cdf);

// Representative approximations of the published web-search and data-mining
// flow-size distributions. Not digitised from any figure; replace them with
// measured CDFs via load_cdf_file when available.
FlowSizeCdf builtin_web_search_cdf();
FlowSizeCdf builtin_data_mining_cdf();

enum class WorkloadName { web_search, data_mining, custom };

std::string to_string(WorkloadName name);
WorkloadName workload_name_from_string(const std::string& s);

struct IncastSpec {
  std::uint32_t fan_in = 8;
  SimTime period = std::chrono::milliseconds(10);
  Bytes response_size = 64 * kKiB;
};

struct WorkloadSpec {
  WorkloadName name = WorkloadName::web_search;
  FlowSizeCdf cdf;
  double load = 0.6;
  std::optional<IncastSpec> incast;
};

void validate(const WorkloadSpec& spec);

/// Per-host Poisson arrival rate (flows/s) for a target load on `link_rate`.
double arrival_rate(double load, BitsPerSec link_rate, double mean_size_bytes);

/// Exponential inter-arrival with rate load*link_rate/(8*mean_size).
SimTime next_arrival(std::mt19937_64& rng, double load, BitsPerSec link_rate,
                     double mean_size_bytes);

/// fan_in distinct senders (never the receiver) each sending response_size
/// to `receiver`, all starting at `at`.
std::vector<transport::FlowSpec> make_incast_burst(std::uint32_t fan_in, std::uint32_t receiver,
                                                   Bytes response_size, SimTime at,
                                                   std::uint32_t host_count,
                                                   std::mt19937_64& rng);

/// Seeded background-plus-incast generator with timed workload switches.
class TrafficGenerator {
 public:
  TrafficGenerator(WorkloadSpec initial, std::uint32_t host_count, BitsPerSec host_rate,
                   std::uint64_t seed);

  /// Arrivals at or after `at` use `to`; earlier flows are unaffected.
  void switch_workload(const WorkloadSpec& to, SimTime at);

  const WorkloadSpec& active_at(SimTime t) const;
  std::vector<SimTime> switch_times() const;

  /// All flows starting in [0, end), sorted by (start, src, dst).
  std::vector<transport::FlowSpec> generate(SimTime end) const;

 private:
  struct Regime {
    SimTime at;
    WorkloadSpec spec;
  };
  std::vector<Regime> regimes_;
  std::uint32_t host_count_;
  BitsPerSec host_rate_;
  std::uint64_t seed_;
};

/// Trace CSV `start_ns,src,dst,size_bytes` (header line optional on read).
void write_trace(std::ostream& out, const std::vector<transport::FlowSpec>& flows);
std::vector<transport::FlowSpec> read_trace(std::istream& in);
std::vector<transport::FlowSpec> load_trace_file(const std::string& path);

}  // namespace pet::traffic
