#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "pet/transport/dctcp.hpp"
#include "pet/units.hpp"

namespace pet::harness {

/// FCT size buckets: (0,100KB], (100KB,10MB), [10MB,inf), plus "all".
enum class Bucket { mice, medium, elephant, all };

std::string to_string(Bucket b);
inline constexpr Bucket kBuckets[] = {Bucket::mice, Bucket::medium, Bucket::elephant, Bucket::all};
bool in_bucket(Bytes size, Bucket b) noexcept;

struct FctSummary {
  Bucket bucket = Bucket::all;
  std::size_t count = 0;
  double mean = 0;
  double p99 = 0;
};

/// Nearest-rank percentile on an unsorted sample; q in (0,1].
double nearest_rank(std::vector<double> values, double q);

/// Per-bucket count, mean and nearest-rank p99 of normalized FCT. Empty
/// buckets are reported with count 0 and NaN statistics.
std::vector<FctSummary> summarize_fct(std::span<const transport::FctRecord> records);

struct QueueSample {
  SimTime t{0};
  std::uint32_t switch_node = 0;
  std::uint32_t port = 0;
  Bytes qlen = 0;
};

struct WeightedValue {
  double value = 0;
  double weight = 1;
};

struct QueueSummary {
  double avg_kb = 0;
  double var_kb = 0;
};

/// Time-weighted mean and population variance. Throws std::invalid_argument
/// when empty or when the total weight is not positive.
QueueSummary summarize_queue(std::span<const WeightedValue> samples);
/// Equal weights (uniformly sampled), values converted to KB.
QueueSummary summarize_queue(std::span<const QueueSample> samples);

// CSV schemas.
inline constexpr const char* kFctHeader = "flow_id,src,dst,size,start_ns,fct_ns,norm_fct,class";
inline constexpr const char* kQueueHeader = "t_ns,switch,port,qlen_bytes";
inline constexpr const char* kStateHeader = "t_ns,port,qlen,tx,txm,kmin,kmax,pmax,incast,ratio";
inline constexpr const char* kSummaryHeader =
    "run,bucket,count,mean_norm_fct,p99_norm_fct,queue_avg_kb,queue_var_kb";

void write_fct_csv(std::ostream& out, std::span<const transport::FctRecord> records);
std::vector<transport::FctRecord> read_fct_csv(std::istream& in);
void write_queue_csv(std::ostream& out, std::span<const QueueSample> samples);
std::vector<QueueSample> read_queue_csv(std::istream& in);

/// Formats a double with enough digits to round-trip; NaN prints as "nan".
std::string fmt_double(double v);

}  // namespace pet::harness
