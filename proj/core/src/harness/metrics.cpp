#include "pet/harness/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "pet/errors.hpp"

namespace pet::harness {

std::string to_string(Bucket b) {
  switch (b) {
    case Bucket::mice: return "mice";
    case Bucket::medium: return "medium";
    case Bucket::elephant: return "elephant";
    case Bucket::all: return "all";
  }
  return "unknown";
}

bool in_bucket(Bytes size, Bucket b) noexcept {
  switch (b) {
    case Bucket::mice: return size > 0 && size <= 100 * kKiB;
    case Bucket::medium: return size > 100 * kKiB && size < 10 * kMiB;
    case Bucket::elephant: return size >= 10 * kMiB;
    case Bucket::all: return true;
  }
  return false;
}

double nearest_rank(std::vector<double> values, double q) {
  if (values.empty()) return std::numeric_limits<double>::quiet_NaN();
  std::sort(values.begin(), values.end());
  auto rank = static_cast<std::size_t>(std::ceil(q * static_cast<double>(values.size())));
  rank = std::clamp<std::size_t>(rank, 1, values.size());
  return values[rank - 1];
}

std::vector<FctSummary> summarize_fct(std::span<const transport::FctRecord> records) {
  std::vector<FctSummary> out;
  for (auto b : kBuckets) {
    std::vector<double> v;
    for (const auto& r : records) {
      if (in_bucket(r.size, b)) v.push_back(r.normalized);
    }
    FctSummary s{b, v.size(), std::numeric_limits<double>::quiet_NaN(),
                 std::numeric_limits<double>::quiet_NaN()};
    if (!v.empty()) {
      double sum = 0;
      for (double x : v) sum += x;
      s.mean = sum / static_cast<double>(v.size());
      s.p99 = nearest_rank(std::move(v), 0.99);
    }
    out.push_back(s);
  }
  return out;
}

QueueSummary summarize_queue(std::span<const WeightedValue> samples) {
  if (samples.empty()) throw std::invalid_argument("summarize_queue: no samples");
  long double w = 0, s = 0;
  for (const auto& x : samples) {
    w += x.weight;
    s += static_cast<long double>(x.weight) * x.value;
  }
  if (!(w > 0)) throw std::invalid_argument("summarize_queue: total weight must be positive");
  const long double mean = s / w;
  long double var = 0;
  for (const auto& x : samples) {
    const long double d = x.value - mean;
    var += static_cast<long double>(x.weight) * d * d;
  }
  return {static_cast<double>(mean), static_cast<double>(var / w)};
}

QueueSummary summarize_queue(std::span<const QueueSample> samples) {
  std::vector<WeightedValue> v;
  v.reserve(samples.size());
  for (const auto& s : samples) {
    v.push_back({static_cast<double>(s.qlen) / static_cast<double>(kKiB), 1.0});
  }
  return summarize_queue(v);
}

std::string fmt_double(double v) {
  if (std::isnan(v)) return "nan";
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

void write_fct_csv(std::ostream& out, std::span<const transport::FctRecord> records) {
  out << kFctHeader << '\n';
  for (const auto& r : records) {
    out << r.flow_id << ',' << r.src << ',' << r.dst << ',' << r.size << ',' << r.start.count()
        << ',' << r.fct.count() << ',' << fmt_double(r.normalized) << ','
        << transport::to_string(r.klass) << '\n';
  }
}

namespace {

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream is(line);
  while (std::getline(is, cell, ',')) out.push_back(cell);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

template <typename T>
T parse_num(const std::string& s, std::size_t line) {
  std::istringstream is(s);
  T v{};
  if (!(is >> v) || !is.eof()) throw ParseError("bad numeric field '" + s + "'", line);
  return v;
}

}  // namespace

std::vector<transport::FctRecord> read_fct_csv(std::istream& in) {
  std::vector<transport::FctRecord> out;
  std::string line;
  std::size_t n = 0;
  while (std::getline(in, line)) {
    ++n;
    if (line.empty()) continue;
    if (n == 1 && line == kFctHeader) continue;
    const auto f = split_csv(line);
    if (f.size() != 8) throw ParseError("fct csv: expected 8 fields", n);
    transport::FctRecord r;
    r.flow_id = parse_num<std::uint32_t>(f[0], n);
    r.src = parse_num<std::uint32_t>(f[1], n);
    r.dst = parse_num<std::uint32_t>(f[2], n);
    r.size = parse_num<Bytes>(f[3], n);
    r.start = SimTime{parse_num<std::int64_t>(f[4], n)};
    r.fct = SimTime{parse_num<std::int64_t>(f[5], n)};
    r.normalized = parse_num<double>(f[6], n);
    if (f[7] == "mouse") {
      r.klass = transport::FlowClass::mouse;
    } else if (f[7] == "elephant") {
      r.klass = transport::FlowClass::elephant;
    } else {
      throw ParseError("fct csv: unknown class '" + f[7] + "'", n);
    }
    out.push_back(r);
  }
  return out;
}

void write_queue_csv(std::ostream& out, std::span<const QueueSample> samples) {
  out << kQueueHeader << '\n';
  for (const auto& s : samples) {
    out << s.t.count() << ',' << s.switch_node << ',' << s.port << ',' << s.qlen << '\n';
  }
}

std::vector<QueueSample> read_queue_csv(std::istream& in) {
  std::vector<QueueSample> out;
  std::string line;
  std::size_t n = 0;
  while (std::getline(in, line)) {
    ++n;
    if (line.empty()) continue;
    if (n == 1 && line == kQueueHeader) continue;
    const auto f = split_csv(line);
    if (f.size() != 4) throw ParseError("queue csv: expected 4 fields", n);
    out.push_back({SimTime{parse_num<std::int64_t>(f[0], n)}, parse_num<std::uint32_t>(f[1], n),
                   parse_num<std::uint32_t>(f[2], n), parse_num<Bytes>(f[3], n)});
  }
  return out;
}

}  // namespace pet::harness
