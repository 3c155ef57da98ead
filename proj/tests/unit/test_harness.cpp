#include <gtest/gtest.h>

#include <cmath>
#include <cstdlib>
#include <numeric>
#include <set>
#include <sstream>

#include "pet/errors.hpp"
#include "pet/harness/experiment.hpp"
#include "test_util.hpp"

using namespace pet;
using namespace pet::harness;
using namespace std::chrono_literals;
using nlohmann::json;

namespace {

json tiny_doc() {
  return json{{"name", "tiny"},
              {"topology", {{"n_spine", 2}, {"n_leaf", 2}, {"hosts_per_leaf", 2}}},
              {"workload", {{"name", "web_search"}}},
              {"loads", {0.4}},
              {"schemes", {"secn1"}},
              {"duration_ms", 5},
              {"drain_limit_ms", 50},
              {"seeds", {1}}};
}

std::string config_error(const json& doc) {
  try {
    parse_scenario(doc);
  } catch (const ConfigError& e) {
    return e.what();
  }
  return {};
}

transport::FctRecord rec(std::uint32_t id, Bytes size, double norm) {
  transport::FctRecord r;
  r.flow_id = id;
  r.size = size;
  r.normalized = norm;
  r.fct = SimTime{static_cast<SimTime::rep>(norm * 1000)};
  r.klass = transport::classify_flow(size);
  return r;
}

}  // namespace

TEST(Scenario, ParsesTinyDocument) {
  const auto s = parse_scenario(tiny_doc());
  EXPECT_EQ(s.name, "tiny");
  EXPECT_EQ(s.topology.n_leaf, 2u);
  ASSERT_EQ(s.schemes.size(), 1u);
  EXPECT_EQ(s.schemes[0].kind, SchemeKind::secn1);
  EXPECT_EQ(s.duration, 5ms);
}

TEST(Scenario, ErrorsNameTheField) {
  auto doc = tiny_doc();
  doc["schemes"] = {"secn1", "foo"};
  const auto msg = config_error(doc);
  EXPECT_NE(msg.find("schemes[1]"), std::string::npos) << msg;
  EXPECT_NE(msg.find("foo"), std::string::npos) << msg;

  doc = tiny_doc();
  doc["topology"]["n_leaf"] = 0;
  EXPECT_NE(config_error(doc).find("n_leaf"), std::string::npos) << config_error(doc);

  doc = tiny_doc();
  doc["bogus"] = 1;
  EXPECT_NE(config_error(doc).find("bogus"), std::string::npos);

  doc = tiny_doc();
  doc["loads"] = {1.5};
  EXPECT_NE(config_error(doc).find("load"), std::string::npos);
}

TEST(Scenario, ShippedConfigsParse) {
  for (const auto& e : std::filesystem::directory_iterator(std::filesystem::path(PET_SOURCE_DIR) / "configs")) {
    if (e.path().extension() != ".json") continue;
    EXPECT_NO_THROW(load_scenario(e.path())) << e.path();
  }
}

TEST(Scenario, BaselineThresholds) {
  const auto s1 = scheme_ecn({SchemeKind::secn1, {}}, 0.2);
  EXPECT_EQ(s1.k_min, 5 * kKiB);
  EXPECT_EQ(s1.k_max, 200 * kKiB);
  const auto s2 = scheme_ecn({SchemeKind::secn2, {}}, 0.2);
  EXPECT_EQ(s2.k_min, 100 * kKiB);
  EXPECT_EQ(s2.k_max, 400 * kKiB);
  EXPECT_DOUBLE_EQ(s2.p_max, 0.2);
}

TEST(Metrics, NearestRankP99) {
  std::vector<transport::FctRecord> r;
  for (std::uint32_t i = 1; i <= 100; ++i) r.push_back(rec(i, 1000, static_cast<double>(i)));
  const auto s = summarize_fct(r);
  const auto& all = s.back();
  EXPECT_EQ(all.bucket, Bucket::all);
  EXPECT_EQ(all.count, 100u);
  EXPECT_DOUBLE_EQ(all.p99, 99.0);
  EXPECT_DOUBLE_EQ(all.mean, 50.5);
  EXPECT_DOUBLE_EQ(nearest_rank({3, 1, 2}, 0.5), 2.0);
}

TEST(Metrics, SingleRecordIsItsOwnPercentile) {
  const std::vector<transport::FctRecord> r{rec(0, 5000, 1.7)};
  for (const auto& s : summarize_fct(r)) {
    if (s.bucket == Bucket::mice || s.bucket == Bucket::all) {
      EXPECT_EQ(s.count, 1u);
      EXPECT_DOUBLE_EQ(s.p99, 1.7);
      EXPECT_DOUBLE_EQ(s.mean, 1.7);
    } else {
      EXPECT_EQ(s.count, 0u);
      EXPECT_TRUE(std::isnan(s.mean));
    }
  }
}

TEST(Metrics, BucketEdges) {
  EXPECT_TRUE(in_bucket(100 * kKiB, Bucket::mice));
  EXPECT_TRUE(in_bucket(100 * kKiB + 1, Bucket::medium));
  EXPECT_TRUE(in_bucket(10 * kMiB - 1, Bucket::medium));
  EXPECT_TRUE(in_bucket(10 * kMiB, Bucket::elephant));
  for (Bytes b : {Bytes{1}, 100 * kKiB, 100 * kKiB + 1, 10 * kMiB, 30 * kMiB}) {
    int hits = 0;
    for (auto k : {Bucket::mice, Bucket::medium, Bucket::elephant}) hits += in_bucket(b, k);
    EXPECT_EQ(hits, 1) << b;
    EXPECT_TRUE(in_bucket(b, Bucket::all));
  }
}

TEST(Metrics, BucketCountsSumToTotal) {
  std::mt19937_64 rng(4);
  std::vector<transport::FctRecord> r;
  for (std::uint32_t i = 0; i < 500; ++i) {
    r.push_back(rec(i, 1 + static_cast<Bytes>(uniform01(rng) * 20e6), 1 + uniform01(rng)));
  }
  const auto s = summarize_fct(r);
  std::size_t parts = 0, all = 0;
  for (const auto& x : s) (x.bucket == Bucket::all ? all : parts) += x.count;
  EXPECT_EQ(parts, all);
  EXPECT_EQ(all, r.size());
}

TEST(Metrics, QueueSummaryExamples) {
  const std::vector<WeightedValue> flat{{10, 1}, {10, 3}};
  const auto a = summarize_queue(flat);
  EXPECT_DOUBLE_EQ(a.avg_kb, 10);
  EXPECT_DOUBLE_EQ(a.var_kb, 0);
  const std::vector<WeightedValue> two{{0, 1}, {20, 1}};
  const auto b = summarize_queue(two);
  EXPECT_DOUBLE_EQ(b.avg_kb, 10);
  EXPECT_DOUBLE_EQ(b.var_kb, 100);
  const std::vector<WeightedValue> weighted{{0, 3}, {40, 1}};
  const auto c = summarize_queue(weighted);
  EXPECT_DOUBLE_EQ(c.avg_kb, 10);
  EXPECT_DOUBLE_EQ(c.var_kb, 300);
  EXPECT_THROW(summarize_queue(std::span<const WeightedValue>{}), std::invalid_argument);
  EXPECT_THROW(summarize_queue(std::span<const QueueSample>{}), std::invalid_argument);
}

TEST(Metrics, GoldenHeaders) {
  std::ostringstream f, q;
  write_fct_csv(f, std::vector<transport::FctRecord>{});
  write_queue_csv(q, std::vector<QueueSample>{});
  EXPECT_EQ(f.str(), "flow_id,src,dst,size,start_ns,fct_ns,norm_fct,class\n");
  EXPECT_EQ(q.str(), "t_ns,switch,port,qlen_bytes\n");
  std::ostringstream s;
  write_summary_csv(s, {});
  EXPECT_EQ(s.str(), "run,bucket,count,mean_norm_fct,p99_norm_fct,queue_avg_kb,queue_var_kb\n");
}

TEST(Metrics, CsvRoundTripAndParseErrors) {
  std::vector<transport::FctRecord> r{rec(0, 5000, 1.25), rec(1, 2'000'000, 3.5)};
  r[1].src = 3;
  r[1].dst = 7;
  r[1].start = 12345ns;
  std::stringstream ss;
  write_fct_csv(ss, r);
  const auto back = read_fct_csv(ss);
  ASSERT_EQ(back.size(), 2u);
  EXPECT_EQ(back[1].src, 3u);
  EXPECT_EQ(back[1].start, 12345ns);
  EXPECT_DOUBLE_EQ(back[1].normalized, 3.5);
  EXPECT_EQ(back[1].klass, transport::FlowClass::elephant);

  std::stringstream bad(std::string(kFctHeader) + "\n0,1,2,3,4,5,1.0,mouse\n1,2,oops\n");
  try {
    read_fct_csv(bad);
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_NE(std::string(e.what()).find("line 3"), std::string::npos) << e.what();
  }
}

TEST(Experiment, StaticSchemeOnlyObservesItsThresholds) {
  const auto s = parse_scenario(tiny_doc());
  const auto res = run_bundle(s, {0.4, 1, s.schemes[0]});
  ASSERT_EQ(res.observed_configs.size(), 1u);
  EXPECT_EQ(res.observed_configs[0], scheme_ecn(s.schemes[0], 0.2));
  EXPECT_EQ(res.config_applications, 0u);
  EXPECT_GT(res.fct.size(), 0u);
  EXPECT_EQ(res.stats.drops_overflow + res.stats.drops_link + res.stats.drops_no_route,
            res.stats.packets_dropped);
}

TEST(Experiment, OneBundlePerSeedAndIdempotentSummaries) {
  auto doc = tiny_doc();
  doc["seeds"] = {1, 2};
  const auto s = parse_scenario(doc);
  const auto dir = test::temp_dir("experiment_seeds");
  const auto bundles = run_experiment(s, dir);
  ASSERT_EQ(bundles.size(), 2u);
  std::set<std::string> names;
  for (const auto& b : bundles) {
    names.insert(b.filename().string());
    for (const char* f : {"fct.csv", "queue.csv", "regimes.csv", "summary.json"}) {
      EXPECT_TRUE(std::filesystem::exists(b / f)) << b / f;
    }
    EXPECT_FALSE(std::filesystem::exists(b / kIncompleteMarker));
    const auto summary = json::parse(test::slurp(b / "summary.json"));
    EXPECT_TRUE(summary.contains("build"));
    EXPECT_TRUE(summary.contains("scenario"));
    EXPECT_EQ(summary["normalization"], kNormalizationNote);
  }
  EXPECT_TRUE(names.count("load40_seed1_secn1"));
  EXPECT_TRUE(names.count("load40_seed2_secn1"));

  std::ostringstream a, b;
  write_summary_csv(a, summarize_dir(dir));
  write_summary_csv(b, summarize_dir(dir));
  EXPECT_EQ(a.str(), b.str());
  EXPECT_EQ(summarize_dir(dir).size(), 2u * std::size(kBuckets));

  // A half-written bundle is skipped.
  std::filesystem::create_directories(dir / "partial");
  std::filesystem::copy_file(bundles[0] / "fct.csv", dir / "partial" / "fct.csv");
  std::ofstream(dir / "partial" / kIncompleteMarker).put('\n');
  std::ostringstream c;
  write_summary_csv(c, summarize_dir(dir));
  EXPECT_EQ(a.str(), c.str());
}

TEST(Experiment, FailedCablesAreFabricCables) {
  const sim::Topology topo(sim::TopologyConfig{});
  const auto down = choose_failed_cables(topo, 0.1, 7);
  EXPECT_EQ(down.size(), 1u);  // round(0.1 * 8)
  EXPECT_EQ(choose_failed_cables(topo, 0.1, 7), down);
  std::set<std::uint32_t> uniq;
  for (auto c : choose_failed_cables(topo, 0.5, 3)) uniq.insert(c);
  EXPECT_EQ(uniq.size(), 4u);
}

#ifdef PET_CLI_PATH
namespace {
int run_cli(const std::string& args) {
  const std::string cmd = std::string("\"") + PET_CLI_PATH + "\" " + args + " >/dev/null 2>&1";
  const int rc = std::system(cmd.c_str());
  return WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
}
}  // namespace

TEST(Cli, InvalidConfigExitsWithConfigCode) {
  const auto dir = test::temp_dir("cli_bad");
  auto doc = tiny_doc();
  doc["schemes"] = {"nope"};
  std::ofstream(dir / "bad.json") << doc.dump();
  EXPECT_EQ(run_cli("run --config " + (dir / "bad.json").string() + " --out " + (dir / "o").string()), 2);
  EXPECT_EQ(run_cli("run --config " + (dir / "missing.json").string() + " --out " + (dir / "o").string()), 2);
  EXPECT_NE(run_cli("frobnicate"), 0);
}

TEST(Cli, RunThenSummarize) {
  const auto dir = test::temp_dir("cli_run");
  std::ofstream(dir / "tiny.json") << tiny_doc().dump();
  ASSERT_EQ(run_cli("run --config " + (dir / "tiny.json").string() + " --out " + (dir / "out").string()), 0);
  ASSERT_EQ(run_cli("summarize --in " + (dir / "out").string() + " --out " + (dir / "s.csv").string()), 0);
  const auto text = test::slurp(dir / "s.csv");
  EXPECT_EQ(text.substr(0, text.find('\n')), kSummaryHeader);
}
#endif
