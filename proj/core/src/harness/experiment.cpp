#include "pet/harness/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include <spdlog/spdlog.h>

#include "pet/build_info.hpp"
#include "pet/errors.hpp"
#include "pet/learn/checkpoint.hpp"
#include "pet/random.hpp"

namespace pet::harness {

namespace fs = std::filesystem;
using nlohmann::json;

std::string RunKey::dir_name() const {
  return "load" + std::to_string(static_cast<int>(std::lround(load * 100))) + "_seed" +
         std::to_string(seed) + "_" + scheme.label();
}

namespace {

constexpr std::uint32_t kSampleMarker = 0xFFFFFF00u;

class RunObserver final : public sim::FabricObserver {
 public:
  RunObserver(sim::Fabric& fabric, SimTime period) : fabric_(fabric), period_(period) {}

  void start() { fabric_.schedule_marker(kSampleMarker, fabric_.now()); }

  void on_marker(std::uint32_t id, SimTime now) override {
    if (id != kSampleMarker) return;
    const auto& topo = fabric_.topology();
    for (std::uint32_t p = 0; p < fabric_.port_count(); ++p) {
      const auto& q = fabric_.port_queue(p);
      samples.push_back({now, topo.port(p).switch_node, p, q.qlen_bytes()});
      const auto& c = q.config();
      if (std::find(configs.begin(), configs.end(), c) == configs.end()) configs.push_back(c);
    }
    fabric_.schedule_marker(kSampleMarker, now + period_);
  }

  void on_drop(const Packet&, sim::DropCause, SimTime now) override { drops.push_back(now); }

  std::vector<QueueSample> samples;
  std::vector<queue::EcnConfig> configs;
  std::vector<SimTime> drops;

 private:
  sim::Fabric& fabric_;
  SimTime period_;
};

std::vector<learn::PolicyParams> initial_pet_params(const Scenario& scenario, const RunKey& key,
                                                    const RunOptions& options,
                                                    std::optional<agent::TrainingReport>& report) {
  if (options.initial_params) return *options.initial_params;
  if (options.checkpoint) return learn::load_checkpoint(*options.checkpoint);
  if (scenario.pet.checkpoint) return learn::load_checkpoint(*scenario.pet.checkpoint);
  if (scenario.pet.pretrain_episodes > 0) {
    spdlog::info("{}: pretraining {} episodes", key.dir_name(), scenario.pet.pretrain_episodes);
    auto pre = pretrain_for(scenario, key.load, key.seed, scenario.pet.pretrain_episodes);
    report = std::move(pre.report);
    return std::move(pre.params);
  }
  const sim::Topology topo(scenario.topology);
  return agent::AgentController::initial_params(topo, controller_config(scenario, key.seed));
}

std::vector<Regime> make_regimes(const Scenario& scenario, SimTime end) {
  struct Boundary {
    SimTime at;
    std::string label;
  };
  std::vector<Boundary> b{{SimTime{0}, "start:" + traffic::to_string(scenario.workload.name)}};
  for (const auto& s : scenario.switches) {
    b.push_back({s.at, "switch:" + traffic::to_string(s.workload.name)});
  }
  if (scenario.failures) {
    b.push_back({scenario.failures->down_at, "failure_down"});
    b.push_back({scenario.failures->up_at, "failure_up"});
  }
  std::stable_sort(b.begin(), b.end(), [](const auto& x, const auto& y) { return x.at < y.at; });
  std::vector<Regime> out;
  for (std::size_t i = 0; i < b.size(); ++i) {
    if (b[i].at >= end && i > 0) break;
    if (!out.empty() && out.back().start == b[i].at) {
      out.back().label += "+" + b[i].label;
      continue;
    }
    if (!out.empty()) out.back().end = b[i].at;
    out.push_back({b[i].label, b[i].at, end, {}, 0, std::nullopt});
  }
  return out;
}

void fill_regimes(BundleResult& r) {
  for (auto& reg : r.regimes) {
    std::vector<transport::FctRecord> in;
    for (const auto& f : r.fct) {
      if (f.start >= reg.start && f.start < reg.end) in.push_back(f);
    }
    reg.fct = summarize_fct(in);
    reg.drops = static_cast<std::uint64_t>(std::count_if(
        r.drop_times.begin(), r.drop_times.end(),
        [&](SimTime t) { return t >= reg.start && t < reg.end; }));
    std::vector<QueueSample> qs;
    for (const auto& s : r.queue) {
      if (s.t >= reg.start && s.t < reg.end) qs.push_back(s);
    }
    if (!qs.empty()) reg.queue = summarize_queue(qs);
  }
}

json fct_json(const std::vector<FctSummary>& rows) {
  json out = json::array();
  for (const auto& s : rows) {
    out.push_back({{"bucket", to_string(s.bucket)},
                   {"count", s.count},
                   {"mean_norm_fct", std::isnan(s.mean) ? json(nullptr) : json(s.mean)},
                   {"p99_norm_fct", std::isnan(s.p99) ? json(nullptr) : json(s.p99)}});
  }
  return out;
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << text;
}

}  // namespace

agent::ControllerConfig controller_config(const Scenario& scenario, std::uint64_t seed) {
  agent::ControllerConfig c;
  c.hp = scenario.pet.hp;
  const bool mining = scenario.workload.name == traffic::WorkloadName::data_mining;
  c.beta1 = scenario.pet.beta1.value_or(mining ? 0.7 : 0.3);
  c.beta2 = 1.0 - c.beta1;
  c.mode = scenario.pet.mode;
  c.delta_t = scenario.pet.delta_t;
  c.mask_incast = scenario.pet.mask_incast;
  c.mask_ratio = scenario.pet.mask_ratio;
  c.seed = seed;
  return c;
}

sim::FabricConfig fabric_config(const Scenario& scenario, const Scheme& scheme) {
  sim::FabricConfig fc;
  fc.topology = scenario.topology;
  fc.initial_ecn = scheme_ecn(scheme, scenario.baseline_p_max);
  return fc;
}

agent::PretrainResult pretrain_for(const Scenario& scenario, double load, std::uint64_t seed,
                                   std::uint32_t episodes) {
  agent::PretrainConfig pc;
  pc.fabric = fabric_config(scenario, Scheme{SchemeKind::pet, {}});
  pc.controller = controller_config(scenario, seed);
  pc.episode_duration = scenario.pet.pretrain_episode;
  const sim::Topology topo(scenario.topology);
  auto wl = scenario.workload;
  wl.load = load;
  std::vector<std::vector<transport::FlowSpec>> traces;
  for (std::uint32_t e = 0; e < episodes; ++e) {
    traffic::TrafficGenerator gen(wl, topo.host_count(), scenario.topology.host_link.rate,
                                  derive_seed(seed, streams::kTraffic, 1000 + e));
    traces.push_back(gen.generate(pc.episode_duration));
  }
  return agent::pretrain_offline(pc, traces, episodes);
}

BundleResult run_bundle(const Scenario& scenario, const RunKey& key, const RunOptions& options) {
  BundleResult r;
  r.key = key;
  const sim::Topology topo(scenario.topology);

  auto wl = scenario.workload;
  wl.load = key.load;
  traffic::TrafficGenerator gen(wl, topo.host_count(), scenario.topology.host_link.rate,
                                derive_seed(key.seed, streams::kTraffic));
  for (std::size_t i = 0; i < scenario.switches.size(); ++i) {
    auto next = scenario.switches[i].workload;
    next.load = key.load;
    gen.switch_workload(next, scenario.switches[i].at);
  }
  const auto flows = gen.generate(scenario.duration);
  r.flows_generated = flows.size();

  sim::Fabric fabric(fabric_config(scenario, key.scheme), derive_seed(key.seed, streams::kMarking));
  fabric.add_flows(flows);
  agent::FctCollector fct;
  fabric.add_observer(&fct);
  RunObserver obs(fabric, scenario.queue_sample);
  fabric.add_observer(&obs);
  obs.start();
  for (std::size_t i = 0; i < scenario.switches.size(); ++i) {
    fabric.schedule_marker(static_cast<std::uint32_t>(i), scenario.switches[i].at);
  }
  if (scenario.failures) {
    r.failed_cables = choose_failed_cables(topo, scenario.failures->fraction, key.seed);
    for (auto c : r.failed_cables) {
      fabric.set_link_state(c, false, scenario.failures->down_at);
      fabric.set_link_state(c, true, scenario.failures->up_at);
    }
  }

  std::optional<agent::AgentController> controller;
  if (key.scheme.kind == SchemeKind::pet) {
    std::optional<agent::TrainingReport> pre;
    auto params = initial_pet_params(scenario, key, options, pre);
    auto cc = controller_config(scenario, key.seed);
    if (options.mode) cc.mode = *options.mode;
    controller.emplace(topo, cc, std::move(params));
    if (scenario.state_log) {
      controller->set_state_logger([&r](std::uint32_t port, SimTime now, const ncm::NetState& s) {
        std::ostringstream os;
        os.precision(17);
        os << now.count() << ',' << port << ',' << s.qlen << ',' << s.tx_rate << ','
           << s.tx_rate_marked << ',' << s.ecn_current.k_min << ',' << s.ecn_current.k_max << ','
           << s.ecn_current.p_max << ',' << s.d_incast << ',' << s.r_flow;
        r.state_log.push_back(os.str());
      });
    }
    controller->attach(fabric);
    r.training = pre ? std::move(*pre) : agent::TrainingReport{};
  }

  fabric.run_until(scenario.duration);
  if (scenario.drain) fabric.run_until_drained(scenario.duration + scenario.drain_limit);
  fabric.check_conservation();

  r.stats = fabric.stats();
  r.fct = fct.take();
  std::sort(r.fct.begin(), r.fct.end(),
            [](const auto& a, const auto& b) { return a.flow_id < b.flow_id; });
  r.queue = std::move(obs.samples);
  r.observed_configs = std::move(obs.configs);
  r.drop_times = std::move(obs.drops);
  for (std::uint32_t p = 0; p < fabric.port_count(); ++p) {
    r.config_applications += fabric.port_queue(p).counters().config_applications;
  }
  if (controller) {
    const auto ep = controller->finish_episode();
    const auto offset = r.training->rows.empty() ? 0u : r.training->rows.back().episode + 1;
    r.training->append(offset, ep);
    r.params = controller->params();
  }
  r.regimes = make_regimes(scenario, std::max(scenario.duration, fabric.now()));
  fill_regimes(r);
  return r;
}

void write_bundle(const Scenario& scenario, const BundleResult& r, const fs::path& dir) {
  fs::create_directories(dir);
  {
    std::ostringstream os;
    write_fct_csv(os, r.fct);
    write_text(dir / "fct.csv", os.str());
  }
  {
    std::ostringstream os;
    write_queue_csv(os, r.queue);
    write_text(dir / "queue.csv", os.str());
  }
  {
    std::ostringstream os;
    os << "regime,label,start_ns,end_ns,bucket,count,mean_norm_fct,p99_norm_fct,drops,"
          "queue_avg_kb,queue_var_kb\n";
    for (std::size_t i = 0; i < r.regimes.size(); ++i) {
      const auto& g = r.regimes[i];
      for (const auto& s : g.fct) {
        os << i << ',' << g.label << ',' << g.start.count() << ',' << g.end.count() << ','
           << to_string(s.bucket) << ',' << s.count << ',' << fmt_double(s.mean) << ','
           << fmt_double(s.p99) << ',' << g.drops << ','
           << (g.queue ? fmt_double(g.queue->avg_kb) : "nan") << ','
           << (g.queue ? fmt_double(g.queue->var_kb) : "nan") << '\n';
      }
    }
    write_text(dir / "regimes.csv", os.str());
  }
  if (r.training) {
    std::ostringstream os;
    r.training->write_csv(os);
    write_text(dir / "training.csv", os.str());
  }
  if (r.params) learn::save_checkpoint(dir / "policy.ckpt", *r.params);
  if (scenario.state_log && r.key.scheme.kind == SchemeKind::pet) {
    std::ostringstream os;
    os << kStateHeader << '\n';
    for (const auto& row : r.state_log) os << row << '\n';
    write_text(dir / "state.csv", os.str());
  }

  json summary;
  summary["scenario"] = scenario.source;
  summary["run"] = {{"load", r.key.load}, {"seed", r.key.seed}, {"scheme", r.key.scheme.label()}};
  summary["build"] = {{"git_describe", kGitDescribe}, {"version", kVersion}};
  summary["normalization"] = kNormalizationNote;
  summary["fct"] = fct_json(summarize_fct(r.fct));
  if (!r.queue.empty()) {
    const auto q = summarize_queue(r.queue);
    summary["queue"] = {{"avg_kb", q.avg_kb}, {"var_kb", q.var_kb}};
  }
  const auto& st = r.stats;
  summary["stats"] = {{"flows_generated", r.flows_generated},
                      {"flows_completed", st.flows_completed},
                      {"packets_injected", st.packets_injected},
                      {"packets_delivered", st.packets_delivered},
                      {"packets_dropped", st.packets_dropped},
                      {"drops_overflow", st.drops_overflow},
                      {"drops_link", st.drops_link},
                      {"drops_no_route", st.drops_no_route},
                      {"timeouts", st.timeouts},
                      {"events", st.events},
                      {"end_ns", r.regimes.empty() ? 0 : r.regimes.back().end.count()},
                      {"config_applications", r.config_applications}};
  summary["first_drop_ns"] = st.first_drop ? json(st.first_drop->count()) : json(nullptr);
  summary["last_drop_ns"] = st.last_drop ? json(st.last_drop->count()) : json(nullptr);
  summary["failed_cables"] = r.failed_cables;
  json regimes = json::array();
  for (const auto& g : r.regimes) {
    json q = g.queue ? json{{"avg_kb", g.queue->avg_kb}, {"var_kb", g.queue->var_kb}} : json(nullptr);
    regimes.push_back({{"label", g.label},
                       {"start_ns", g.start.count()},
                       {"end_ns", g.end.count()},
                       {"drops", g.drops},
                       {"fct", fct_json(g.fct)},
                       {"queue", q}});
  }
  summary["regimes"] = regimes;
  write_text(dir / "summary.json", summary.dump(2) + "\n");
}

std::vector<fs::path> run_experiment(const Scenario& scenario, const fs::path& out_dir,
                                     const RunOptions& options) {
  fs::create_directories(out_dir);
  std::vector<fs::path> dirs;
  for (double load : scenario.loads) {
    for (auto seed : scenario.seeds) {
      for (const auto& scheme : scenario.schemes) {
        if (!options.only.empty() &&
            std::find(options.only.begin(), options.only.end(), scheme.kind) == options.only.end()) {
          continue;
        }
        RunKey key{load, seed + options.seed_offset, scheme};
        const auto dir = out_dir / key.dir_name();
        fs::create_directories(dir);
        write_text(dir / kIncompleteMarker, "running\n");
        spdlog::info("run {}", key.dir_name());
        const auto result = run_bundle(scenario, key, options);
        write_bundle(scenario, result, dir);
        fs::remove(dir / kIncompleteMarker);
        spdlog::info("{}: {} flows completed, {} dropped packets", key.dir_name(),
                     result.stats.flows_completed, result.stats.packets_dropped);
        dirs.push_back(dir);
      }
    }
  }
  return dirs;
}

std::vector<SummaryRow> summarize_dir(const fs::path& in) {
  if (!fs::is_directory(in)) throw ConfigError("summarize: not a directory: " + in.string());
  std::vector<fs::path> bundles;
  if (fs::exists(in / "fct.csv")) {
    bundles.push_back(in);
  } else {
    for (const auto& e : fs::directory_iterator(in)) {
      if (e.is_directory() && fs::exists(e.path() / "fct.csv")) bundles.push_back(e.path());
    }
  }
  std::sort(bundles.begin(), bundles.end());
  std::vector<SummaryRow> rows;
  for (const auto& b : bundles) {
    if (fs::exists(b / kIncompleteMarker)) {
      spdlog::warn("skipping incomplete bundle {}", b.string());
      continue;
    }
    std::ifstream fin(b / "fct.csv");
    const auto records = read_fct_csv(fin);
    std::optional<QueueSummary> q;
    if (std::ifstream qin(b / "queue.csv"); qin) {
      const auto samples = read_queue_csv(qin);
      if (!samples.empty()) q = summarize_queue(samples);
    }
    for (const auto& s : summarize_fct(records)) rows.push_back({b.filename().string(), s, q});
  }
  return rows;
}

void write_summary_csv(std::ostream& out, const std::vector<SummaryRow>& rows) {
  out << kSummaryHeader << '\n';
  for (const auto& r : rows) {
    out << r.run << ',' << to_string(r.fct.bucket) << ',' << r.fct.count << ','
        << fmt_double(r.fct.mean) << ',' << fmt_double(r.fct.p99) << ','
        << (r.queue ? fmt_double(r.queue->avg_kb) : "nan") << ','
        << (r.queue ? fmt_double(r.queue->var_kb) : "nan") << '\n';
  }
}

}  // namespace pet::harness
