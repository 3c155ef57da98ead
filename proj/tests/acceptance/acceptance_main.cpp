// Acceptance suite: one PASS/FAIL line per criterion.
//
//   pet_acceptance [--criterion N]... [--out DIR]

#include <CLI11.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <spdlog/spdlog.h>

#include "pet/agent/training.hpp"
#include "pet/errors.hpp"
#include "pet/harness/experiment.hpp"
#include "pet/learn/checkpoint.hpp"
#include "pet/ncm/monitor.hpp"
#include "pet/random.hpp"
#include "test_util.hpp"

namespace fs = std::filesystem;
using namespace pet;
using namespace std::chrono_literals;
using nlohmann::json;

namespace {

struct Outcome {
  bool pass = false;
  std::string summary;
};

void detail(const std::string& line) { std::printf("  %s\n", line.c_str()); }

template <typename... Args>
std::string fmt(const char* f, Args... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

const harness::FctSummary& bucket(const std::vector<harness::FctSummary>& rows, harness::Bucket b) {
  for (const auto& r : rows) {
    if (r.bucket == b) return r;
  }
  throw std::logic_error("missing bucket");
}

// ---------------------------------------------------------------- criterion 1

Outcome criterion1() {
  bool ok = true;

  // Exponential threshold grid: alpha * 2^n KiB for n = 0..9.
  int grid_bad = 0;
  for (std::uint32_t n = 0; n <= 9; ++n) {
    const auto want = static_cast<Bytes>(20.0 * std::ldexp(1.0, static_cast<int>(n)) * 1024.0);
    if (n <= 8 && learn::action_to_ecn({n, 1, 0}, 20).k_min != want) ++grid_bad;
    if (n >= 1 && learn::action_to_ecn({0, n, 0}, 20).k_max != want) ++grid_bad;
  }
  detail(fmt("threshold grid n=0..9: %d mismatches", grid_bad));
  ok &= grid_bad == 0;

  // Reward, hand-evaluated.
  struct RewardCase {
    double tx, link, qlen, b1, want;
  };
  const RewardCase cases[] = {
      {12.5e9, 25e9, 4, 0.3, 0.3 * 0.5 + 0.7 * 0.25},  // 0.325
      {12.5e9, 25e9, 4, 0.7, 0.7 * 0.5 + 0.3 * 0.25},  // 0.425
      {0, 25e9, 0, 0.3, 0.7},
      {0, 25e9, 0, 0.7, 0.3},
      {25e9, 25e9, 1, 0.3, 1.0},
      {25e9, 25e9, 0.5, 0.7, 1.0},
      {5e9, 10e9, 10, 0.3, 0.3 * 0.5 + 0.7 * 0.1},
      {5e9, 10e9, 10, 0.7, 0.7 * 0.5 + 0.3 * 0.1},
      {20e9, 10e9, 2, 0.7, 0.7 + 0.3 * 0.5},
  };
  double worst_r = 0;
  for (const auto& c : cases) {
    const double got = agent::compute_reward({c.tx, c.qlen}, {c.b1, 1 - c.b1, c.link});
    worst_r = std::max(worst_r, std::abs(got - c.want));
  }
  detail(fmt("reward: %zu hand cases, max |err| = %.3g", std::size(cases), worst_r));
  ok &= worst_r <= 1e-12;

  // Exploration schedule.
  double worst_e = 0;
  for (double t : {0.0, 50.0, 51.0, 100.0, 500.0}) {
    const double want = t > 50 ? std::pow(0.99, t / 50.0) * 0.2 : 0.2;
    worst_e = std::max(worst_e, std::abs(learn::exploration_epsilon(t, 0.2, 0.99, 50) - want));
  }
  worst_e = std::max(worst_e, std::abs(learn::exploration_epsilon(100, 0.2, 0.99, 50) - 0.19602));
  detail(fmt("epsilon at t in {0,50,51,100,500}: max |err| = %.3g", worst_e));
  ok &= worst_e <= 1e-12;

  return {ok, "formula exactness (threshold grid, reward, exploration decay)"};
}

// ---------------------------------------------------------------- criterion 2

std::vector<double> random_state(std::mt19937_64& rng, std::size_t n) {
  std::vector<double> s(n);
  for (auto& v : s) v = uniform01(rng);
  return s;
}

learn::ActionIndex random_action(std::mt19937_64& rng) {
  learn::ActionIndex a;
  a.n_min = static_cast<std::uint32_t>(uniform_index(rng, 9));
  a.gap = 1 + static_cast<std::uint32_t>(uniform_index(rng, 9 - a.n_min));
  a.p_idx = static_cast<std::uint32_t>(uniform_index(rng, 20));
  return a;
}

Outcome criterion2() {
  bool ok = true;

  // GAE against the explicit double sum.
  std::mt19937_64 rng(2024);
  double worst_gae = 0;
  for (std::size_t h = 1; h <= 16; ++h) {
    for (int trial = 0; trial < 20; ++trial) {
      std::vector<double> r(h), v(h);
      for (auto& x : r) x = uniform01(rng) * 2 - 1;
      for (auto& x : v) x = uniform01(rng) * 4 - 2;
      const double boot = uniform01(rng);
      const double gamma = 0.5 + 0.5 * uniform01(rng), lambda = uniform01(rng);
      const auto g = learn::compute_gae(r, v, boot, gamma, lambda);
      for (std::size_t t = 0; t < h; ++t) {
        double sum = 0;
        for (std::size_t l = 0; t + l < h; ++l) {
          const double next = t + l + 1 < h ? v[t + l + 1] : boot;
          const double delta = r[t + l] + gamma * next - v[t + l];
          sum += std::pow(gamma * lambda, static_cast<double>(l)) * delta;
        }
        worst_gae = std::max(worst_gae, std::abs(g.advantages[t] - sum));
        worst_gae = std::max(worst_gae, std::abs(g.returns[t] - (sum + v[t])));
      }
    }
  }
  detail(fmt("GAE vs double sum, horizons 1..16: max |err| = %.3g", worst_gae));
  ok &= worst_gae < 1e-10;

  // Finite differences on a 6-input network with one hidden layer of 4.
  learn::Hyperparams hp;
  hp.hidden = {4};
  double worst_pi = 0, worst_v = 0;
  for (std::uint64_t seed = 1; seed <= 3; ++seed) {
    auto p = learn::make_policy(6, hp, seed);
    std::mt19937_64 init(seed + 100);
    p.actor.init(init, 1.0);
    const auto layout = p.layout();
    std::vector<std::vector<double>> states;
    for (int i = 0; i < 8; ++i) states.push_back(random_state(rng, 6));
    const double ratios[] = {0.5, 0.9, 1.0, 1.1, 1.5, 0.7, 1.3, 0.95};
    std::vector<learn::PpoSample> batch;
    for (int i = 0; i < 8; ++i) {
      const auto a = random_action(rng);
      const double lp = learn::log_prob(p.actor.forward(states[i]), a, layout);
      const double adv = (i % 2 ? 1.0 : -1.0) * (0.5 + uniform01(rng));
      batch.push_back({states[i], a, lp - std::log(ratios[i]), adv, uniform01(rng) * 2 - 1});
    }
    auto rel = [](double a, double n) {
      return std::abs(a - n) / std::max({std::abs(a), std::abs(n), 1e-6});
    };
    const double h = 1e-5;
    std::vector<double> g(p.actor.param_count(), 0.0);
    learn::policy_loss_grad(batch, p.actor, layout, 0.2, g);
    for (std::size_t k = 0; k < g.size(); ++k) {
      const double o = p.actor.params()[k];
      p.actor.params()[k] = o + h;
      const double up = learn::policy_loss(batch, p.actor, layout, 0.2);
      p.actor.params()[k] = o - h;
      const double dn = learn::policy_loss(batch, p.actor, layout, 0.2);
      p.actor.params()[k] = o;
      worst_pi = std::max(worst_pi, rel(g[k], (up - dn) / (2 * h)));
    }
    std::vector<double> gv(p.critic.param_count(), 0.0);
    learn::value_loss_grad(batch, p.critic, gv);
    for (std::size_t k = 0; k < gv.size(); ++k) {
      const double o = p.critic.params()[k];
      p.critic.params()[k] = o + h;
      const double up = learn::value_loss(batch, p.critic);
      p.critic.params()[k] = o - h;
      const double dn = learn::value_loss(batch, p.critic);
      p.critic.params()[k] = o;
      worst_v = std::max(worst_v, rel(gv[k], (up - dn) / (2 * h)));
    }
  }
  detail(fmt("finite differences: policy max rel err %.3g, value max rel err %.3g", worst_pi,
             worst_v));
  ok &= worst_pi < 1e-4 && worst_v < 1e-4;

  // Clip-binding samples give exactly zero policy gradient.
  auto p = learn::make_policy(6, hp, 9);
  std::mt19937_64 init(99);
  p.actor.init(init, 1.0);
  std::size_t nonzero = 0;
  for (int i = 0; i < 200; ++i) {
    const auto s = random_state(rng, 6);
    const auto a = random_action(rng);
    const double lp = learn::log_prob(p.actor.forward(s), a, p.layout());
    const bool upper = i % 2 == 0;
    const double ratio = upper ? 1.2 + 0.01 + uniform01(rng) : 0.8 - 0.01 - 0.5 * uniform01(rng);
    learn::PpoSample sample{s, a, lp - std::log(ratio), upper ? 0.1 + uniform01(rng) : -0.1 - uniform01(rng), 0};
    std::vector<double> g(p.actor.param_count(), 0.0);
    learn::policy_loss_grad(std::span(&sample, 1), p.actor, p.layout(), 0.2, g);
    nonzero += static_cast<std::size_t>(std::count_if(g.begin(), g.end(), [](double x) { return x != 0.0; }));
  }
  detail(fmt("clip-binding samples: %zu nonzero gradient entries over 200 samples", nonzero));
  ok &= nonzero == 0;

  return {ok, "learner oracles (GAE double sum, finite-difference gradients, clip zero gradient)"};
}

// ---------------------------------------------------------------- criterion 3

struct ConservationRun {
  std::string name;
  sim::FabricConfig config;
  std::vector<transport::FlowSpec> flows;
  std::vector<std::pair<std::uint32_t, std::pair<SimTime, SimTime>>> failures;
  SimTime end;
};

std::vector<transport::FlowSpec> desk_traffic(double load, bool incast, SimTime end,
                                              std::uint64_t seed) {
  traffic::WorkloadSpec ws;
  ws.cdf = traffic::builtin_web_search_cdf();
  ws.load = load;
  if (incast) ws.incast = traffic::IncastSpec{};
  traffic::TrafficGenerator gen(ws, 32, 10'000'000'000ULL, seed);
  return gen.generate(end);
}

Outcome criterion3() {
  bool ok = true;

  std::vector<ConservationRun> runs;
  sim::FabricConfig desk;
  runs.push_back({"desk 60% + incast, SECN1", desk, desk_traffic(0.6, true, 30ms, 1), {}, 60ms});
  sim::FabricConfig desk2 = desk;
  desk2.initial_ecn = {100 * kKiB, 400 * kKiB, 0.2};
  runs.push_back({"desk 60% + incast, SECN2", desk2, desk_traffic(0.6, true, 30ms, 2), {}, 60ms});
  {
    const sim::Topology topo(desk.topology);
    runs.push_back({"desk 40%, fabric cable down 10..20 ms", desk, desk_traffic(0.4, false, 30ms, 3),
                    {{topo.fabric_cable(0, 0), {10ms, 20ms}}, {topo.fabric_cable(2, 1), {12ms, 25ms}}},
                    60ms});
  }
  sim::FabricConfig infinite = desk;
  infinite.topology.buffer_capacity = queue::kUnlimitedCapacity;
  runs.push_back({"desk 80% + incast, infinite buffers", infinite, desk_traffic(0.8, true, 30ms, 4), {}, 80ms});

  for (const auto& r : runs) {
    sim::Fabric f(r.config, 7);
    f.add_flows(r.flows);
    for (const auto& [cable, window] : r.failures) {
      f.set_link_state(cable, false, window.first);
      f.set_link_state(cable, true, window.second);
    }
    std::size_t checks = 0;
    bool conserved = true;
    for (SimTime t = 1ms; t <= r.end; t += 1ms) {
      f.run_until(t);
      try {
        f.check_conservation();
      } catch (const std::logic_error&) {
        conserved = false;
      }
      ++checks;
    }
    const auto st = f.stats();
    const bool balanced = st.bytes_injected == st.bytes_delivered + st.bytes_dropped + st.bytes_in_flight;
    detail(fmt("%s: %zu checkpoints, conserved=%s, drops=%llu", r.name.c_str(), checks,
               conserved && balanced ? "yes" : "NO", static_cast<unsigned long long>(st.packets_dropped)));
    ok &= conserved && balanced;
    if (r.config.topology.buffer_capacity == queue::kUnlimitedCapacity) ok &= st.packets_dropped == 0;
  }

  // Single long DCTCP flow across the fabric.
  {
    sim::Fabric f(desk, 1);
    const transport::FlowSpec spec{0ns, 0, 31, 1'000'000'000};
    f.add_flows(std::span(&spec, 1));
    f.run_until(50ms);
    const auto half = f.stats().bytes_delivered;
    f.run_until(100ms);
    const double util = static_cast<double>(f.stats().bytes_delivered - half) * 8 / 0.05 / 10e9;
    detail(fmt("single flow, last 50 ms of 100 ms: utilization %.4f", util));
    ok &= util >= 0.9;
  }

  // Empirical marking frequency at pinned queue lengths.
  {
    const queue::EcnConfig c{20 * kKiB, 200 * kKiB, 0.6};
    int inside = 0, total = 0;
    for (Bytes target : {10 * kKiB, 30 * kKiB, 75 * kKiB, 110 * kKiB, 150 * kKiB, 190 * kKiB, 250 * kKiB}) {
      queue::PortQueue q(queue::kUnlimitedCapacity, c, 4242 + target);
      Packet pk;
      pk.size = 1000;
      while (q.qlen_bytes() + 1000 < target) q.enqueue(pk, 0ns);
      const double p = queue::mark_probability(q.qlen_bytes() + 1000, c);
      const int n = 100'000;
      std::uint64_t marks = 0;
      for (int i = 0; i < n; ++i) {
        if (q.enqueue(pk, 0ns) == queue::EnqueueOutcome::accepted_marked) ++marks;
        q.dequeue(0ns);
      }
      const double sigma = std::sqrt(n * p * (1 - p));
      const bool in = std::abs(static_cast<double>(marks) - n * p) <= 3 * sigma;
      inside += in;
      ++total;
      detail(fmt("marking at %llu KiB: p=%.4f observed %.4f (%s 3 sigma)",
                 static_cast<unsigned long long>(target / kKiB), p, static_cast<double>(marks) / n,
                 in ? "within" : "OUTSIDE"));
    }
    ok &= inside == total;
  }

  return {ok, "simulator physics (conservation, lossless infinite buffers, DCTCP utilization, marking rate)"};
}

// ---------------------------------------------------------------- criterion 4

Outcome criterion4() {
  bool ok = true;
  std::mt19937_64 rng(404);

  int incast_bad = 0;
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<ncm::FlowObservation> flows;
    const auto n = 1 + uniform_index(rng, 80);
    for (std::uint32_t i = 0; i < n; ++i) {
      flows.push_back({i, static_cast<std::uint32_t>(uniform_index(rng, 32)),
                       static_cast<std::uint32_t>(uniform_index(rng, 6)), 0});
    }
    std::map<std::uint32_t, std::set<std::uint32_t>> senders;
    for (const auto& f : flows) senders[f.dst].insert(f.src);
    std::uint32_t want = 0;
    for (const auto& [dst, s] : senders) want = std::max(want, static_cast<std::uint32_t>(s.size()));
    incast_bad += ncm::incast_degree(flows) != want;
  }
  detail(fmt("incast degree vs brute force, 100 snapshots: %d mismatches", incast_bad));
  ok &= incast_bad == 0;

  // classify_flow over every size within 64 KiB of the 1 MiB boundary plus random sizes.
  int class_bad = 0;
  auto check_class = [&](Bytes b) {
    const bool mouse = b <= 1024 * 1024;
    class_bad += (transport::classify_flow(b) == transport::FlowClass::mouse) != mouse;
  };
  for (Bytes b = kMiB - 64 * kKiB; b <= kMiB + 64 * kKiB; ++b) check_class(b);
  for (int i = 0; i < 100'000; ++i) check_class(static_cast<Bytes>(uniform01(rng) * 1e9));
  check_class(0);
  detail(fmt("classify_flow around and away from 1 MiB: %d mismatches", class_bad));
  ok &= class_bad == 0;

  int ratio_bad = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    std::vector<ncm::FlowObservation> flows;
    const auto n = uniform_index(rng, 20);
    for (std::uint32_t i = 0; i < n; ++i) {
      const Bytes cum = uniform01(rng) < 0.3 ? kMiB - 2 + uniform_index(rng, 4)
                                             : static_cast<Bytes>(uniform01(rng) * 4 * kMiB);
      flows.push_back({i, 0, 1, cum});
    }
    double want = 0.5;
    if (!flows.empty()) {
      std::size_t mice = 0;
      for (const auto& f : flows) mice += f.cumulative_bytes <= 1024 * 1024;
      want = static_cast<double>(mice) / static_cast<double>(flows.size());
    }
    ratio_bad += ncm::flow_ratio(flows) != want;
  }
  detail(fmt("flow_ratio vs recomputation, 1000 snapshots: %d mismatches", ratio_bad));
  ok &= ratio_bad == 0;

  return {ok, "state oracles (incast degree, flow ratio, flow classification)"};
}

// ---------------------------------------------------------------- criterion 5

harness::Scenario desk_scenario(double load, bool incast) {
  json doc{{"name", "desk"},
           {"workload", {{"name", "web_search"}}},
           {"loads", {load}},
           {"schemes", {"secn2", "pet"}},
           {"duration_ms", 100},
           {"drain", true},
           {"drain_limit_ms", 1000},
           {"seeds", {1}},
           {"queue_sample_us", 100}};
  if (incast) doc["workload"]["incast"] = {{"fan_in", 8}, {"period_us", 10000}, {"size_kb", 64}};
  return harness::parse_scenario(doc);
}

struct PetPipeline {
  std::vector<double> curve;
  std::vector<learn::PolicyParams> params;
};

// Pretraining on one congested trace replayed every episode, then an online
// phase on fresh traffic.
PetPipeline train_pet(const harness::Scenario& s, std::uint64_t seed, std::uint32_t episodes,
                      SimTime episode, SimTime online) {
  agent::PretrainConfig pc;
  pc.fabric = harness::fabric_config(s, {harness::SchemeKind::pet, {}});
  pc.controller = harness::controller_config(s, seed);
  pc.episode_duration = episode;
  const sim::Topology topo(s.topology);
  auto wl = s.workload;
  wl.load = s.loads.front();
  traffic::TrafficGenerator gen(wl, topo.host_count(), s.topology.host_link.rate,
                                derive_seed(seed, streams::kTraffic, 7000));
  auto pre = agent::pretrain_offline(pc, {gen.generate(episode)}, episodes);
  PetPipeline out;
  out.curve = pre.report.episode_mean_rewards();
  out.params = std::move(pre.params);
  if (online > SimTime{0}) {
    auto so = s;
    so.duration = online;
    so.drain = false;
    harness::RunOptions o;
    o.initial_params = &out.params;
    o.mode = agent::AgentMode::online;
    auto on = harness::run_bundle(so, {wl.load, seed + 100, {harness::SchemeKind::pet, {}}}, o);
    out.params = std::move(*on.params);
  }
  return out;
}

bool curve_improves(const std::vector<double>& curve) {
  if (curve.size() < 10) return false;
  auto avg = [&](std::size_t from) {
    double s = 0;
    for (std::size_t i = from; i < from + 5; ++i) s += curve[i];
    return s / 5;
  };
  return avg(curve.size() - 5) >= avg(0);
}

Outcome criterion5(const fs::path& out) {
  const auto s = desk_scenario(0.6, true);
  const std::uint32_t episodes = 20;
  int mean_wins = 0, p99_wins = 0, var_wins = 0, curve_up = 0;
  std::ofstream csv(out / "criterion5.csv");
  csv << "seed,pet_mean,secn2_mean,pet_mice_p99,secn2_mice_p99,pet_queue_var_kb,secn2_queue_var_kb,"
         "curve_first5,curve_last5\n";
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const auto t0 = std::chrono::steady_clock::now();
    const auto trained = train_pet(s, seed, episodes, 50ms, 100ms);
    harness::RunOptions ev;
    ev.initial_params = &trained.params;
    ev.mode = agent::AgentMode::frozen_eval;
    const harness::RunKey pet_key{0.6, seed, {harness::SchemeKind::pet, {}}};
    const harness::RunKey sec_key{0.6, seed, {harness::SchemeKind::secn2, {}}};
    const auto pet = harness::run_bundle(s, pet_key, ev);
    const auto sec = harness::run_bundle(s, sec_key);
    harness::write_bundle(s, pet, out / "criterion5" / pet_key.dir_name());
    harness::write_bundle(s, sec, out / "criterion5" / sec_key.dir_name());

    const auto pf = harness::summarize_fct(pet.fct), sf = harness::summarize_fct(sec.fct);
    const auto pq = harness::summarize_queue(pet.queue), sq = harness::summarize_queue(sec.queue);
    const double pm = bucket(pf, harness::Bucket::all).mean, sm = bucket(sf, harness::Bucket::all).mean;
    const double pp = bucket(pf, harness::Bucket::mice).p99, sp = bucket(sf, harness::Bucket::mice).p99;
    mean_wins += pm <= sm;
    p99_wins += pp < sp;
    var_wins += pq.var_kb < sq.var_kb;
    const bool up = curve_improves(trained.curve);
    curve_up += up;
    const double first = std::accumulate(trained.curve.begin(), trained.curve.begin() + 5, 0.0) / 5;
    const double last = std::accumulate(trained.curve.end() - 5, trained.curve.end(), 0.0) / 5;
    csv << seed << ',' << harness::fmt_double(pm) << ',' << harness::fmt_double(sm) << ','
        << harness::fmt_double(pp) << ',' << harness::fmt_double(sp) << ','
        << harness::fmt_double(pq.var_kb) << ',' << harness::fmt_double(sq.var_kb) << ','
        << harness::fmt_double(first) << ',' << harness::fmt_double(last) << '\n';
    const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    detail(fmt("seed %llu: mean FCT pet %.3f / secn2 %.3f, mice p99 %.3f / %.3f, queue var %.1f / %.1f KB^2, "
               "reward MA5 %.4f -> %.4f (%.0f s)",
               static_cast<unsigned long long>(seed), pm, sm, pp, sp, pq.var_kb, sq.var_kb, first, last, wall));
  }
  detail(fmt("seeds with pet mean <= secn2: %d/5, mice p99 lower: %d/5, queue variance lower: %d/5",
             mean_wins, p99_wins, var_wins));
  detail(fmt("training curve non-decreasing (5-episode moving average): %d/5 seeds", curve_up));
  const bool ok = mean_wins >= 4 && p99_wins >= 4 && var_wins >= 4;
  return {ok, "training efficacy vs SECN2 on the desk topology at 60% load (directional, 4 of 5 seeds)"};
}

// ---------------------------------------------------------------- criterion 6

Outcome criterion6(const fs::path& out) {
  bool ok = true;
  auto doc = json{{"name", "determinism"},
                  {"workload", {{"name", "web_search"}, {"incast", {{"fan_in", 8}, {"period_us", 5000}, {"size_kb", 64}}}}},
                  {"loads", {0.5}},
                  {"schemes", {"secn1", "pet"}},
                  {"duration_ms", 20},
                  {"drain_limit_ms", 200},
                  {"seeds", {3}},
                  {"state_log", true},
                  {"pet", {{"pretrain_episodes", 1}, {"pretrain_episode_ms", 10}, {"hyperparams", {{"rollout_len", 16}}}}}};
  const auto s = harness::parse_scenario(doc);
  const auto a = harness::run_experiment(s, out / "criterion6" / "a");
  const auto b = harness::run_experiment(s, out / "criterion6" / "b");
  std::size_t compared = 0, differing = 0;
  for (std::size_t i = 0; i < a.size() && i < b.size(); ++i) {
    for (const char* name : {"fct.csv", "queue.csv", "regimes.csv", "training.csv", "state.csv", "policy.ckpt"}) {
      if (!fs::exists(a[i] / name)) continue;
      ++compared;
      if (test::slurp(a[i] / name) != test::slurp(b[i] / name)) {
        ++differing;
        detail(fmt("differs: %s/%s", a[i].filename().string().c_str(), name));
      }
    }
  }
  detail(fmt("two identical runs: %zu files compared byte-for-byte, %zu differ", compared, differing));
  ok &= a.size() == b.size() && compared >= 8 && differing == 0;

  // Checkpoint round trip.
  const fs::path ckpt = a.back() / "policy.ckpt";
  const auto original = learn::load_checkpoint(ckpt);
  learn::save_checkpoint(out / "criterion6" / "resaved.ckpt", original);
  ok &= test::slurp(ckpt) == test::slurp(out / "criterion6" / "resaved.ckpt");
  const auto loaded = learn::load_checkpoint(out / "criterion6" / "resaved.ckpt");
  std::mt19937_64 rng(66), r1(1), r2(1);
  std::size_t mismatches = 0, trials = 0;
  for (int i = 0; i < 100; ++i) {
    const auto state = random_state(rng, original.front().actor.input_dim());
    for (std::size_t k = 0; k < original.size(); ++k) {
      ++trials;
      mismatches += !(learn::select_action(state, original[k], 0, r1, learn::SelectMode::greedy).action ==
                      learn::select_action(state, loaded[k], 0, r2, learn::SelectMode::greedy).action);
    }
  }
  detail(fmt("checkpoint round trip: %zu greedy actions compared on 100 states, %zu mismatches", trials,
             mismatches));
  ok &= mismatches == 0;
  return {ok, "determinism and persistence (byte-identical CSVs, checkpoint round trip)"};
}

// ---------------------------------------------------------------- criterion 7

Outcome criterion7(const fs::path& out) {
  bool ok = true;

  // Workload switching with agents acting on every port.
  {
    json doc{{"name", "workload-switch"},
             {"workload", {{"name", "web_search"}}},
             {"switches", {{{"at_ms", 4100}, {"workload", {{"name", "data_mining"}}}},
                           {{"at_ms", 8100}, {"workload", {{"name", "web_search"}}}},
                           {{"at_ms", 9100}, {"workload", {{"name", "data_mining"}}}}}},
             {"loads", {0.1}},
             {"schemes", {"pet"}},
             {"duration_ms", 10000},
             {"drain", false},
             {"seeds", {1}},
             {"queue_sample_us", 1000},
             {"pet", {{"mode", "frozen_eval"}}}};
    const auto s = harness::parse_scenario(doc);
    const harness::RunKey key{0.1, 1, s.schemes[0]};
    const auto r = harness::run_bundle(s, key);
    harness::write_bundle(s, r, out / "criterion7" / "switch");
    bool regimes_ok = r.regimes.size() == 4;
    for (const auto& reg : r.regimes) {
      const auto& all = bucket(reg.fct, harness::Bucket::all);
      regimes_ok &= all.count > 0 && reg.queue.has_value();
      detail(fmt("switch regime %-22s [%5.2f s, %5.2f s): %zu flows, mean norm FCT %.3f",
                 reg.label.c_str(), to_seconds(reg.start), to_seconds(reg.end), all.count, all.mean));
    }
    regimes_ok &= fs::exists(out / "criterion7" / "switch" / "regimes.csv");
    regimes_ok &= r.config_applications > 0;
    ok &= regimes_ok;
  }

  // Link failure: 10% of fabric links down at 3.1 s, back at 6.1 s.
  {
    json doc{{"name", "link-failure"},
             {"workload", {{"name", "web_search"}}},
             {"failures", {{"fraction", 0.1}, {"down_at_ms", 3100}, {"up_at_ms", 6100}}},
             {"loads", {0.1}},
             {"schemes", {"secn1"}},
             {"duration_ms", 7000},
             {"drain", false},
             {"seeds", {1}},
             {"queue_sample_us", 1000}};
    const auto s = harness::parse_scenario(doc);
    const harness::RunKey key{0.1, 1, s.schemes[0]};
    const auto r = harness::run_bundle(s, key);
    harness::write_bundle(s, r, out / "criterion7" / "failure");
    std::size_t inside = 0, outside = 0;
    for (auto t : r.drop_times) (t >= 3100ms && t < 6100ms ? inside : outside) += 1;
    detail(fmt("failure: cables down %zu, drops inside window %zu, outside %zu", r.failed_cables.size(),
               inside, outside));
    bool regimes_ok = r.regimes.size() == 3;
    for (const auto& reg : r.regimes) {
      const auto& all = bucket(reg.fct, harness::Bucket::all);
      regimes_ok &= all.count > 0;
      detail(fmt("failure regime %-14s [%5.2f s, %5.2f s): %zu flows, mean norm FCT %.3f, drops %llu",
                 reg.label.c_str(), to_seconds(reg.start), to_seconds(reg.end), all.count, all.mean,
                 static_cast<unsigned long long>(reg.drops)));
    }
    ok &= regimes_ok && outside == 0 && !r.failed_cables.empty();
  }
  return {ok, "scenario machinery (workload switches, link failure window, per-regime summaries)"};
}

// ---------------------------------------------------------------- criterion 8

Outcome criterion8(const fs::path& out) {
  struct Variant {
    const char* name;
    bool mask_incast;
    bool mask_ratio;
  };
  const Variant variants[] = {{"full", false, false},
                              {"no_incast", true, false},
                              {"no_ratio", false, true},
                              {"no_incast_no_ratio", true, true}};
  const fs::path report = out / "criterion8_ablation.csv";
  fs::create_directories(out);
  std::ofstream csv(report);
  csv << "variant,flows,mean_norm_fct,mice_mean,mice_p99,elephant_mean,queue_avg_kb,queue_var_kb\n";
  std::size_t rows = 0;
  for (const auto& v : variants) {
    auto s = desk_scenario(0.6, true);
    s.pet.mask_incast = v.mask_incast;
    s.pet.mask_ratio = v.mask_ratio;
    const auto trained = train_pet(s, 1, 10, 50ms, 0ms);
    harness::RunOptions ev;
    ev.initial_params = &trained.params;
    ev.mode = agent::AgentMode::frozen_eval;
    const auto r = harness::run_bundle(s, {0.6, 1, {harness::SchemeKind::pet, {}}}, ev);
    const auto f = harness::summarize_fct(r.fct);
    const auto q = harness::summarize_queue(r.queue);
    const auto& all = bucket(f, harness::Bucket::all);
    const auto& mice = bucket(f, harness::Bucket::mice);
    const auto& el = bucket(f, harness::Bucket::elephant);
    csv << v.name << ',' << all.count << ',' << harness::fmt_double(all.mean) << ','
        << harness::fmt_double(mice.mean) << ',' << harness::fmt_double(mice.p99) << ','
        << harness::fmt_double(el.mean) << ',' << harness::fmt_double(q.avg_kb) << ','
        << harness::fmt_double(q.var_kb) << '\n';
    detail(fmt("%-20s mean %.3f, mice mean %.3f, mice p99 %.3f, elephant mean %.3f, queue var %.1f KB^2",
               v.name, all.mean, mice.mean, mice.p99, el.mean, q.var_kb));
    ++rows;
  }
  csv.close();
  detail("report: " + report.string());
  return {rows == std::size(variants) && fs::exists(report), "ablation report (incast and ratio state components zeroed)"};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"acceptance criteria"};
  std::vector<int> selected;
  fs::path out = "acceptance_out";
  app.add_option("--criterion", selected, "Criterion number (1-8); repeatable, default all")
      ->check(CLI::Range(1, 8));
  app.add_option("--out", out, "Directory for run artifacts");
  CLI11_PARSE(app, argc, argv);
  if (selected.empty()) selected = {1, 2, 3, 4, 5, 6, 7, 8};
  std::setvbuf(stdout, nullptr, _IOLBF, 0);
  spdlog::set_level(spdlog::level::warn);

  const std::map<int, std::function<Outcome()>> table{
      {1, [] { return criterion1(); }},
      {2, [] { return criterion2(); }},
      {3, [] { return criterion3(); }},
      {4, [] { return criterion4(); }},
      {5, [&] { return criterion5(out); }},
      {6, [&] { return criterion6(out); }},
      {7, [&] { return criterion7(out); }},
      {8, [&] { return criterion8(out); }},
  };

  bool all = true;
  for (int c : selected) {
    fs::create_directories(out);
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = table.at(c)();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::printf("%s criterion %d: %s [%.1f s]\n", o.pass ? "PASS" : "FAIL", c, o.summary.c_str(), secs);
    std::fflush(stdout);
    all &= o.pass;
  }
  return all ? 0 : 1;
}
