#include <benchmark/benchmark.h>

#include <random>

#include "pet/learn/policy.hpp"
#include "pet/learn/ppo.hpp"
#include "pet/queue/port_queue.hpp"
#include "pet/random.hpp"
#include "pet/sim/event.hpp"
#include "pet/sim/fabric.hpp"
#include "pet/traffic/workload.hpp"

using namespace pet;
using namespace std::chrono_literals;

namespace {

void BM_EventQueuePushPop(benchmark::State& state) {
  const auto depth = static_cast<std::size_t>(state.range(0));
  sim::EventQueue q;
  std::mt19937_64 rng(1);
  for (std::size_t i = 0; i < depth; ++i) {
    q.push({SimTime{static_cast<std::int64_t>(uniform_index(rng, 1'000'000))}});
  }
  std::int64_t now = 0;
  for (auto _ : state) {
    auto e = q.pop();
    now = e.time.count();
    q.push({SimTime{now + 1 + static_cast<std::int64_t>(uniform_index(rng, 100'000))}});
  }
  state.SetItemsProcessed(state.iterations());
}
BENCHMARK(BM_EventQueuePushPop)->Arg(1 << 10)->Arg(1 << 16);

void BM_PortQueueEnqueueDequeue(benchmark::State& state) {
  queue::PortQueue q(300 * kKiB, {20 * kKiB, 200 * kKiB, 0.5}, 3);
  Packet pk;
  pk.size = 1000;
  for (int i = 0; i < 100; ++i) q.enqueue(pk, SimTime{0});
  for (auto _ : state) {
    benchmark::DoNotOptimize(q.enqueue(pk, SimTime{0}));
    benchmark::DoNotOptimize(q.dequeue(SimTime{0}));
  }
  state.SetItemsProcessed(state.iterations());
}
BENCHMARK(BM_PortQueueEnqueueDequeue);

void BM_ActorForward(benchmark::State& state) {
  const auto p = learn::make_policy(48, learn::Hyperparams{}, 1);
  std::mt19937_64 rng(2);
  std::vector<double> s(48);
  for (auto& v : s) v = uniform01(rng);
  for (auto _ : state) {
    benchmark::DoNotOptimize(learn::select_action(s, p, 0.1, rng, learn::SelectMode::sample));
  }
}
BENCHMARK(BM_ActorForward);

void BM_PpoUpdate(benchmark::State& state) {
  learn::Hyperparams hp;
  auto p = learn::make_policy(48, hp, 1);
  std::mt19937_64 rng(3);
  for (auto _ : state) {
    state.PauseTiming();
    learn::RolloutBuffer buf;
    for (std::uint32_t i = 0; i < hp.rollout_len; ++i) {
      std::vector<double> s(48);
      for (auto& v : s) v = uniform01(rng);
      const auto a = learn::select_action(s, p, 0.1, rng, learn::SelectMode::sample);
      buf.push({s, a.action, uniform01(rng), a.logp, a.value});
    }
    state.ResumeTiming();
    benchmark::DoNotOptimize(learn::ppo_update(buf, p, hp, 0.0, rng));
  }
}
BENCHMARK(BM_PpoUpdate)->Unit(benchmark::kMillisecond);

void BM_DeskFabric10ms(benchmark::State& state) {
  const sim::FabricConfig cfg;
  traffic::WorkloadSpec ws;
  ws.cdf = traffic::builtin_web_search_cdf();
  ws.load = static_cast<double>(state.range(0)) / 100.0;
  const auto flows = traffic::TrafficGenerator(ws, 32, 10'000'000'000ULL, 5).generate(10ms);
  for (auto _ : state) {
    sim::Fabric f(cfg, 1);
    f.add_flows(flows);
    f.run_until(10ms);
    benchmark::DoNotOptimize(f.stats().bytes_delivered);
  }
}
BENCHMARK(BM_DeskFabric10ms)->Arg(30)->Arg(60)->Unit(benchmark::kMillisecond);

}  // namespace
BENCHMARK_MAIN();
