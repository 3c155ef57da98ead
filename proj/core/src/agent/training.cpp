#include "pet/agent/training.hpp"

#include <ostream>

#include "pet/errors.hpp"
#include "pet/learn/checkpoint.hpp"
#include "pet/random.hpp"

namespace pet::agent {

void TrainingReport::append(std::uint32_t episode, const std::vector<EpisodeStats>& stats) {
  for (std::size_t i = 0; i < stats.size(); ++i) {
    const auto& s = stats[i];
    const double n = s.updates ? static_cast<double>(s.updates) : 1.0;
    rows.push_back({episode, static_cast<std::uint32_t>(i), s.mean_reward(), s.policy_loss / n,
                    s.value_loss / n, s.clip_frac / n});
  }
}

std::vector<double> TrainingReport::episode_mean_rewards() const {
  std::vector<double> sum, count;
  for (const auto& r : rows) {
    if (r.episode >= sum.size()) {
      sum.resize(r.episode + 1, 0.0);
      count.resize(r.episode + 1, 0.0);
    }
    sum[r.episode] += r.mean_reward;
    count[r.episode] += 1;
  }
  for (std::size_t i = 0; i < sum.size(); ++i) sum[i] = count[i] > 0 ? sum[i] / count[i] : 0.0;
  return sum;
}

void TrainingReport::write_csv(std::ostream& out) const {
  out << "episode,agent,mean_reward,policy_loss,value_loss,clip_frac\n";
  out.precision(17);
  for (const auto& r : rows) {
    out << r.episode << ',' << r.agent << ',' << r.mean_reward << ',' << r.policy_loss << ','
        << r.value_loss << ',' << r.clip_frac << '\n';
  }
}

PretrainResult pretrain_offline(const PretrainConfig& config,
                                const std::vector<std::vector<transport::FlowSpec>>& traces,
                                std::uint32_t episodes, std::vector<learn::PolicyParams> init) {
  const sim::Topology topology(config.fabric.topology);
  auto cc = config.controller;
  cc.mode = AgentMode::offline_pretrain;
  if (init.empty()) init = AgentController::initial_params(topology, cc);
  if (episodes > 0 && traces.empty()) throw ConfigError("pretrain: no traces given");

  AgentController controller(topology, cc, std::move(init));
  PretrainResult result;
  for (std::uint32_t e = 0; e < episodes; ++e) {
    const auto& trace = traces[e % traces.size()];
    std::vector<transport::FlowSpec> flows;
    for (const auto& f : trace) {
      if (f.start < config.episode_duration) flows.push_back(f);
    }
    sim::Fabric fabric(config.fabric, derive_seed(cc.seed, streams::kMarking, e));
    fabric.add_flows(flows);
    controller.attach(fabric);
    fabric.run_until(config.episode_duration);
    result.report.append(e, controller.finish_episode());
  }
  result.params = controller.params();
  return result;
}

PretrainResult pretrain_offline(const PretrainConfig& config,
                                const std::vector<std::filesystem::path>& trace_files,
                                std::uint32_t episodes,
                                const std::filesystem::path& out_checkpoint) {
  std::vector<std::vector<transport::FlowSpec>> traces;
  traces.reserve(trace_files.size());
  for (const auto& p : trace_files) traces.push_back(traffic::load_trace_file(p.string()));
  auto result = pretrain_offline(config, traces, episodes);
  if (!out_checkpoint.empty()) learn::save_checkpoint(out_checkpoint, result.params);
  return result;
}

OnlineResult run_online(std::vector<learn::PolicyParams> params, const OnlineConfig& config) {
  const sim::Topology topology(config.fabric.topology);
  traffic::TrafficGenerator gen(config.workload, topology.host_count(),
                                config.fabric.topology.host_link.rate,
                                derive_seed(config.seed, streams::kTraffic));
  const auto flows = gen.generate(config.duration);

  if (params.empty()) params = AgentController::initial_params(topology, config.controller);
  AgentController controller(topology, config.controller, std::move(params));
  sim::Fabric fabric(config.fabric, derive_seed(config.seed, streams::kMarking));
  FctCollector fct;
  fabric.add_flows(flows);
  fabric.add_observer(&fct);
  controller.attach(fabric);

  OnlineResult out;
  out.stats = config.drain ? fabric.run_until_drained(config.duration + config.drain_limit)
                           : fabric.run_until(config.duration);
  out.report.append(0, controller.finish_episode());
  out.params = controller.params();
  for (std::size_t i = 0; i < controller.agent_count(); ++i) {
    out.actions += controller.agent(i).actions_taken();
  }
  out.fct = fct.take();
  return out;
}

OnlineResult run_online(const std::filesystem::path& checkpoint, const OnlineConfig& config,
                        const std::filesystem::path& out_checkpoint) {
  auto result = run_online(learn::load_checkpoint(checkpoint), config);
  if (!out_checkpoint.empty()) learn::save_checkpoint(out_checkpoint, result.params);
  return result;
}

}  // namespace pet::agent
