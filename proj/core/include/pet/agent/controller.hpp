#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <random>
#include <vector>

#include "pet/agent/reward.hpp"
#include "pet/learn/ppo.hpp"
#include "pet/ncm/monitor.hpp"
#include "pet/sim/fabric.hpp"

namespace pet::agent {

enum class AgentMode { offline_pretrain, online, frozen_eval };

std::string to_string(AgentMode mode);

struct AgentSchedule {
  SimTime delta_t{0};
  SimTime next_tick{0};
  AgentMode mode = AgentMode::online;
};

/// Throws ConfigError if delta_t < 10 * base_rtt.
void validate(const AgentSchedule& schedule, SimTime base_rtt);

enum class UpdateOrder { forward, reverse };

struct ControllerConfig {
  learn::Hyperparams hp;
  double beta1 = 0.3;
  double beta2 = 0.7;
  AgentMode mode = AgentMode::online;
  SimTime delta_t{0};  // 0: 10 x the fabric's largest base RTT
  std::size_t k = 8;
  std::size_t record_budget = 1 << 16;
  double memory_threshold = 0.8;
  bool mask_incast = false;
  bool mask_ratio = false;
  UpdateOrder order = UpdateOrder::forward;
  std::uint64_t seed = 1;
};

/// Per-agent totals for one episode.
struct EpisodeStats {
  double reward_sum = 0;
  std::uint64_t rewards = 0;
  double policy_loss = 0;
  double value_loss = 0;
  double clip_frac = 0;
  std::uint32_t updates = 0;

  double mean_reward() const noexcept {
    return rewards ? reward_sum / static_cast<double>(rewards) : 0.0;
  }
};

/// One learning agent bound to a switch egress port. It owns its policy,
/// rollout buffer, RNG and NCM; nothing here reads another agent's state.
class PortAgent {
 public:
  PortAgent(std::uint32_t port, learn::PolicyParams params, const learn::Hyperparams& hp,
            ncm::Monitor::Config monitor_config, RewardSpec reward, Bytes mtu, std::uint64_t seed);

  std::uint32_t port() const noexcept { return port_; }
  const learn::PolicyParams& params() const noexcept { return params_; }
  learn::PolicyParams& params() noexcept { return params_; }
  const ncm::Monitor& monitor() const noexcept { return monitor_; }
  std::uint64_t update_count() const noexcept { return updates_; }
  std::uint64_t actions_taken() const noexcept { return actions_; }
  const learn::RolloutBuffer& buffer() const noexcept { return buffer_; }
  const EpisodeStats& episode() const noexcept { return episode_; }
  const std::optional<queue::EcnConfig>& last_config() const noexcept { return last_config_; }

  double epsilon(AgentMode mode) const noexcept;

  /// Resets the per-episode runtime (NCM, pending action, interval marks).
  void begin_episode(SimTime now, const queue::PortQueue& queue);
  /// Drops the action still waiting for its reward and closes the open
  /// trajectory segment, bootstrapping from the value of the current state.
  void end_episode();

  void on_enqueue(const Packet& pkt, SimTime now) { monitor_.record(pkt, now); }
  void on_slot(const queue::PortQueue& queue, const ncm::Monitor::CumulativeBytes& cumulative,
               SimTime now);
  /// Reward for the elapsed interval, optional PPO update, next action.
  /// Returns the configuration to apply.
  queue::EcnConfig tick(const queue::PortQueue& queue, SimTime now, AgentMode mode);

 private:
  struct Pending {
    std::vector<double> state;
    learn::ActionSample sample;
  };

  std::uint32_t port_;
  learn::PolicyParams params_;
  learn::Hyperparams hp_;
  ncm::Monitor monitor_;
  RewardSpec reward_;
  Bytes mtu_;
  std::mt19937_64 rng_;
  learn::RolloutBuffer buffer_;
  std::optional<Pending> pending_;
  std::optional<queue::EcnConfig> last_config_;
  SimTime mark_time_{0};
  Bytes mark_tx_ = 0;
  long double mark_area_ = 0;
  std::uint64_t updates_ = 0;
  std::uint64_t actions_ = 0;
  EpisodeStats episode_;
};

/// Runs one PortAgent per switch egress port against a Fabric.
class AgentController final : public sim::FabricObserver {
 public:
  using StateLogger = std::function<void(std::uint32_t port, SimTime now, const ncm::NetState&)>;

  /// `params` holds either one policy per port or a single policy copied to
  /// every port.
  AgentController(const sim::Topology& topology, ControllerConfig config,
                  std::vector<learn::PolicyParams> params);

  /// Fresh policies for every port, seeded from config.seed.
  static std::vector<learn::PolicyParams> initial_params(const sim::Topology& topology,
                                                         const ControllerConfig& config);

  const ControllerConfig& config() const noexcept { return config_; }
  SimTime delta_t() const noexcept { return delta_t_; }
  SimTime slot_period() const noexcept { return slot_; }
  void set_mode(AgentMode mode) noexcept { config_.mode = mode; }
  void set_state_logger(StateLogger logger) { logger_ = std::move(logger); }

  /// Registers with the fabric, enables slot and tick events, resets
  /// per-episode state.
  void attach(sim::Fabric& fabric);
  /// Closes the episode; returns per-agent stats.
  std::vector<EpisodeStats> finish_episode();

  std::size_t agent_count() const noexcept { return agents_.size(); }
  const PortAgent& agent(std::size_t i) const { return agents_.at(i); }
  std::vector<learn::PolicyParams> params() const;
  std::uint64_t ticks() const noexcept { return ticks_; }

  void on_enqueue(std::uint32_t port, const Packet& pkt, SimTime now) override;
  void on_slot(sim::Fabric& fabric, SimTime now) override;
  void on_tick(sim::Fabric& fabric, SimTime now) override;

 private:
  ControllerConfig config_;
  SimTime delta_t_{0};
  SimTime slot_{0};
  std::vector<PortAgent> agents_;
  StateLogger logger_;
  std::uint64_t ticks_ = 0;
};

/// Copies a single policy to `count` ports, or checks the count matches.
std::vector<learn::PolicyParams> broadcast_params(std::vector<learn::PolicyParams> params,
                                                  std::size_t count);

}  // namespace pet::agent
