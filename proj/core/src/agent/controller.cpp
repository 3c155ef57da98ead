#include "pet/agent/controller.hpp"

#include <algorithm>

#include "pet/errors.hpp"
#include "pet/random.hpp"

namespace pet::agent {

std::string to_string(AgentMode mode) {
  switch (mode) {
    case AgentMode::offline_pretrain: return "offline_pretrain";
    case AgentMode::online: return "online";
    case AgentMode::frozen_eval: return "frozen_eval";
  }
  return "unknown";
}

void validate(const AgentSchedule& schedule, SimTime base_rtt) {
  if (schedule.delta_t < 10 * base_rtt) {
    throw ConfigError("agent: delta_t must be at least 10 x base RTT (" +
                      std::to_string(10 * base_rtt.count()) + " ns)");
  }
}

PortAgent::PortAgent(std::uint32_t port, learn::PolicyParams params, const learn::Hyperparams& hp,
                     ncm::Monitor::Config monitor_config, RewardSpec reward, Bytes mtu,
                     std::uint64_t seed)
    : port_(port),
      params_(std::move(params)),
      hp_(hp),
      monitor_(std::move(monitor_config)),
      reward_(reward),
      mtu_(mtu),
      rng_(seed) {}

double PortAgent::epsilon(AgentMode mode) const noexcept {
  switch (mode) {
    case AgentMode::offline_pretrain: return hp_.eps0;
    case AgentMode::online:
      return learn::exploration_epsilon(static_cast<double>(updates_), hp_.eps0, hp_.decay_rate,
                                        hp_.decay_step);
    case AgentMode::frozen_eval: return 0.0;
  }
  return 0.0;
}

void PortAgent::begin_episode(SimTime now, const queue::PortQueue& queue) {
  monitor_ = ncm::Monitor(monitor_.config());
  pending_.reset();
  last_config_.reset();
  mark_time_ = now;
  mark_tx_ = queue.counters().tx_bytes;
  mark_area_ = queue.qlen_area(now);
  episode_ = {};
}

void PortAgent::end_episode() {
  if (pending_ && !buffer_.empty() && !buffer_.items().back().done) {
    auto& last = buffer_.items().back();
    last.done = true;
    last.bootstrap = pending_->sample.value;
  }
  pending_.reset();
}

void PortAgent::on_slot(const queue::PortQueue& queue,
                        const ncm::Monitor::CumulativeBytes& cumulative, SimTime now) {
  ncm::PortCounters c{queue.qlen_bytes(), queue.counters().tx_bytes,
                      queue.counters().tx_marked_bytes, queue.config()};
  monitor_.observe_slot(c, cumulative, now);
}

queue::EcnConfig PortAgent::tick(const queue::PortQueue& queue, SimTime now, AgentMode mode) {
  const Bytes tx = queue.counters().tx_bytes;
  const long double area = queue.qlen_area(now);
  const auto state = monitor_.window().sequence();
  const bool learning = mode != AgentMode::frozen_eval;

  if (pending_) {
    const auto stats = interval_stats(tx - mark_tx_, area - mark_area_, now - mark_time_, mtu_);
    const double r = compute_reward(stats, reward_);
    episode_.reward_sum += r;
    ++episode_.rewards;
    if (learning) {
      buffer_.push({std::move(pending_->state), pending_->sample.action, r, pending_->sample.logp,
                    pending_->sample.value, false, 0.0});
    }
  }
  mark_time_ = now;
  mark_tx_ = tx;
  mark_area_ = area;

  if (learning && buffer_.size() >= hp_.rollout_len) {
    const double tail = params_.critic.forward(state)[0];
    const auto st = learn::ppo_update(buffer_, params_, hp_, tail, rng_);
    ++updates_;
    ++episode_.updates;
    episode_.policy_loss += st.policy_loss;
    episode_.value_loss += st.value_loss;
    episode_.clip_frac += st.clip_frac;
  }

  const auto mode_sel = learning ? learn::SelectMode::sample : learn::SelectMode::greedy;
  auto sample = learn::select_action(state, params_, epsilon(mode), rng_, mode_sel);
  const auto config = learn::action_to_ecn(sample.action, hp_.alpha_kb);
  pending_ = Pending{state, sample};
  last_config_ = config;
  ++actions_;
  return config;
}

AgentController::AgentController(const sim::Topology& topology, ControllerConfig config,
                                 std::vector<learn::PolicyParams> params)
    : config_(std::move(config)) {
  learn::validate(config_.hp);
  if (config_.k == 0) throw ConfigError("agent: k must be >= 1");
  const auto base = topology.max_base_rtt();
  const auto k = static_cast<SimTime::rep>(config_.k);
  SimTime want = config_.delta_t.count() > 0 ? config_.delta_t : 10 * base;
  slot_ = SimTime{(want.count() + k - 1) / k};
  delta_t_ = slot_ * k;
  validate(AgentSchedule{delta_t_, delta_t_, config_.mode}, base);
  validate(RewardSpec{config_.beta1, config_.beta2, 1.0});

  params = broadcast_params(std::move(params), topology.port_count());
  const auto& tc = topology.config();
  agents_.reserve(topology.port_count());
  for (std::uint32_t p = 0; p < topology.port_count(); ++p) {
    const auto& info = topology.port(p);
    ncm::Monitor::Config mc;
    mc.k = config_.k;
    mc.slot_period = slot_;
    mc.record_budget = config_.record_budget;
    mc.memory_threshold = config_.memory_threshold;
    mc.env.buffer_capacity = tc.buffer_capacity;
    mc.env.link_rate = static_cast<double>(info.link.rate);
    mc.env.max_n = config_.hp.n_max;
    mc.env.host_count = topology.host_count();
    mc.env.alpha_kb = config_.hp.alpha_kb;
    mc.env.mask_incast = config_.mask_incast;
    mc.env.mask_ratio = config_.mask_ratio;
    const RewardSpec reward{config_.beta1, config_.beta2, static_cast<double>(info.link.rate)};
    if (params[p].actor.input_dim() != config_.k * ncm::kStateDim) {
      throw ConfigError("agent: policy input dimension does not match k x state size");
    }
    agents_.emplace_back(p, std::move(params[p]), config_.hp, mc, reward, tc.mtu,
                         derive_seed(config_.seed, streams::kAgent, p));
  }
}

std::vector<learn::PolicyParams> AgentController::initial_params(const sim::Topology& topology,
                                                                 const ControllerConfig& config) {
  std::vector<learn::PolicyParams> out;
  out.reserve(topology.port_count());
  for (std::uint32_t p = 0; p < topology.port_count(); ++p) {
    out.push_back(learn::make_policy(config.k * ncm::kStateDim, config.hp,
                                     derive_seed(config.seed, streams::kInit, p)));
  }
  return out;
}

void AgentController::attach(sim::Fabric& fabric) {
  if (fabric.port_count() != agents_.size()) {
    throw ConfigError("agent: fabric port count does not match the controller");
  }
  fabric.add_observer(this);
  fabric.enable_slots(slot_, static_cast<std::uint32_t>(config_.k));
  for (auto& a : agents_) a.begin_episode(fabric.now(), fabric.port_queue(a.port()));
}

std::vector<EpisodeStats> AgentController::finish_episode() {
  std::vector<EpisodeStats> out;
  out.reserve(agents_.size());
  for (auto& a : agents_) {
    a.end_episode();
    out.push_back(a.episode());
  }
  return out;
}

std::vector<learn::PolicyParams> AgentController::params() const {
  std::vector<learn::PolicyParams> out;
  out.reserve(agents_.size());
  for (const auto& a : agents_) out.push_back(a.params());
  return out;
}

void AgentController::on_enqueue(std::uint32_t port, const Packet& pkt, SimTime now) {
  agents_[port].on_enqueue(pkt, now);
}

void AgentController::on_slot(sim::Fabric& fabric, SimTime now) {
  const ncm::Monitor::CumulativeBytes cumulative = [&fabric](std::uint32_t flow) {
    return fabric.flow(flow).high_water;
  };
  for (auto& a : agents_) {
    a.on_slot(fabric.port_queue(a.port()), cumulative, now);
    if (logger_) logger_(a.port(), now, a.monitor().last_state());
  }
}

void AgentController::on_tick(sim::Fabric& fabric, SimTime now) {
  ++ticks_;
  auto step = [&](PortAgent& a) {
    fabric.apply_ecn_config(a.port(), a.tick(fabric.port_queue(a.port()), now, config_.mode));
  };
  if (config_.order == UpdateOrder::forward) {
    for (auto& a : agents_) step(a);
  } else {
    for (auto it = agents_.rbegin(); it != agents_.rend(); ++it) step(*it);
  }
}

std::vector<learn::PolicyParams> broadcast_params(std::vector<learn::PolicyParams> params,
                                                  std::size_t count) {
  if (params.size() == count) return params;
  if (params.size() == 1) return std::vector<learn::PolicyParams>(count, params.front());
  throw ConfigError("agent: checkpoint holds " + std::to_string(params.size()) +
                    " policies for " + std::to_string(count) + " ports");
}

}  // namespace pet::agent
