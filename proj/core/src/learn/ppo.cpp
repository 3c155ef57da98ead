#include "pet/learn/ppo.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "pet/errors.hpp"
#include "pet/random.hpp"

namespace pet::learn {

GaeResult compute_gae(std::span<const double> rewards, std::span<const double> values,
                      double bootstrap_value, double gamma, double lambda) {
  if (rewards.size() != values.size()) throw std::invalid_argument("gae: size mismatch");
  const auto n = rewards.size();
  GaeResult out{std::vector<double>(n), std::vector<double>(n)};
  double acc = 0;
  for (std::size_t t = n; t-- > 0;) {
    const double next_v = t + 1 < n ? values[t + 1] : bootstrap_value;
    const double delta = rewards[t] + gamma * next_v - values[t];
    acc = delta + gamma * lambda * acc;
    out.advantages[t] = acc;
    out.returns[t] = acc + values[t];
  }
  return out;
}

GaeResult compute_gae(const std::vector<Transition>& items, double tail_bootstrap, double gamma,
                      double lambda) {
  GaeResult out;
  out.advantages.reserve(items.size());
  out.returns.reserve(items.size());
  std::size_t begin = 0;
  while (begin < items.size()) {
    std::size_t end = begin;
    while (end < items.size() && !items[end].done) ++end;
    double boot = tail_bootstrap;
    if (end < items.size()) {
      boot = items[end].bootstrap;
      ++end;
    }
    std::vector<double> r, v;
    for (std::size_t i = begin; i < end; ++i) {
      r.push_back(items[i].reward);
      v.push_back(items[i].value);
    }
    auto seg = compute_gae(r, v, boot, gamma, lambda);
    out.advantages.insert(out.advantages.end(), seg.advantages.begin(), seg.advantages.end());
    out.returns.insert(out.returns.end(), seg.returns.begin(), seg.returns.end());
    begin = end;
  }
  return out;
}

void normalize_advantages(std::vector<double>& adv) {
  if (adv.empty()) return;
  const double n = static_cast<double>(adv.size());
  const double mean = std::accumulate(adv.begin(), adv.end(), 0.0) / n;
  double var = 0;
  for (double a : adv) var += (a - mean) * (a - mean);
  const double sd = std::max(std::sqrt(var / n), 1e-8);
  for (double& a : adv) a = (a - mean) / sd;
}

double clipped_surrogate(double ratio, double advantage, double clip) noexcept {
  const double clipped = std::clamp(ratio, 1.0 - clip, 1.0 + clip);
  return std::min(ratio * advantage, clipped * advantage);
}

namespace {

double checked_ratio(double logp_new, double logp_old) {
  const double ratio = std::exp(logp_new - logp_old);
  if (!std::isfinite(ratio)) throw NumericalError("ppo: non-finite probability ratio");
  return ratio;
}

bool clip_binds(double ratio, double advantage, double clip) noexcept {
  return (ratio > 1.0 + clip && advantage > 0) || (ratio < 1.0 - clip && advantage < 0);
}

}  // namespace

double policy_loss(std::span<const PpoSample> batch, const Mlp& actor, const HeadLayout& layout,
                   double clip) {
  if (batch.empty()) throw std::invalid_argument("policy_loss: empty batch");
  double sum = 0;
  for (const auto& s : batch) {
    const auto logits = actor.forward(s.state);
    const double ratio = checked_ratio(log_prob(logits, s.action, layout), s.logp_old);
    sum += clipped_surrogate(ratio, s.advantage, clip);
  }
  return -sum / static_cast<double>(batch.size());
}

PolicyLossStats policy_loss_grad(std::span<const PpoSample> batch, const Mlp& actor,
                                 const HeadLayout& layout, double clip, std::span<double> grad) {
  if (batch.empty()) throw std::invalid_argument("policy_loss: empty batch");
  const double inv_n = 1.0 / static_cast<double>(batch.size());
  PolicyLossStats st;
  Mlp::Tape tape;
  std::vector<double> dlogits(layout.total());
  std::size_t clipped = 0;
  for (const auto& s : batch) {
    const auto logits = actor.forward(s.state, &tape);
    const double ratio = checked_ratio(log_prob(logits, s.action, layout), s.logp_old);
    st.loss -= clipped_surrogate(ratio, s.advantage, clip) * inv_n;
    st.entropy += entropy(logits, s.action, layout) * inv_n;
    if (std::abs(ratio - 1.0) > clip) ++clipped;
    if (clip_binds(ratio, s.advantage, clip) || s.advantage == 0.0) continue;
    std::fill(dlogits.begin(), dlogits.end(), 0.0);
    add_log_prob_grad(logits, s.action, layout, -s.advantage * ratio * inv_n, dlogits);
    actor.backward(tape, dlogits, grad);
  }
  st.clip_frac = static_cast<double>(clipped) * inv_n;
  return st;
}

double value_loss(std::span<const PpoSample> batch, const Mlp& critic) {
  if (batch.empty()) throw std::invalid_argument("value_loss: empty batch");
  double sum = 0;
  for (const auto& s : batch) {
    const double e = critic.forward(s.state)[0] - s.ret;
    sum += e * e;
  }
  return sum / static_cast<double>(batch.size());
}

double value_loss_grad(std::span<const PpoSample> batch, const Mlp& critic, std::span<double> grad) {
  if (batch.empty()) throw std::invalid_argument("value_loss: empty batch");
  const double inv_n = 1.0 / static_cast<double>(batch.size());
  Mlp::Tape tape;
  double sum = 0;
  for (const auto& s : batch) {
    const double e = critic.forward(s.state, &tape)[0] - s.ret;
    sum += e * e;
    const double d = 2.0 * e * inv_n;
    critic.backward(tape, std::span<const double>(&d, 1), grad);
  }
  return sum * inv_n;
}

UpdateStats ppo_update(RolloutBuffer& buffer, PolicyParams& params, const Hyperparams& hp,
                       double tail_bootstrap, std::mt19937_64& rng) {
  if (buffer.empty()) throw std::invalid_argument("ppo_update: empty rollout buffer");
  auto& items = buffer.items();
  auto gae = compute_gae(items, tail_bootstrap, hp.gamma, hp.lambda);
  normalize_advantages(gae.advantages);

  std::vector<PpoSample> samples(items.size());
  for (std::size_t i = 0; i < items.size(); ++i) {
    samples[i] = {items[i].state, items[i].action, items[i].logp, gae.advantages[i], gae.returns[i]};
  }

  const auto layout = params.layout();
  const std::size_t mb = std::min<std::size_t>(hp.minibatch_size(), samples.size());
  std::vector<std::size_t> order(samples.size());
  std::vector<PpoSample> batch;
  std::vector<double> g_actor(params.actor.param_count());
  std::vector<double> g_critic(params.critic.param_count());
  UpdateStats stats;

  for (std::uint32_t epoch = 0; epoch < hp.epochs; ++epoch) {
    std::iota(order.begin(), order.end(), std::size_t{0});
    for (std::size_t i = order.size(); i > 1; --i) {
      std::swap(order[i - 1], order[uniform_index(rng, i)]);
    }
    for (std::size_t start = 0; start < order.size(); start += mb) {
      const std::size_t stop = std::min(order.size(), start + mb);
      batch.clear();
      for (std::size_t i = start; i < stop; ++i) batch.push_back(samples[order[i]]);

      std::fill(g_actor.begin(), g_actor.end(), 0.0);
      const auto pl = policy_loss_grad(batch, params.actor, layout, hp.clip, g_actor);
      adam_step(params.actor.params(), g_actor, params.actor_opt, hp.lr_actor);

      std::fill(g_critic.begin(), g_critic.end(), 0.0);
      const double vl = value_loss_grad(batch, params.critic, g_critic);
      adam_step(params.critic.params(), g_critic, params.critic_opt, hp.lr_critic);

      stats.policy_loss += pl.loss;
      stats.entropy += pl.entropy;
      stats.clip_frac += pl.clip_frac;
      stats.value_loss += vl;
      ++stats.minibatches;
    }
  }
  for (double v : params.actor.params()) {
    if (!std::isfinite(v)) throw NumericalError("ppo_update: non-finite actor parameter");
  }
  for (double v : params.critic.params()) {
    if (!std::isfinite(v)) throw NumericalError("ppo_update: non-finite critic parameter");
  }
  if (stats.minibatches > 0) {
    const double k = static_cast<double>(stats.minibatches);
    stats.policy_loss /= k;
    stats.value_loss /= k;
    stats.entropy /= k;
    stats.clip_frac /= k;
  }
  buffer.clear();
  return stats;
}

}  // namespace pet::learn
