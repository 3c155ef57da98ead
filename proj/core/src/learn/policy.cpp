#include "pet/learn/policy.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "pet/errors.hpp"
#include "pet/random.hpp"

namespace pet::learn {

Hyperparams with_gae_preset(Hyperparams hp, GaePreset preset) {
  hp.lambda = preset == GaePreset::low_lambda ? 0.01 : 0.95;
  return hp;
}

void validate(const Hyperparams& hp) {
  if (hp.gamma < 0 || hp.gamma > 1) throw ConfigError("hyperparams: gamma must lie in [0,1]");
  if (hp.lambda < 0 || hp.lambda > 1) throw ConfigError("hyperparams: lambda must lie in [0,1]");
  if (hp.clip <= 0) throw ConfigError("hyperparams: clip must be > 0");
  if (hp.lr_actor <= 0 || hp.lr_critic <= 0) throw ConfigError("hyperparams: learning rates must be > 0");
  if (hp.rollout_len == 0) throw ConfigError("hyperparams: rollout_len must be >= 1");
  if (hp.n_max < 1) throw ConfigError("hyperparams: n_max must be >= 1");
  if (hp.decay_step <= 0) throw ConfigError("hyperparams: decay_step must be > 0");
}

bool is_valid(const ActionIndex& a, std::uint32_t n_max) noexcept {
  return a.n_min < n_max && a.gap >= 1 && a.gap <= n_max - a.n_min && a.p_idx < kProbabilitySteps;
}

queue::EcnConfig action_to_ecn(const ActionIndex& a, double alpha_kb) {
  const double unit = alpha_kb * static_cast<double>(kKiB);
  queue::EcnConfig c;
  c.k_min = static_cast<Bytes>(std::llround(unit * std::ldexp(1.0, static_cast<int>(a.n_min))));
  c.k_max = static_cast<Bytes>(std::llround(unit * std::ldexp(1.0, static_cast<int>(a.n_min + a.gap))));
  c.p_max = static_cast<double>(a.p_idx + 1) / static_cast<double>(kProbabilitySteps);
  return c;
}

double exploration_epsilon(double t, double eps0, double decay_rate, double decay_step) {
  if (t <= decay_step) return eps0;
  return std::pow(decay_rate, t / decay_step) * eps0;
}

std::vector<double> masked_softmax(std::span<const double> logits, std::size_t legal) {
  std::vector<double> p(logits.size(), 0.0);
  legal = std::min(legal, logits.size());
  if (legal == 0) return p;
  const double mx = *std::max_element(logits.begin(), logits.begin() + static_cast<std::ptrdiff_t>(legal));
  double sum = 0;
  for (std::size_t i = 0; i < legal; ++i) {
    p[i] = std::exp(logits[i] - mx);
    sum += p[i];
  }
  for (std::size_t i = 0; i < legal; ++i) p[i] /= sum;
  return p;
}

namespace {

double log_softmax_at(std::span<const double> logits, std::size_t legal, std::size_t idx) {
  const double mx = *std::max_element(logits.begin(), logits.begin() + static_cast<std::ptrdiff_t>(legal));
  double sum = 0;
  for (std::size_t i = 0; i < legal; ++i) sum += std::exp(logits[i] - mx);
  return logits[idx] - mx - std::log(sum);
}

struct Heads {
  std::span<const double> n, gap, p;
};

Heads split(std::span<const double> logits, const HeadLayout& layout) {
  if (logits.size() != layout.total()) throw std::invalid_argument("policy: logit size mismatch");
  return {logits.subspan(0, layout.n_dim()), logits.subspan(layout.gap_offset(), layout.gap_dim()),
          logits.subspan(layout.p_offset(), layout.p_dim())};
}

std::uint32_t sample_categorical(const std::vector<double>& probs, std::size_t legal,
                                 std::mt19937_64& rng) {
  const double u = uniform01(rng);
  double acc = 0;
  for (std::size_t i = 0; i < legal; ++i) {
    acc += probs[i];
    if (u < acc) return static_cast<std::uint32_t>(i);
  }
  return static_cast<std::uint32_t>(legal - 1);
}

std::uint32_t argmax(std::span<const double> logits, std::size_t legal) {
  return static_cast<std::uint32_t>(
      std::max_element(logits.begin(), logits.begin() + static_cast<std::ptrdiff_t>(legal)) -
      logits.begin());
}

double head_entropy(std::span<const double> logits, std::size_t legal) {
  const auto p = masked_softmax(logits, legal);
  double h = 0;
  for (std::size_t i = 0; i < legal; ++i) {
    if (p[i] > 0) h -= p[i] * std::log(p[i]);
  }
  return h;
}

}  // namespace

double log_prob(std::span<const double> logits, const ActionIndex& a, const HeadLayout& layout) {
  const auto h = split(logits, layout);
  return log_softmax_at(h.n, layout.legal_n(), a.n_min) +
         log_softmax_at(h.gap, layout.legal_gap(a.n_min), a.gap - 1) +
         log_softmax_at(h.p, layout.p_dim(), a.p_idx);
}

void add_log_prob_grad(std::span<const double> logits, const ActionIndex& a,
                       const HeadLayout& layout, double scale, std::span<double> dlogits) {
  const auto h = split(logits, layout);
  auto add_head = [&](std::span<const double> head, std::size_t legal, std::size_t chosen,
                      std::size_t offset) {
    const auto p = masked_softmax(head, legal);
    for (std::size_t i = 0; i < legal; ++i) {
      dlogits[offset + i] += scale * ((i == chosen ? 1.0 : 0.0) - p[i]);
    }
  };
  add_head(h.n, layout.legal_n(), a.n_min, 0);
  add_head(h.gap, layout.legal_gap(a.n_min), a.gap - 1, layout.gap_offset());
  add_head(h.p, layout.p_dim(), a.p_idx, layout.p_offset());
}

double entropy(std::span<const double> logits, const ActionIndex& a, const HeadLayout& layout) {
  const auto h = split(logits, layout);
  return head_entropy(h.n, layout.legal_n()) + head_entropy(h.gap, layout.legal_gap(a.n_min)) +
         head_entropy(h.p, layout.p_dim());
}

PolicyParams make_policy(std::size_t input_dim, const Hyperparams& hp, std::uint64_t seed) {
  PolicyParams params;
  params.n_max = hp.n_max;
  const HeadLayout layout{hp.n_max};
  std::vector<std::size_t> actor_dims{input_dim};
  actor_dims.insert(actor_dims.end(), hp.hidden.begin(), hp.hidden.end());
  std::vector<std::size_t> critic_dims = actor_dims;
  actor_dims.push_back(layout.total());
  critic_dims.push_back(1);
  params.actor = Mlp(actor_dims);
  params.critic = Mlp(critic_dims);
  std::mt19937_64 rng(seed);
  params.actor.init(rng, 0.01);
  params.critic.init(rng, 1.0);
  return params;
}

ActionSample select_action(std::span<const double> state_seq, const PolicyParams& params,
                           double eps, std::mt19937_64& rng, SelectMode mode) {
  const auto layout = params.layout();
  const auto logits = params.actor.forward(state_seq);
  const auto value = params.critic.forward(state_seq);
  for (double v : logits) {
    if (!std::isfinite(v)) throw NumericalError("select_action: non-finite actor output");
  }
  if (!std::isfinite(value[0])) throw NumericalError("select_action: non-finite critic output");

  const auto h = split(logits, layout);
  ActionIndex a;
  if (mode == SelectMode::greedy) {
    a.n_min = argmax(h.n, layout.legal_n());
    a.gap = argmax(h.gap, layout.legal_gap(a.n_min)) + 1;
    a.p_idx = argmax(h.p, layout.p_dim());
  } else if (eps > 0.0 && uniform01(rng) < eps) {
    a.n_min = static_cast<std::uint32_t>(uniform_index(rng, layout.legal_n()));
    a.gap = static_cast<std::uint32_t>(uniform_index(rng, layout.legal_gap(a.n_min))) + 1;
    a.p_idx = static_cast<std::uint32_t>(uniform_index(rng, layout.p_dim()));
  } else {
    a.n_min = sample_categorical(masked_softmax(h.n, layout.legal_n()), layout.legal_n(), rng);
    const auto legal_gap = layout.legal_gap(a.n_min);
    a.gap = sample_categorical(masked_softmax(h.gap, legal_gap), legal_gap, rng) + 1;
    a.p_idx = sample_categorical(masked_softmax(h.p, layout.p_dim()), layout.p_dim(), rng);
  }
  return {a, log_prob(logits, a, layout), value[0]};
}

}  // namespace pet::learn
