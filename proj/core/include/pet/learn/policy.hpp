#pragma once

#include <array>
#include <cstdint>
#include <random>
#include <span>
#include <vector>

#include "pet/learn/mlp.hpp"
#include "pet/queue/ecn_config.hpp"

namespace pet::learn {

/// PPO and action-space settings. Defaults are the ones used throughout the
/// project; `with_gae_preset` switches lambda to the alternative 0.01 preset.
struct Hyperparams {
  double gamma = 0.99;
  double lambda = 0.95;
  double clip = 0.2;
  double lr_actor = 4e-4;
  double lr_critic = 1e-3;
  std::uint32_t epochs = 4;
  std::uint32_t rollout_len = 128;
  std::uint32_t minibatch = 0;  // 0 -> rollout_len / 4
  double eps0 = 0.2;
  double decay_rate = 0.99;
  double decay_step = 50;
  double alpha_kb = 20;
  std::uint32_t n_max = 9;
  std::vector<std::size_t> hidden{64, 64};

  std::uint32_t minibatch_size() const noexcept {
    const auto mb = minibatch != 0 ? minibatch : rollout_len / 4;
    return mb == 0 ? 1 : mb;
  }
};

enum class GaePreset { standard, low_lambda };
Hyperparams with_gae_preset(Hyperparams hp, GaePreset preset);

void validate(const Hyperparams& hp);

/// Factored discrete action: K_min exponent, exponent gap to K_max, and the
/// marking-probability step.
struct ActionIndex {
  std::uint32_t n_min = 0;  // [0, n_max - 1]
  std::uint32_t gap = 1;    // [1, n_max - n_min]
  std::uint32_t p_idx = 0;  // [0, 19]

  friend bool operator==(const ActionIndex&, const ActionIndex&) = default;
};

inline constexpr std::uint32_t kProbabilitySteps = 20;

/// Logit layout of the actor output: [n_min head | gap head | p head].
struct HeadLayout {
  std::uint32_t n_max = 9;
  std::size_t n_dim() const noexcept { return n_max + 1; }
  std::size_t gap_dim() const noexcept { return n_max; }
  std::size_t p_dim() const noexcept { return kProbabilitySteps; }
  std::size_t total() const noexcept { return n_dim() + gap_dim() + p_dim(); }
  std::size_t gap_offset() const noexcept { return n_dim(); }
  std::size_t p_offset() const noexcept { return n_dim() + gap_dim(); }
  /// Legal entries are the first `legal_*` of each head; the rest are masked.
  std::size_t legal_n() const noexcept { return n_max; }
  std::size_t legal_gap(std::uint32_t n_min) const noexcept { return n_max - n_min; }
};

bool is_valid(const ActionIndex& a, std::uint32_t n_max) noexcept;

/// K_min = alpha * 2^n_min KiB, K_max = alpha * 2^(n_min+gap) KiB,
/// P_max = 0.05 * (p_idx + 1).
queue::EcnConfig action_to_ecn(const ActionIndex& a, double alpha_kb);

/// eps0 while t <= T, decay_rate^(t/T) * eps0 afterwards.
double exploration_epsilon(double t, double eps0, double decay_rate, double decay_step);

/// Softmax over the first `legal` logits; masked entries get probability 0.
std::vector<double> masked_softmax(std::span<const double> logits, std::size_t legal);

/// Joint log-probability of a composite action under the masked heads.
double log_prob(std::span<const double> logits, const ActionIndex& a, const HeadLayout& layout);

/// Adds scale * d log_prob / d logits into `dlogits`.
void add_log_prob_grad(std::span<const double> logits, const ActionIndex& a,
                       const HeadLayout& layout, double scale, std::span<double> dlogits);

/// Entropy of the n and p heads plus the gap head conditioned on a.n_min.
double entropy(std::span<const double> logits, const ActionIndex& a, const HeadLayout& layout);

/// Actor and critic parameters plus their optimizer state.
struct PolicyParams {
  Mlp actor;
  Mlp critic;
  AdamState actor_opt;
  AdamState critic_opt;
  std::uint32_t n_max = 9;

  HeadLayout layout() const noexcept { return {n_max}; }
};

PolicyParams make_policy(std::size_t input_dim, const Hyperparams& hp, std::uint64_t seed);

enum class SelectMode { sample, greedy };

struct ActionSample {
  ActionIndex action;
  double logp = 0;
  double value = 0;
};

/// Picks an action for one state sequence. In sample mode, with probability
/// eps every head is drawn uniformly over its legal entries; otherwise each
/// head is sampled from the policy. logp is always the policy's. Throws
/// NumericalError on non-finite network output.
ActionSample select_action(std::span<const double> state_seq, const PolicyParams& params,
                           double eps, std::mt19937_64& rng, SelectMode mode = SelectMode::sample);

}  // namespace pet::learn
