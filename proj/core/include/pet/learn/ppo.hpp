#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <vector>

#include "pet/learn/policy.hpp"

namespace pet::learn {

struct Transition {
  std::vector<double> state;
  ActionIndex action;
  double reward = 0;
  double logp = 0;
  double value = 0;
  /// Marks the last step of a trajectory segment; `bootstrap` is then the
  /// value of the state that followed it (0 when terminal).
  bool done = false;
  double bootstrap = 0;
};

class RolloutBuffer {
 public:
  void push(Transition t) { items_.push_back(std::move(t)); }
  std::size_t size() const noexcept { return items_.size(); }
  bool empty() const noexcept { return items_.empty(); }
  void clear() noexcept { items_.clear(); }
  std::vector<Transition>& items() noexcept { return items_; }
  const std::vector<Transition>& items() const noexcept { return items_; }

 private:
  std::vector<Transition> items_;
};

struct GaeResult {
  std::vector<double> advantages;
  std::vector<double> returns;
};

/// Backward-recursive GAE over one segment.
GaeResult compute_gae(std::span<const double> rewards, std::span<const double> values,
                      double bootstrap_value, double gamma, double lambda);

/// GAE over a buffer that may contain several segments separated by `done`.
/// The trailing open segment bootstraps from `tail_bootstrap`.
GaeResult compute_gae(const std::vector<Transition>& items, double tail_bootstrap, double gamma,
                      double lambda);

/// Zero mean, unit variance (std guarded at 1e-8).
void normalize_advantages(std::vector<double>& adv);

struct PpoSample {
  std::span<const double> state;
  ActionIndex action;
  double logp_old = 0;
  double advantage = 0;
  double ret = 0;
};

struct PolicyLossStats {
  double loss = 0;
  double entropy = 0;
  double clip_frac = 0;
};

/// Negative mean clipped surrogate. Throws NumericalError on a non-finite ratio.
double policy_loss(std::span<const PpoSample> batch, const Mlp& actor, const HeadLayout& layout,
                   double clip);

/// Same loss, accumulating its gradient w.r.t. the actor parameters into `grad`.
PolicyLossStats policy_loss_grad(std::span<const PpoSample> batch, const Mlp& actor,
                                 const HeadLayout& layout, double clip, std::span<double> grad);

/// Clipped surrogate for a single ratio/advantage pair.
double clipped_surrogate(double ratio, double advantage, double clip) noexcept;

double value_loss(std::span<const PpoSample> batch, const Mlp& critic);
double value_loss_grad(std::span<const PpoSample> batch, const Mlp& critic, std::span<double> grad);

struct UpdateStats {
  double policy_loss = 0;
  double value_loss = 0;
  double entropy = 0;
  double clip_frac = 0;
  std::uint32_t minibatches = 0;
};

/// Runs hp.epochs passes of shuffled minibatch Adam steps on both networks,
/// then clears the buffer. Throws std::invalid_argument on an empty buffer.
UpdateStats ppo_update(RolloutBuffer& buffer, PolicyParams& params, const Hyperparams& hp,
                       double tail_bootstrap, std::mt19937_64& rng);

}  // namespace pet::learn
