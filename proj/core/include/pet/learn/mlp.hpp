#pragma once

#include <cstddef>
#include <cstdint>
#include <random>
#include <span>
#include <vector>

namespace pet::learn {

/// Fully connected tanh network with a linear output layer.
///
/// All weights live in one flat vector. Layer l stores its weight matrix
/// row-major (out x in) followed by its bias (out).
class Mlp {
 public:
  Mlp() = default;
  explicit Mlp(std::vector<std::size_t> dims);

  /// Glorot-uniform weights, zero biases; the output layer is scaled by
  /// `output_gain`.
  void init(std::mt19937_64& rng, double output_gain);

  std::size_t input_dim() const noexcept { return dims_.front(); }
  std::size_t output_dim() const noexcept { return dims_.back(); }
  std::size_t layer_count() const noexcept { return dims_.size() - 1; }
  std::size_t param_count() const noexcept { return params_.size(); }
  const std::vector<std::size_t>& dims() const noexcept { return dims_; }

  std::vector<double>& params() noexcept { return params_; }
  const std::vector<double>& params() const noexcept { return params_; }

  /// Per-layer activations recorded by forward(): [0] is the input, [l] the
  /// output of layer l-1 (tanh for hidden layers, linear for the last).
  struct Tape {
    std::vector<std::vector<double>> activations;
  };

  std::vector<double> forward(std::span<const double> x, Tape* tape = nullptr) const;

  /// Accumulates dLoss/dparams into `grad` given dLoss/doutput.
  void backward(const Tape& tape, std::span<const double> d_out, std::span<double> grad) const;

 private:
  std::size_t weight_offset(std::size_t layer) const noexcept { return offsets_[layer]; }

  std::vector<std::size_t> dims_;
  std::vector<std::size_t> offsets_;
  std::vector<double> params_;
};

struct AdamState {
  std::vector<double> m;
  std::vector<double> v;
  std::uint64_t t = 0;
};

struct AdamConfig {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

/// One bias-corrected Adam step that descends `grad`.
void adam_step(std::span<double> params, std::span<const double> grad, AdamState& state,
               double lr, const AdamConfig& config = {});

}  // namespace pet::learn
