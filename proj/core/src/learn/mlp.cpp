#include "pet/learn/mlp.hpp"

#include <cassert>
#include <cmath>
#include <stdexcept>

#include "pet/random.hpp"

namespace pet::learn {

Mlp::Mlp(std::vector<std::size_t> dims) : dims_(std::move(dims)) {
  if (dims_.size() < 2) throw std::invalid_argument("mlp: need at least input and output dims");
  std::size_t total = 0;
  for (std::size_t l = 0; l + 1 < dims_.size(); ++l) {
    if (dims_[l] == 0 || dims_[l + 1] == 0) throw std::invalid_argument("mlp: zero-width layer");
    offsets_.push_back(total);
    total += dims_[l] * dims_[l + 1] + dims_[l + 1];
  }
  params_.assign(total, 0.0);
}

void Mlp::init(std::mt19937_64& rng, double output_gain) {
  for (std::size_t l = 0; l < layer_count(); ++l) {
    const auto in = dims_[l];
    const auto out = dims_[l + 1];
    double bound = std::sqrt(6.0 / static_cast<double>(in + out));
    if (l + 1 == layer_count()) bound *= output_gain;
    double* w = params_.data() + offsets_[l];
    for (std::size_t i = 0; i < in * out; ++i) w[i] = (2.0 * uniform01(rng) - 1.0) * bound;
    for (std::size_t i = 0; i < out; ++i) w[in * out + i] = 0.0;
  }
}

std::vector<double> Mlp::forward(std::span<const double> x, Tape* tape) const {
  if (x.size() != input_dim()) throw std::invalid_argument("mlp: input dimension mismatch");
  std::vector<double> a(x.begin(), x.end());
  if (tape) {
    tape->activations.clear();
    tape->activations.push_back(a);
  }
  for (std::size_t l = 0; l < layer_count(); ++l) {
    const auto in = dims_[l];
    const auto out = dims_[l + 1];
    const double* w = params_.data() + offsets_[l];
    const double* b = w + in * out;
    std::vector<double> z(out);
    for (std::size_t o = 0; o < out; ++o) {
      const double* row = w + o * in;
      double acc = b[o];
      for (std::size_t i = 0; i < in; ++i) acc += row[i] * a[i];
      z[o] = acc;
    }
    if (l + 1 < layer_count()) {
      for (auto& v : z) v = std::tanh(v);
    }
    a = std::move(z);
    if (tape) tape->activations.push_back(a);
  }
  return a;
}

void Mlp::backward(const Tape& tape, std::span<const double> d_out, std::span<double> grad) const {
  assert(tape.activations.size() == dims_.size());
  assert(grad.size() == params_.size());
  std::vector<double> delta(d_out.begin(), d_out.end());
  for (std::size_t l = layer_count(); l-- > 0;) {
    const auto in = dims_[l];
    const auto out = dims_[l + 1];
    const auto& input = tape.activations[l];
    const double* w = params_.data() + offsets_[l];
    double* gw = grad.data() + offsets_[l];
    double* gb = gw + in * out;
    for (std::size_t o = 0; o < out; ++o) {
      const double d = delta[o];
      if (d == 0.0) continue;
      double* grow = gw + o * in;
      for (std::size_t i = 0; i < in; ++i) grow[i] += d * input[i];
      gb[o] += d;
    }
    if (l == 0) break;
    std::vector<double> prev(in, 0.0);
    for (std::size_t o = 0; o < out; ++o) {
      const double d = delta[o];
      if (d == 0.0) continue;
      const double* row = w + o * in;
      for (std::size_t i = 0; i < in; ++i) prev[i] += row[i] * d;
    }
    for (std::size_t i = 0; i < in; ++i) prev[i] *= 1.0 - input[i] * input[i];
    delta = std::move(prev);
  }
}

void adam_step(std::span<double> params, std::span<const double> grad, AdamState& state,
               double lr, const AdamConfig& config) {
  if (state.m.size() != params.size()) {
    state.m.assign(params.size(), 0.0);
    state.v.assign(params.size(), 0.0);
  }
  ++state.t;
  const double c1 = 1.0 - std::pow(config.beta1, static_cast<double>(state.t));
  const double c2 = 1.0 - std::pow(config.beta2, static_cast<double>(state.t));
  for (std::size_t i = 0; i < params.size(); ++i) {
    state.m[i] = config.beta1 * state.m[i] + (1.0 - config.beta1) * grad[i];
    state.v[i] = config.beta2 * state.v[i] + (1.0 - config.beta2) * grad[i] * grad[i];
    const double m_hat = state.m[i] / c1;
    const double v_hat = state.v[i] / c2;
    params[i] -= lr * m_hat / (std::sqrt(v_hat) + config.epsilon);
  }
}

}  // namespace pet::learn
