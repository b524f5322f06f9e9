/*
 * Copyright 2026 The imbench Authors.
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

// Minimal fully-connected network with manual backpropagation, shared by the
// generative samplers. Gradients are held in an Mlp of identical shape.

#pragma once

#include <cmath>
#include <stdexcept>
#include <vector>

#include "imb/common.hpp"

namespace imb {

enum class Activation { kTanh, kRelu, kSigmoid, kLinear };

struct DenseLayer {
  std::size_t in = 0;
  std::size_t out = 0;
  std::vector<double> weight;  // out x in, row-major
  std::vector<double> bias;
  Activation activation = Activation::kLinear;
};

class Mlp {
 public:
  // Activations after the forward pass of one input, kept for backward().
  struct Cache {
    std::vector<std::vector<double>> inputs;  // input to each layer
    std::vector<std::vector<double>> outputs;  // activated output of each layer
  };

  Mlp() = default;

  // widths = {input, hidden..., output}; one activation per layer. Weights
  // use Xavier-uniform initialization, biases start at zero.
  Mlp(const std::vector<std::size_t>& widths, const std::vector<Activation>& activations, Rng& rng) {
    if (widths.size() < 2 || activations.size() != widths.size() - 1)
      throw std::invalid_argument("Mlp: need one activation per layer");
    for (std::size_t l = 0; l + 1 < widths.size(); ++l) {
      DenseLayer layer;
      layer.in = widths[l];
      layer.out = widths[l + 1];
      layer.activation = activations[l];
      layer.weight.resize(layer.in * layer.out);
      layer.bias.assign(layer.out, 0.0);
      const double limit = std::sqrt(6.0 / static_cast<double>(layer.in + layer.out));
      for (auto& w : layer.weight) w = (2.0 * uniform01(rng) - 1.0) * limit;
      layers_.push_back(std::move(layer));
    }
  }

  std::size_t input_width() const { return layers_.front().in; }
  std::size_t output_width() const { return layers_.back().out; }
  const std::vector<DenseLayer>& layers() const { return layers_; }
  std::vector<DenseLayer>& layers() { return layers_; }

  std::vector<double> forward(std::span<const double> x) const {
    Cache cache;
    return forward(x, cache);
  }

  std::vector<double> forward(std::span<const double> x, Cache& cache) const {
    if (x.size() != input_width()) throw std::invalid_argument("Mlp: input width mismatch");
    cache.inputs.resize(layers_.size());
    cache.outputs.resize(layers_.size());
    std::vector<double> current(x.begin(), x.end());
    for (std::size_t l = 0; l < layers_.size(); ++l) {
      const auto& layer = layers_[l];
      cache.inputs[l] = current;
      std::vector<double> next(layer.out);
      for (std::size_t o = 0; o < layer.out; ++o) {
        double s = layer.bias[o];
        const double* w = &layer.weight[o * layer.in];
        for (std::size_t i = 0; i < layer.in; ++i) s += w[i] * current[i];
        next[o] = activate(layer.activation, s);
      }
      cache.outputs[l] = next;
      current = std::move(next);
    }
    return current;
  }

  // Adds dLoss/dparams into `grad` and returns dLoss/dinput.
  std::vector<double> backward(const Cache& cache, std::span<const double> grad_out, Mlp& grad) const {
    if (grad_out.size() != output_width()) throw std::invalid_argument("Mlp: gradient width mismatch");
    std::vector<double> upstream(grad_out.begin(), grad_out.end());
    for (std::size_t l = layers_.size(); l-- > 0;) {
      const auto& layer = layers_[l];
      auto& g = grad.layers_[l];
      const auto& in = cache.inputs[l];
      const auto& out = cache.outputs[l];
      std::vector<double> down(layer.in, 0.0);
      for (std::size_t o = 0; o < layer.out; ++o) {
        const double delta = upstream[o] * derivative(layer.activation, out[o]);
        g.bias[o] += delta;
        const double* w = &layer.weight[o * layer.in];
        double* gw = &g.weight[o * layer.in];
        for (std::size_t i = 0; i < layer.in; ++i) {
          gw[i] += delta * in[i];
          down[i] += delta * w[i];
        }
      }
      upstream = std::move(down);
    }
    return upstream;
  }

  Mlp zeros_like() const {
    Mlp z = *this;
    z.fill(0.0);
    return z;
  }

  void fill(double v) {
    for (auto& layer : layers_) {
      std::fill(layer.weight.begin(), layer.weight.end(), v);
      std::fill(layer.bias.begin(), layer.bias.end(), v);
    }
  }

  std::size_t parameter_count() const {
    std::size_t n = 0;
    for (const auto& layer : layers_) n += layer.weight.size() + layer.bias.size();
    return n;
  }

  // Flat parameter view: weights then biases, layer by layer.
  double& parameter(std::size_t index) {
    for (auto& layer : layers_) {
      if (index < layer.weight.size()) return layer.weight[index];
      index -= layer.weight.size();
      if (index < layer.bias.size()) return layer.bias[index];
      index -= layer.bias.size();
    }
    throw std::out_of_range("Mlp: parameter index");
  }

  double parameter(std::size_t index) const { return const_cast<Mlp*>(this)->parameter(index); }

  double squared_norm() const {
    double s = 0.0;
    for (const auto& layer : layers_) {
      for (double w : layer.weight) s += w * w;
      for (double b : layer.bias) s += b * b;
    }
    return s;
  }

  bool all_finite() const {
    for (const auto& layer : layers_) {
      for (double w : layer.weight)
        if (!std::isfinite(w)) return false;
      for (double b : layer.bias)
        if (!std::isfinite(b)) return false;
    }
    return true;
  }

  // this -= step * g
  void descend(const Mlp& g, double step) {
    for (std::size_t l = 0; l < layers_.size(); ++l) {
      auto& layer = layers_[l];
      for (std::size_t i = 0; i < layer.weight.size(); ++i) layer.weight[i] -= step * g.layers_[l].weight[i];
      for (std::size_t i = 0; i < layer.bias.size(); ++i) layer.bias[i] -= step * g.layers_[l].bias[i];
    }
  }

  void scale(double factor) {
    for (auto& layer : layers_) {
      for (auto& w : layer.weight) w *= factor;
      for (auto& b : layer.bias) b *= factor;
    }
  }

 private:
  static double activate(Activation a, double s) {
    switch (a) {
      case Activation::kTanh: return std::tanh(s);
      case Activation::kRelu: return s > 0 ? s : 0.0;
      case Activation::kSigmoid: return s >= 0 ? 1.0 / (1.0 + std::exp(-s)) : std::exp(s) / (1.0 + std::exp(s));
      case Activation::kLinear: return s;
    }
    return s;
  }

  // Derivative expressed through the activated output.
  static double derivative(Activation a, double y) {
    switch (a) {
      case Activation::kTanh: return 1.0 - y * y;
      case Activation::kRelu: return y > 0 ? 1.0 : 0.0;
      case Activation::kSigmoid: return y * (1.0 - y);
      case Activation::kLinear: return 1.0;
    }
    return 1.0;
  }

  std::vector<DenseLayer> layers_;
};

// Plain SGD over several networks with a shared global gradient-norm clip.
inline void sgd_step(std::span<Mlp* const> nets, std::span<Mlp* const> grads, double learning_rate, double clip = 5.0) {
  double norm2 = 0.0;
  for (auto* g : grads) norm2 += g->squared_norm();
  const double norm = std::sqrt(norm2);
  const double factor = norm > clip ? clip / norm : 1.0;
  for (std::size_t i = 0; i < nets.size(); ++i) nets[i]->descend(*grads[i], learning_rate * factor);
}

}  // namespace imb
