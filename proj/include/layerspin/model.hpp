/* Copyright 2026 The Layerspin Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/

#ifndef LAYERSPIN_MODEL_HPP_
#define LAYERSPIN_MODEL_HPP_

#include <span>
#include <string>
#include <vector>

#include "layerspin/rng.hpp"
#include "layerspin/tensor.hpp"

namespace layerspin {

enum class Activation { relu, tanh };

Activation parse_activation(const std::string& name);
std::string to_string(Activation a);

struct ModelSpec {
  /// input, hidden..., output (== class count)
  std::vector<std::size_t> layer_widths;
  Activation activation = Activation::relu;

  void validate() const;
  std::size_t input_width() const { return layer_widths.front(); }
  std::size_t classes() const { return layer_widths.back(); }
  std::size_t weight_layers() const { return layer_widths.size() - 1; }
};

/// One dense layer. The multiplicative weights are fan_in x fan_out; the
/// snapshot taken at construction is never modified afterwards.
class Layer {
 public:
  Layer(Dense weights, Dense bias, std::size_t index, std::size_t count);

  Dense& weights() noexcept { return weights_; }
  const Dense& weights() const noexcept { return weights_; }
  const Dense& weights_init() const noexcept { return weights_init_; }
  Dense& bias() noexcept { return bias_; }
  const Dense& bias() const noexcept { return bias_; }

  double init_norm() const noexcept { return init_norm_; }
  std::size_t index() const noexcept { return index_; }
  std::size_t count() const noexcept { return count_; }
  std::size_t fan_in() const { return weights_.rows(); }
  std::size_t fan_out() const { return weights_.cols(); }
  std::string name() const { return "dense_" + std::to_string(index_); }

 private:
  Dense weights_;
  Dense weights_init_;
  Dense bias_;
  std::size_t index_;
  std::size_t count_;
  double init_norm_;
};

struct LayerGrad {
  Dense weights;
  Dense bias;
};

struct GradientSet {
  std::vector<LayerGrad> layers;
};

/// Activations kept by forward() for backprop: inputs, then the output of
/// every hidden layer (after the nonlinearity).
struct ForwardCache {
  std::vector<Dense> activations;
};

struct ForwardResult {
  Dense logits;
  ForwardCache cache;
};

struct LossAndGrad {
  double loss = 0.0;
  GradientSet grads;
};

/// Per-neuron feature vectors of one layer. Row n of `current` and
/// `initial` is column n of the weight matrix (the incoming weights of
/// neuron n), now and at initialization.
struct FeatureSnapshot {
  std::size_t layer_index = 0;
  Dense current;
  Dense initial;
};

/// Multilayer perceptron: dense -> act -> ... -> dense, softmax
/// cross-entropy on the logits.
struct Evaluation {
  double loss = 0.0;
  double accuracy = 0.0;
};

class Mlp {
 public:
  /// Glorot-uniform weights, zero biases.
  Mlp(ModelSpec spec, Rng& rng);
  /// Explicit parameters, mainly for tests. Biases default to zero.
  Mlp(ModelSpec spec, std::vector<Dense> weights, std::vector<Dense> biases = {});

  const ModelSpec& spec() const noexcept { return spec_; }
  std::size_t layer_count() const noexcept { return layers_.size(); }
  Layer& layer(std::size_t l) { return layers_.at(l); }
  const Layer& layer(std::size_t l) const { return layers_.at(l); }
  std::span<Layer> layers() noexcept { return layers_; }
  std::span<const Layer> layers() const noexcept { return layers_; }

  ForwardResult forward(const Dense& inputs) const;
  Dense logits(const Dense& inputs) const;

  /// Mean softmax cross-entropy over the batch and its exact gradient.
  LossAndGrad loss_and_grad(const Dense& inputs, std::span<const int> labels) const;
  double loss(const Dense& inputs, std::span<const int> labels) const;

  /// Fraction of rows whose argmax logit equals the label. Ties go to the
  /// lowest class index.
  double accuracy(const Dense& inputs, std::span<const int> labels) const;

  /// loss() and accuracy() from a single forward pass.
  Evaluation evaluate(const Dense& inputs, std::span<const int> labels) const;

  FeatureSnapshot snapshot_features(std::size_t layer_index) const;

 private:
  void check_inputs(const Dense& inputs) const;
  void check_labels(std::span<const int> labels, std::size_t rows) const;

  ModelSpec spec_;
  std::vector<Layer> layers_;
};

/// Index of the largest value; the first one on ties.
std::size_t argmax(std::span<const double> row);

}  // namespace layerspin

#endif  // LAYERSPIN_MODEL_HPP_
