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

#include "layerspin/model.hpp"

#include <algorithm>
#include <stdexcept>

#include "layerspin/kernels.hpp"

namespace layerspin {
namespace {

// Rows per chunk when evaluating large datasets.
constexpr std::size_t kEvalChunk = 512;

Dense rows_slice(const Dense& x, std::size_t begin, std::size_t end) {
  const std::size_t c = x.cols();
  std::vector<double> data(x.data() + begin * c, x.data() + end * c);
  return Dense({end - begin, c}, std::move(data));
}

}  // namespace

Activation parse_activation(const std::string& name) {
  if (name == "relu") return Activation::relu;
  if (name == "tanh") return Activation::tanh;
  throw std::invalid_argument("unknown activation '" + name + "' (expected relu or tanh)");
}

std::string to_string(Activation a) { return a == Activation::relu ? "relu" : "tanh"; }

void ModelSpec::validate() const {
  if (layer_widths.size() < 2)
    throw std::invalid_argument("model needs at least an input and an output width");
  for (std::size_t w : layer_widths)
    if (w == 0) throw std::invalid_argument("model layer widths must be positive");
  if (layer_widths.back() < 2) throw std::invalid_argument("model needs at least 2 classes");
}

Layer::Layer(Dense weights, Dense bias, std::size_t index, std::size_t count)
    : weights_(std::move(weights)),
      weights_init_(weights_),
      bias_(std::move(bias)),
      index_(index),
      count_(count),
      init_norm_(l2_norm(weights_init_.flat())) {
  if (index_ >= count_) throw std::invalid_argument("Layer: index out of range");
  if (bias_.size() != weights_.cols())
    throw std::invalid_argument("Layer: bias length " + std::to_string(bias_.size()) +
                                " does not match fan_out " + std::to_string(weights_.cols()));
}

Mlp::Mlp(ModelSpec spec, Rng& rng) : spec_(std::move(spec)) {
  spec_.validate();
  const std::size_t count = spec_.weight_layers();
  layers_.reserve(count);
  for (std::size_t l = 0; l < count; ++l) {
    const std::size_t fan_in = spec_.layer_widths[l], fan_out = spec_.layer_widths[l + 1];
    layers_.emplace_back(glorot_uniform_init(rng, fan_in, fan_out), Dense({fan_out}), l, count);
  }
}

Mlp::Mlp(ModelSpec spec, std::vector<Dense> weights, std::vector<Dense> biases)
    : spec_(std::move(spec)) {
  spec_.validate();
  const std::size_t count = spec_.weight_layers();
  if (weights.size() != count)
    throw std::invalid_argument("Mlp: expected " + std::to_string(count) + " weight matrices");
  if (!biases.empty() && biases.size() != count)
    throw std::invalid_argument("Mlp: expected " + std::to_string(count) + " bias vectors");
  for (std::size_t l = 0; l < count; ++l) {
    const Shape want{spec_.layer_widths[l], spec_.layer_widths[l + 1]};
    if (weights[l].shape() != want)
      throw std::invalid_argument("Mlp: layer " + std::to_string(l) + " weights have shape " +
                                  to_string(weights[l].shape()) + ", expected " + to_string(want));
    Dense b = biases.empty() ? Dense({want[1]}) : std::move(biases[l]);
    layers_.emplace_back(std::move(weights[l]), std::move(b), l, count);
  }
}

void Mlp::check_inputs(const Dense& inputs) const {
  if (inputs.rank() != 2 || inputs.cols() != spec_.input_width())
    throw std::invalid_argument("inputs of shape " + to_string(inputs.shape()) +
                                " do not match model input width " +
                                std::to_string(spec_.input_width()));
}

void Mlp::check_labels(std::span<const int> labels, std::size_t rows) const {
  if (labels.size() != rows)
    throw std::invalid_argument("got " + std::to_string(labels.size()) + " labels for " +
                                std::to_string(rows) + " rows");
  const int classes = static_cast<int>(spec_.classes());
  for (std::size_t i = 0; i < labels.size(); ++i)
    if (labels[i] < 0 || labels[i] >= classes)
      throw std::invalid_argument("label " + std::to_string(labels[i]) + " at row " +
                                  std::to_string(i) + " outside [0, " + std::to_string(classes) +
                                  ")");
}

ForwardResult Mlp::forward(const Dense& inputs) const {
  check_inputs(inputs);
  ForwardResult out;
  out.cache.activations.reserve(layers_.size());
  out.cache.activations.push_back(inputs);
  for (std::size_t l = 0; l < layers_.size(); ++l) {
    const Layer& layer = layers_[l];
    const Dense& x = out.cache.activations.back();
    Dense z = matmul(x, layer.weights());
    const bool last = l + 1 == layers_.size();
    if (!last && spec_.activation == Activation::tanh)
      kernels::bias_tanh_rows(z.data(), layer.bias().data(), z.data(), z.rows(), z.cols());
    else
      kernels::bias_act_rows(z.data(), layer.bias().data(), z.data(), z.rows(), z.cols(), !last);
    if (last)
      out.logits = std::move(z);
    else
      out.cache.activations.push_back(std::move(z));
  }
  return out;
}

Dense Mlp::logits(const Dense& inputs) const { return forward(inputs).logits; }

LossAndGrad Mlp::loss_and_grad(const Dense& inputs, std::span<const int> labels) const {
  ForwardResult fwd = forward(inputs);
  const std::size_t batch = inputs.rows(), classes = spec_.classes();
  check_labels(labels, batch);

  Dense delta({batch, classes});
  std::vector<double> nll(batch);
  kernels::softmax_xent_rows(fwd.logits.data(), labels.data(), delta.data(), nll.data(), batch,
                             classes);
  LossAndGrad out;
  for (double v : nll) out.loss += v;
  out.loss /= static_cast<double>(batch);

  // d(mean loss)/d(logits) = (softmax - onehot) / batch
  const double inv_batch = 1.0 / static_cast<double>(batch);
  for (std::size_t r = 0; r < batch; ++r) {
    delta(r, static_cast<std::size_t>(labels[r])) -= 1.0;
    for (std::size_t j = 0; j < classes; ++j) delta(r, j) *= inv_batch;
  }

  out.grads.layers.resize(layers_.size());
  for (std::size_t l = layers_.size(); l-- > 0;) {
    const Dense& x = fwd.cache.activations[l];
    LayerGrad& g = out.grads.layers[l];
    g.weights = matmul_tn(x, delta);
    g.bias = Dense({delta.cols()});
    kernels::column_sums(delta.data(), g.bias.data(), delta.rows(), delta.cols());
    if (l == 0) break;

    Dense prev = matmul_nt(delta, layers_[l].weights());
    const auto h = x.flat();
    auto d = prev.flat();
    if (spec_.activation == Activation::relu) {
      for (std::size_t i = 0; i < d.size(); ++i)
        if (!(h[i] > 0.0)) d[i] = 0.0;
    } else {
      for (std::size_t i = 0; i < d.size(); ++i) d[i] *= 1.0 - h[i] * h[i];
    }
    delta = std::move(prev);
  }
  return out;
}

double Mlp::loss(const Dense& inputs, std::span<const int> labels) const {
  check_inputs(inputs);
  check_labels(labels, inputs.rows());
  double total = 0.0;
  for (std::size_t begin = 0; begin < inputs.rows(); begin += kEvalChunk) {
    const std::size_t end = std::min(inputs.rows(), begin + kEvalChunk);
    const Dense z = logits(rows_slice(inputs, begin, end));
    Dense probs(z.shape());
    std::vector<double> nll(end - begin);
    kernels::softmax_xent_rows(z.data(), labels.data() + begin, probs.data(), nll.data(),
                               z.rows(), z.cols());
    for (double v : nll) total += v;
  }
  return total / static_cast<double>(inputs.rows());
}

double Mlp::accuracy(const Dense& inputs, std::span<const int> labels) const {
  check_inputs(inputs);
  if (labels.size() != inputs.rows())
    throw std::invalid_argument("accuracy: label count does not match rows");
  if (inputs.rows() == 0) return 0.0;
  std::size_t correct = 0;
  for (std::size_t begin = 0; begin < inputs.rows(); begin += kEvalChunk) {
    const std::size_t end = std::min(inputs.rows(), begin + kEvalChunk);
    const Dense z = logits(rows_slice(inputs, begin, end));
    for (std::size_t r = 0; r < z.rows(); ++r)
      if (static_cast<int>(argmax(z.row(r))) == labels[begin + r]) ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(inputs.rows());
}

Evaluation Mlp::evaluate(const Dense& inputs, std::span<const int> labels) const {
  check_inputs(inputs);
  check_labels(labels, inputs.rows());
  if (inputs.rows() == 0) return {};
  double total = 0.0;
  std::size_t correct = 0;
  for (std::size_t begin = 0; begin < inputs.rows(); begin += kEvalChunk) {
    const std::size_t end = std::min(inputs.rows(), begin + kEvalChunk);
    const Dense z = logits(rows_slice(inputs, begin, end));
    Dense probs(z.shape());
    std::vector<double> nll(end - begin);
    kernels::softmax_xent_rows(z.data(), labels.data() + begin, probs.data(), nll.data(),
                               z.rows(), z.cols());
    for (std::size_t r = 0; r < z.rows(); ++r) {
      total += nll[r];
      if (static_cast<int>(argmax(z.row(r))) == labels[begin + r]) ++correct;
    }
  }
  const double n = static_cast<double>(inputs.rows());
  return {total / n, static_cast<double>(correct) / n};
}

FeatureSnapshot Mlp::snapshot_features(std::size_t layer_index) const {
  if (layer_index >= layers_.size())
    throw std::out_of_range("snapshot_features: layer " + std::to_string(layer_index) +
                            " does not exist (model has " + std::to_string(layers_.size()) +
                            ")");
  const Layer& layer = layers_[layer_index];
  return FeatureSnapshot{layer_index, transpose(layer.weights()), transpose(layer.weights_init())};
}

std::size_t argmax(std::span<const double> row) {
  std::size_t best = 0;
  for (std::size_t j = 1; j < row.size(); ++j)
    if (row[j] > row[best]) best = j;
  return best;
}

}  // namespace layerspin
