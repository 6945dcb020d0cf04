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

#include "layerspin/optimizers.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

#include "layerspin/format.hpp"

namespace layerspin {
namespace {

bool in_unit_interval(double v) { return v >= 0.0 && v < 1.0; }

void check_finite(const Dense& t, const Layer& layer, const char* what) {
  if (!t.all_finite())
    throw NumericalError("non-finite " + std::string(what) + " gradient in layer " +
                         std::to_string(layer.index()) + " (" + layer.name() + ")");
}

}  // namespace

OptimizerKind parse_optimizer_kind(const std::string& name) {
  if (name == "sgd") return OptimizerKind::sgd;
  if (name == "sgd_amom") return OptimizerKind::sgd_amom;
  if (name == "adam") return OptimizerKind::adam;
  if (name == "rmsprop") return OptimizerKind::rmsprop;
  if (name == "adagrad") return OptimizerKind::adagrad;
  throw std::invalid_argument("unknown optimizer '" + name +
                              "' (expected sgd, sgd_amom, adam, rmsprop or adagrad)");
}

std::string to_string(OptimizerKind k) {
  switch (k) {
    case OptimizerKind::sgd: return "sgd";
    case OptimizerKind::sgd_amom: return "sgd_amom";
    case OptimizerKind::adam: return "adam";
    case OptimizerKind::rmsprop: return "rmsprop";
    case OptimizerKind::adagrad: return "adagrad";
  }
  return "?";
}

void OptimizerConfig::validate() const {
  if (!in_unit_interval(momentum)) throw std::invalid_argument("momentum must lie in [0, 1)");
  if (!in_unit_interval(beta1)) throw std::invalid_argument("beta1 must lie in [0, 1)");
  if (!in_unit_interval(beta2)) throw std::invalid_argument("beta2 must lie in [0, 1)");
  if (!in_unit_interval(rmsprop_decay))
    throw std::invalid_argument("rmsprop_decay must lie in [0, 1)");
  if (!(epsilon > 0.0)) throw std::invalid_argument("epsilon must be > 0");
  if (!(weight_decay >= 0.0) || !std::isfinite(weight_decay))
    throw std::invalid_argument("weight_decay must be a finite value >= 0");
}

Optimizer::Optimizer(OptimizerConfig config, const Mlp& model) : config_(config) {
  config_.validate();
  const bool first = config_.kind == OptimizerKind::sgd_amom || config_.kind == OptimizerKind::adam;
  const bool second = config_.has_second_moment();
  for (const Layer& layer : model.layers()) {
    Buffers b;
    if (first) {
      b.first_w = Dense(layer.weights().shape());
      b.first_b = Dense(layer.bias().shape());
    }
    if (second) {
      b.second_w = Dense(layer.weights().shape());
      b.second_b = Dense(layer.bias().shape());
    }
    buffers_.push_back(std::move(b));
  }
}

void Optimizer::step_tensor(std::span<const double> g, std::span<const double> w, double decay,
                            Dense& first, Dense& second, std::span<double> out) const {
  const std::size_t n = g.size();
  auto grad = [&](std::size_t i) { return decay > 0.0 ? g[i] + decay * w[i] : g[i]; };
  switch (config_.kind) {
    case OptimizerKind::sgd:
      for (std::size_t i = 0; i < n; ++i) out[i] = -grad(i);
      break;
    case OptimizerKind::sgd_amom: {
      const double m = config_.momentum;
      for (std::size_t i = 0; i < n; ++i) {
        first[i] = m * first[i] + (1.0 - m) * grad(i);
        out[i] = -first[i];
      }
      break;
    }
    case OptimizerKind::adam: {
      const double b1 = config_.beta1, b2 = config_.beta2, eps = config_.epsilon;
      const double t = static_cast<double>(steps_);
      const double c1 = 1.0 - std::pow(b1, t), c2 = 1.0 - std::pow(b2, t);
      for (std::size_t i = 0; i < n; ++i) {
        const double gi = grad(i);
        first[i] = b1 * first[i] + (1.0 - b1) * gi;
        second[i] = b2 * second[i] + (1.0 - b2) * gi * gi;
        out[i] = -(first[i] / c1) / (std::sqrt(second[i] / c2) + eps);
      }
      break;
    }
    case OptimizerKind::rmsprop: {
      const double d = config_.rmsprop_decay, eps = config_.epsilon;
      for (std::size_t i = 0; i < n; ++i) {
        const double gi = grad(i);
        second[i] = d * second[i] + (1.0 - d) * gi * gi;
        out[i] = -gi / (std::sqrt(second[i]) + eps);
      }
      break;
    }
    case OptimizerKind::adagrad: {
      const double eps = config_.epsilon;
      for (std::size_t i = 0; i < n; ++i) {
        const double gi = grad(i);
        second[i] += gi * gi;
        out[i] = -gi / (std::sqrt(second[i]) + eps);
      }
      break;
    }
  }
}

StepUpdate Optimizer::propose_step(const GradientSet& grads, const Mlp& model) {
  if (grads.layers.size() != buffers_.size() || model.layer_count() != buffers_.size())
    throw std::invalid_argument("propose_step: gradient/model layer count mismatch");
  for (std::size_t l = 0; l < buffers_.size(); ++l) {
    const Layer& layer = model.layer(l);
    const LayerGrad& g = grads.layers[l];
    if (g.weights.shape() != layer.weights().shape() || g.bias.shape() != layer.bias().shape())
      throw std::invalid_argument("propose_step: gradient shapes do not mirror layer " +
                                  std::to_string(l));
    check_finite(g.weights, layer, "weight");
    check_finite(g.bias, layer, "bias");
  }

  ++steps_;
  StepUpdate step;
  step.layers.reserve(buffers_.size());
  for (std::size_t l = 0; l < buffers_.size(); ++l) {
    const Layer& layer = model.layer(l);
    const LayerGrad& g = grads.layers[l];
    Buffers& b = buffers_[l];
    LayerStep s{Dense(g.weights.shape()), Dense(g.bias.shape())};
    step_tensor(g.weights.flat(), layer.weights().flat(), config_.weight_decay, b.first_w,
                b.second_w, s.weights.flat());
    step_tensor(g.bias.flat(), layer.bias().flat(), 0.0, b.first_b, b.second_b, s.bias.flat());
    step.layers.push_back(std::move(s));
  }
  return step;
}

MomentProbe Optimizer::probe_second_moment(std::size_t epoch) const {
  if (!config_.has_second_moment())
    throw std::logic_error("optimizer '" + to_string(config_.kind) +
                           "' keeps no second-moment buffer to probe");
  MomentProbe probe;
  probe.epoch = epoch;
  for (const Buffers& b : buffers_) {
    const auto v = b.second_w.flat();
    probe.layers.push_back({percentile(v, 10.0), percentile(v, 50.0), percentile(v, 90.0)});
  }
  return probe;
}

void apply_raw(Mlp& model, const StepUpdate& step, std::span<const double> rates) {
  if (step.layers.size() != model.layer_count() || rates.size() != model.layer_count())
    throw std::invalid_argument("apply_raw: step/rates do not match the model's " +
                                std::to_string(model.layer_count()) + " layers");
  for (std::size_t l = 0; l < rates.size(); ++l)
    if (!std::isfinite(rates[l]) || rates[l] < 0.0)
      throw std::invalid_argument("apply_raw: rate of layer " + std::to_string(l) +
                                  " must be finite and >= 0");
  for (std::size_t l = 0; l < rates.size(); ++l) {
    Layer& layer = model.layer(l);
    const LayerStep& s = step.layers[l];
    if (s.weights.shape() != layer.weights().shape() || s.bias.shape() != layer.bias().shape())
      throw std::invalid_argument("apply_raw: step shape mismatch in layer " + std::to_string(l));
    axpy(rates[l], s.weights.flat(), layer.weights().flat());
    axpy(rates[l], s.bias.flat(), layer.bias().flat());
  }
}

double percentile(std::span<const double> values, double q) {
  if (values.empty()) throw std::invalid_argument("percentile of an empty set");
  if (!(q >= 0.0 && q <= 100.0)) throw std::invalid_argument("percentile q must lie in [0, 100]");
  std::vector<double> sorted(values.begin(), values.end());
  std::sort(sorted.begin(), sorted.end());
  const double pos = q / 100.0 * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  return sorted[lo] + frac * (sorted[hi] - sorted[lo]);
}

void write_moment_csv(std::ostream& os, std::span<const MomentProbe> probes) {
  os << "epoch,layer_index,p10,p50,p90\n";
  for (const MomentProbe& p : probes)
    for (std::size_t l = 0; l < p.layers.size(); ++l)
      os << p.epoch << ',' << l << ',' << fmt_double(p.layers[l].p10) << ','
         << fmt_double(p.layers[l].p50) << ',' << fmt_double(p.layers[l].p90) << '\n';
}

}  // namespace layerspin
