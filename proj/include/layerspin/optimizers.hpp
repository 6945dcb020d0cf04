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

#ifndef LAYERSPIN_OPTIMIZERS_HPP_
#define LAYERSPIN_OPTIMIZERS_HPP_

#include <cstdint>
#include <iosfwd>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "layerspin/model.hpp"

namespace layerspin {

/// A non-finite value reached the update path.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class OptimizerKind { sgd, sgd_amom, adam, rmsprop, adagrad };

OptimizerKind parse_optimizer_kind(const std::string& name);
std::string to_string(OptimizerKind k);

struct OptimizerConfig {
  OptimizerKind kind = OptimizerKind::sgd;
  double momentum = 0.9;  // sgd_amom
  double beta1 = 0.9;     // adam
  double beta2 = 0.999;   // adam
  double rmsprop_decay = 0.9;
  double epsilon = 1e-8;
  /// Coupled decay: the gradient of multiplicative weights becomes g + wd * w.
  double weight_decay = 0.0;

  void validate() const;
  bool has_second_moment() const {
    return kind == OptimizerKind::adam || kind == OptimizerKind::rmsprop ||
           kind == OptimizerKind::adagrad;
  }
};

/// Raw per-layer deltas. Sign is folded in: the plain update is w += rate * s.
struct LayerStep {
  Dense weights;
  Dense bias;
};

struct StepUpdate {
  std::vector<LayerStep> layers;
};

struct MomentPercentiles {
  double p10 = 0.0;
  double p50 = 0.0;
  double p90 = 0.0;
};

/// Percentiles of the second-raw-moment buffer of every layer's
/// multiplicative weights.
struct MomentProbe {
  std::size_t epoch = 0;
  std::vector<MomentPercentiles> layers;
};

/// Base step proposer. Owns the moment buffers of one training run.
///
///   sgd      s = -g
///   sgd_amom v = m v + (1 - m) g,              s = -v
///   adam     m1 = b1 m1 + (1 - b1) g, v = b2 v + (1 - b2) g^2,
///            s = -(m1 / (1 - b1^t)) / (sqrt(v / (1 - b2^t)) + eps)
///   rmsprop  v = d v + (1 - d) g^2,             s = -g / (sqrt(v) + eps)
///   adagrad  v = v + g^2,                       s = -g / (sqrt(v) + eps)
class Optimizer {
 public:
  Optimizer(OptimizerConfig config, const Mlp& model);

  const OptimizerConfig& config() const noexcept { return config_; }
  std::uint64_t steps_taken() const noexcept { return steps_; }

  /// Throws NumericalError naming the layer if a gradient is not finite.
  StepUpdate propose_step(const GradientSet& grads, const Mlp& model);

  /// Linear-interpolation percentiles of each layer's weight second-moment
  /// buffer. Throws std::logic_error for optimizers without one.
  MomentProbe probe_second_moment(std::size_t epoch) const;

  /// Second-moment buffer of layer l's weights (empty for sgd / sgd_amom).
  const Dense& second_moment(std::size_t l) const { return buffers_.at(l).second_w; }
  const Dense& first_moment(std::size_t l) const { return buffers_.at(l).first_w; }

 private:
  struct Buffers {
    Dense first_w, first_b;
    Dense second_w, second_b;
  };

  void step_tensor(std::span<const double> g, std::span<const double> w, double decay,
                   Dense& first, Dense& second, std::span<double> out) const;

  OptimizerConfig config_;
  std::vector<Buffers> buffers_;
  std::uint64_t steps_ = 0;
};

/// The plain update w += rates[l] * s, b += rates[l] * s_b for every layer.
void apply_raw(Mlp& model, const StepUpdate& step, std::span<const double> rates);

/// q-th percentile (q in [0, 100]) with linear interpolation between order
/// statistics: position q/100 * (n - 1).
double percentile(std::span<const double> values, double q);

void write_moment_csv(std::ostream& os, std::span<const MomentProbe> probes);

}  // namespace layerspin

#endif  // LAYERSPIN_OPTIMIZERS_HPP_
