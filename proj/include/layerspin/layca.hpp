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

#ifndef LAYERSPIN_LAYCA_HPP_
#define LAYERSPIN_LAYCA_HPP_

#include <limits>
#include <span>
#include <string>
#include <vector>

#include "layerspin/tensor.hpp"

// Rotation-controlled weight updates.
//
// Layca turns any raw step s of a layer with weights w into a rotation of
// exactly atan(rate) radians:
//   1. s <- s - (s.w / w.w) w          project onto the tangent space of w
//   2. s <- s * |w| / |s|              rescale to the weight norm
//   3. w <- w + rate * s               update
//   4. w <- w * |w_init| / |w|         back onto the initial-norm sphere
// Since s is orthogonal to w with |s| = |w|, tan(angle(w, w')) = rate.
//
// The LARS variant keeps only steps 2 and 3 and bounds the per-step norm
// growth to `cap * |w_init|`.
namespace layerspin {

enum class UpdateRule { raw, layca, lars };

UpdateRule parse_update_rule(const std::string& name);
std::string to_string(UpdateRule r);

struct LaycaConfig {
  UpdateRule variant = UpdateRule::layca;
  /// Per-step norm growth limit for lars, as a fraction of |w_init|.
  double lars_norm_growth_cap = 1e-4;

  void validate() const;
};

/// A step is skipped when its (projected) norm falls below this fraction of
/// |w|: the normalization would divide by ~0.
inline constexpr double kDegenerateStepRatio = 1e-12;

enum class TransformStatus { applied, skipped };

/// In-place Layca update of a flattened weight vector. On `skipped` the
/// weights are left bit-identical. Throws std::invalid_argument if w is zero
/// or the lengths differ.
TransformStatus layca_update(std::span<double> w, double w_init_norm,
                             std::span<const double> step, double rate);

/// In-place LARS update. `cap` is the growth limit as a fraction of
/// w_init_norm; pass infinity for an uncapped update.
TransformStatus lars_update(std::span<double> w, double w_init_norm, std::span<const double> step,
                            double rate, double cap);

struct TransformResult {
  Dense weights;
  TransformStatus status = TransformStatus::applied;
};

TransformResult layca_transform(const Dense& w, double w_init_norm, const Dense& step,
                                double rate);
TransformResult lars_transform(const Dense& w, double w_init_norm, const Dense& step, double rate,
                               double cap = 1e-4);

/// Step 1 alone: s minus its component along w.
std::vector<double> project_orthogonal(std::span<const double> step, std::span<const double> w);

/// arccos of the clamped cosine similarity, in radians.
double rotation_angle(std::span<const double> before, std::span<const double> after);

}  // namespace layerspin

#endif  // LAYERSPIN_LAYCA_HPP_
