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

#include "layerspin/layca.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace layerspin {
namespace {

void check_args(std::span<const double> w, std::span<const double> step, double rate,
                const char* who) {
  if (w.size() != step.size())
    throw std::invalid_argument(std::string(who) + ": weights and step lengths differ (" +
                                std::to_string(w.size()) + " vs " + std::to_string(step.size()) +
                                ")");
  if (!(rate >= 0.0) || !std::isfinite(rate))
    throw std::invalid_argument(std::string(who) + ": rate must be finite and >= 0");
}

}  // namespace

UpdateRule parse_update_rule(const std::string& name) {
  if (name == "raw" || name == "none") return UpdateRule::raw;
  if (name == "layca") return UpdateRule::layca;
  if (name == "lars") return UpdateRule::lars;
  throw std::invalid_argument("unknown update rule '" + name + "' (expected raw, layca or lars)");
}

std::string to_string(UpdateRule r) {
  switch (r) {
    case UpdateRule::raw: return "raw";
    case UpdateRule::layca: return "layca";
    case UpdateRule::lars: return "lars";
  }
  return "?";
}

void LaycaConfig::validate() const {
  if (variant == UpdateRule::lars && !(lars_norm_growth_cap > 0.0))
    throw std::invalid_argument("lars_norm_growth_cap must be > 0");
}

TransformStatus layca_update(std::span<double> w, double w_init_norm,
                             std::span<const double> step, double rate) {
  check_args(w, step, rate, "layca_update");
  const std::span<const double> cw(w);
  const double ww = dot(cw, cw);
  if (!(ww > 0.0)) throw std::invalid_argument("layca_update: weight vector is zero");
  const double along = dot(step, cw) / ww;

  double perp_sq = 0.0;
  for (std::size_t i = 0; i < w.size(); ++i) {
    const double p = step[i] - along * w[i];
    perp_sq += p * p;
  }
  const double w_norm = std::sqrt(ww);
  const double perp_norm = std::sqrt(perp_sq);
  if (perp_norm < kDegenerateStepRatio * w_norm) return TransformStatus::skipped;

  const double factor = rate * w_norm / perp_norm;
  for (std::size_t i = 0; i < w.size(); ++i) w[i] += factor * (step[i] - along * w[i]);
  scale(w, w_init_norm / l2_norm(cw));
  return TransformStatus::applied;
}

TransformStatus lars_update(std::span<double> w, double w_init_norm, std::span<const double> step,
                            double rate, double cap) {
  check_args(w, step, rate, "lars_update");
  const std::span<const double> cw(w);
  const double w_norm = l2_norm(cw);
  if (!(w_norm > 0.0)) throw std::invalid_argument("lars_update: weight vector is zero");
  const double s_norm = l2_norm(step);
  if (s_norm < kDegenerateStepRatio * w_norm) return TransformStatus::skipped;

  axpy(rate * w_norm / s_norm, step, w);
  const double limit = w_norm + cap * w_init_norm;
  const double new_norm = l2_norm(cw);
  if (new_norm > limit) scale(w, limit / new_norm);
  return TransformStatus::applied;
}

TransformResult layca_transform(const Dense& w, double w_init_norm, const Dense& step,
                                double rate) {
  TransformResult out{w, TransformStatus::applied};
  out.status = layca_update(out.weights.flat(), w_init_norm, step.flat(), rate);
  return out;
}

TransformResult lars_transform(const Dense& w, double w_init_norm, const Dense& step, double rate,
                               double cap) {
  TransformResult out{w, TransformStatus::applied};
  out.status = lars_update(out.weights.flat(), w_init_norm, step.flat(), rate, cap);
  return out;
}

std::vector<double> project_orthogonal(std::span<const double> step, std::span<const double> w) {
  const double ww = dot(w, w);
  if (!(ww > 0.0)) throw std::invalid_argument("project_orthogonal: weight vector is zero");
  const double along = dot(step, w) / ww;
  std::vector<double> out(step.size());
  for (std::size_t i = 0; i < step.size(); ++i) out[i] = step[i] - along * w[i];
  return out;
}

double rotation_angle(std::span<const double> before, std::span<const double> after) {
  const double nb = l2_norm(before), na = l2_norm(after);
  if (!(nb > 0.0) || !(na > 0.0))
    throw std::invalid_argument("rotation_angle: zero vector has no direction");
  // atan2 of the orthogonal and parallel parts stays accurate near 0 and pi,
  // where acos of the cosine loses half the digits.
  const double c = dot(before, after) / dot(before, before);
  double perp = 0.0;
  for (std::size_t i = 0; i < before.size(); ++i) {
    const double r = after[i] - c * before[i];
    perp += r * r;
  }
  return std::atan2(std::sqrt(perp) * nb, dot(before, after));
}

}  // namespace layerspin
