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

#ifndef LAYERSPIN_SCHEDULES_HPP_
#define LAYERSPIN_SCHEDULES_HPP_

#include <cstddef>
#include <vector>

namespace layerspin {

struct RateDecay {
  std::size_t epoch = 0;
  double factor = 1.0;  // the rate is divided by this from `epoch` on
};

/// Global rate over epochs plus the alpha-shaped layer multipliers.
struct ScheduleConfig {
  double initial_rate = 0.0;  // rho(0)
  double alpha = 0.0;         // in [-1, 1]
  std::vector<RateDecay> decay;
  std::size_t warmup_epochs = 0;
  std::size_t total_epochs = 1;

  void validate() const;
};

/// Layer-wise multiplier for layer l (forward order) out of L:
///   alpha > 0:  (1 - alpha)^(5 (L - 1 - l) / (L - 1))
///   alpha <= 0: (1 + alpha)^(5 l / (L - 1))
/// L == 1 always gives 1.
double alpha_multiplier(std::size_t l, std::size_t layer_count, double alpha);

/// rho(epoch). During warmup the rate rises linearly from rho0 / 10 at epoch 0
/// to rho0 at epoch == warmup_epochs; every decay whose epoch has been reached
/// divides the result.
double global_rate(const ScheduleConfig& config, std::size_t epoch);

/// alpha_multiplier(l) * global_rate(epoch) for each layer.
std::vector<double> effective_rates(const ScheduleConfig& config, std::size_t epoch,
                                    std::size_t layer_count);

/// 3^-7, 3^-6, ..., 3^2
std::vector<double> standard_grid();

/// Thirteen alphas, -0.9 to 0.9 in steps of 0.15.
std::vector<double> standard_alphas();

}  // namespace layerspin

#endif  // LAYERSPIN_SCHEDULES_HPP_
