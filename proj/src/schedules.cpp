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

#include "layerspin/schedules.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace layerspin {

void ScheduleConfig::validate() const {
  if (!(initial_rate >= 0.0) || !std::isfinite(initial_rate))
    throw std::invalid_argument("schedule: initial rate must be finite and >= 0");
  if (!(alpha >= -1.0 && alpha <= 1.0))
    throw std::invalid_argument("schedule: alpha must lie in [-1, 1]");
  if (total_epochs == 0) throw std::invalid_argument("schedule: total_epochs must be >= 1");
  for (std::size_t i = 0; i < decay.size(); ++i) {
    if (i > 0 && decay[i].epoch <= decay[i - 1].epoch)
      throw std::invalid_argument("schedule: decay epochs must be strictly increasing");
    if (decay[i].epoch >= total_epochs)
      throw std::invalid_argument("schedule: decay epoch " + std::to_string(decay[i].epoch) +
                                  " is not before total_epochs " + std::to_string(total_epochs));
    if (!(decay[i].factor > 1.0))
      throw std::invalid_argument("schedule: decay factors must be > 1");
  }
}

double alpha_multiplier(std::size_t l, std::size_t layer_count, double alpha) {
  if (!(alpha >= -1.0 && alpha <= 1.0))
    throw std::invalid_argument("alpha_multiplier: alpha must lie in [-1, 1]");
  if (l >= layer_count) throw std::invalid_argument("alpha_multiplier: layer index out of range");
  if (layer_count == 1) return 1.0;
  const double span = static_cast<double>(layer_count - 1);
  if (alpha > 0.0) return std::pow(1.0 - alpha, 5.0 * static_cast<double>(layer_count - 1 - l) / span);
  return std::pow(1.0 + alpha, 5.0 * static_cast<double>(l) / span);
}

double global_rate(const ScheduleConfig& config, std::size_t epoch) {
  double rate = config.initial_rate;
  if (epoch < config.warmup_epochs) {
    const double start = config.initial_rate / 10.0;
    rate = start + (config.initial_rate - start) * static_cast<double>(epoch) /
                       static_cast<double>(config.warmup_epochs);
  }
  for (const RateDecay& d : config.decay)
    if (d.epoch <= epoch) rate /= d.factor;
  return rate;
}

std::vector<double> effective_rates(const ScheduleConfig& config, std::size_t epoch,
                                    std::size_t layer_count) {
  const double rho = global_rate(config, epoch);
  std::vector<double> rates(layer_count);
  for (std::size_t l = 0; l < layer_count; ++l)
    rates[l] = alpha_multiplier(l, layer_count, config.alpha) * rho;
  return rates;
}

std::vector<double> standard_grid() {
  std::vector<double> grid;
  for (int e = -7; e <= 2; ++e) grid.push_back(std::pow(3.0, e));
  return grid;
}

std::vector<double> standard_alphas() {
  std::vector<double> alphas;
  for (int i = -6; i <= 6; ++i) alphas.push_back(static_cast<double>(3 * i) / 20.0);
  return alphas;
}

}  // namespace layerspin
