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

#ifndef LAYERSPIN_CONFIG_HPP_
#define LAYERSPIN_CONFIG_HPP_

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"
#include "layerspin/dataset.hpp"
#include "layerspin/layca.hpp"
#include "layerspin/model.hpp"
#include "layerspin/optimizers.hpp"
#include "layerspin/schedules.hpp"

namespace layerspin {

/// A configuration that violates the run schema. The message starts with
/// the offending field path.
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

enum class DataSource { mnist_idx, synthetic_blobs };

struct DatasetSpec {
  DataSource source = DataSource::mnist_idx;
  // mnist_idx
  std::filesystem::path train_images;
  std::filesystem::path train_labels;
  std::filesystem::path test_images;
  std::filesystem::path test_labels;
  std::size_t per_class_cap = 1000;
  // synthetic_blobs
  BlobSpec blobs;
  std::size_t test_per_class = 50;
};

struct MonitorConfig {
  bool record_angles = true;
  /// Sample rotation curves after every step instead of every epoch.
  bool per_step_curves = false;
  /// Epochs (1-based, end of epoch) at which optimizer moments are probed.
  std::vector<std::size_t> probe_epochs;
  /// Hidden neurons of layer 0 exported as feature vectors/images.
  std::size_t feature_neurons = 5;
};

/// One training run. Serialized as the JSON documented in
/// schemas/run_config.schema.json.
struct RunConfig {
  std::string run_id = "run";
  std::uint64_t seed = 0;
  std::size_t epochs = 1;
  std::size_t batch_size = 128;
  ModelSpec model;
  OptimizerConfig optimizer;
  LaycaConfig update;
  ScheduleConfig schedule;
  DatasetSpec dataset;
  MonitorConfig monitor;
  /// When set, per-layer per-step rates come from this replay file instead of
  /// the schedule.
  std::filesystem::path replay_file;
  std::filesystem::path output_dir;

  /// Checks cross-field rules (layca excludes weight decay, alpha range,
  /// decay epochs, ...). Throws ConfigError.
  void validate() const;
};

enum class GridMode { cross, product };

/// Sweep over initial rates and alphas. `cross` runs every rate at alpha 0
/// plus every alpha at `pivot_rate` (shared point once); `product` runs the
/// full Cartesian product.
struct GridSpec {
  std::vector<double> rates = standard_grid();
  std::vector<double> alphas = standard_alphas();
  double pivot_rate = std::pow(3.0, -3);
  GridMode mode = GridMode::cross;
};

struct GridPoint {
  double rate = 0.0;
  double alpha = 0.0;
};

std::vector<GridPoint> expand_grid(const GridSpec& grid);

/// Relative paths in `j` are resolved against `base_dir`.
RunConfig parse_run_config(const nlohmann::json& j, const std::filesystem::path& base_dir = {});
RunConfig load_run_config(const std::filesystem::path& path);
nlohmann::json to_json(const RunConfig& config);

/// The optional "grid" section of a config file (defaults when absent).
GridSpec parse_grid_spec(const nlohmann::json& j);
GridSpec load_grid_spec(const std::filesystem::path& path);

}  // namespace layerspin

#endif  // LAYERSPIN_CONFIG_HPP_
