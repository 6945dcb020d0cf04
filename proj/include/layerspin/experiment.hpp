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

#ifndef LAYERSPIN_EXPERIMENT_HPP_
#define LAYERSPIN_EXPERIMENT_HPP_

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "layerspin/config.hpp"
#include "layerspin/dataset.hpp"
#include "layerspin/model.hpp"
#include "layerspin/optimizers.hpp"
#include "layerspin/rotation.hpp"

namespace layerspin {

struct DataBundle {
  Dataset train;
  std::optional<Dataset> test;
};

DataBundle load_datasets(const DatasetSpec& spec);

/// End-of-epoch measurements. Epoch 0 describes the initial model.
struct EpochMetrics {
  std::size_t epoch = 0;
  double global_rate = 0.0;
  double train_loss = 0.0;
  double train_accuracy = 0.0;
  std::optional<double> test_accuracy;
  double mean_cosine_distance = 0.0;
  std::size_t skipped_steps = 0;  // within this epoch
};

enum class RunStatus { completed, aborted };

struct RunResult {
  RunResult(RunConfig c, Mlp m) : config(std::move(c)), model(std::move(m)) {}

  RunConfig config;
  Mlp model;
  RotationRecord record;
  std::vector<EpochMetrics> metrics;
  std::vector<MomentProbe> probes;
  std::size_t train_size = 0;
  std::size_t test_size = 0;
  std::size_t steps_per_epoch = 0;
  std::size_t steps = 0;
  std::size_t skipped_steps = 0;
  RunStatus status = RunStatus::completed;
  std::size_t last_good_epoch = 0;
  std::string abort_reason;

  const EpochMetrics& final_metrics() const { return metrics.back(); }
};

std::size_t steps_per_epoch(std::size_t samples, std::size_t batch_size);

/// Called after every epoch (including epoch 0) with the metrics just taken.
using EpochCallback = std::function<void(const EpochMetrics&)>;

/// Deterministic training loop. A non-finite loss, gradient or weight stops
/// the run with status `aborted`; everything up to the last good epoch is
/// kept. Throws ConfigError when `replay` does not cover exactly
/// epochs * steps_per_epoch steps for every layer.
RunResult train(const RunConfig& config, const DataBundle& data,
                const ReplaySchedule* replay = nullptr, const EpochCallback& on_epoch = {});

}  // namespace layerspin

#endif  // LAYERSPIN_EXPERIMENT_HPP_
