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

#ifndef LAYERSPIN_EXPORT_HPP_
#define LAYERSPIN_EXPORT_HPP_

#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "layerspin/experiment.hpp"

namespace layerspin {

inline constexpr const char* kManifestFormat = "layerspin.manifest.v1";

std::string sha256_hex(std::string_view bytes);
std::string sha256_file(const std::filesystem::path& path);

/// Writes `bytes` to `path`, creating parent directories.
void write_file(const std::filesystem::path& path, std::string_view bytes);

/// run_id,epoch,global_rate,train_loss,train_accuracy,test_accuracy,
/// mean_cosine_distance,skipped_steps
void write_metrics_csv(std::ostream& os, const std::string& run_id,
                       std::span<const EpochMetrics> metrics);

/// Line chart of the rotation curves: one polyline per layer colored by
/// depth, x = epoch, y from 0 to 1.05 * the largest distance.
void write_curves_svg(std::ostream& os, const RotationRecord& record, const std::string& title);

/// Binary PGM (P5, maxval 255). Scaling is symmetric around zero: the largest
/// |v| maps to 0 or 255 and 0 maps to 128.
void write_feature_pgm(std::ostream& os, std::span<const double> values, std::size_t rows,
                       std::size_t cols);

/// Hidden neurons of layer 0 chosen for feature export, ascending.
std::vector<std::size_t> pick_feature_neurons(const Mlp& model, std::size_t count,
                                              std::uint64_t seed);

/// Writes every output of a finished run into `dir` and returns the manifest
/// (also written as dir/manifest.json). Digests cover every other file.
nlohmann::json write_run_outputs(const RunResult& result, const Dataset& train,
                                 const std::filesystem::path& dir);

/// load_datasets + train + write_run_outputs. A replay file named in the
/// config is loaded and its step count validated before training.
nlohmann::json run_experiment(const RunConfig& config, const std::filesystem::path& dir,
                              const EpochCallback& on_epoch = {});

}  // namespace layerspin

#endif  // LAYERSPIN_EXPORT_HPP_
