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

#ifndef LAYERSPIN_ROTATION_HPP_
#define LAYERSPIN_ROTATION_HPP_

#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "layerspin/model.hpp"

namespace layerspin {

/// 1 - cos(a, b), clamped to [0, 2]. Throws on a zero vector.
double cosine_distance(std::span<const double> a, std::span<const double> b);

struct CurvePoint {
  double epoch = 0.0;
  double cosine_distance = 0.0;
};

/// Layer rotation curves (distance of each layer's weights from their
/// initialization over time) and per-step rotation angles.
class RotationRecord {
 public:
  RotationRecord() = default;
  explicit RotationRecord(std::vector<std::string> layer_names);
  static RotationRecord for_model(const Mlp& model);

  std::size_t layer_count() const noexcept { return names_.size(); }
  const std::string& layer_name(std::size_t l) const { return names_.at(l); }

  /// Appends the current distance from initialization of every layer.
  /// Epochs must be strictly increasing; fractional epochs are allowed for
  /// per-step sampling.
  void record_epoch(const Mlp& model, double epoch);

  /// Appends rotation_angle(before, after) for layer l.
  void record_step_angle(std::size_t l, std::span<const double> before,
                         std::span<const double> after);
  /// Appends an angle measured elsewhere (0 for a skipped step).
  void record_angle(std::size_t l, double theta);

  const std::vector<CurvePoint>& curve(std::size_t l) const { return curves_.at(l); }
  const std::vector<double>& angles(std::size_t l) const { return angles_.at(l); }

  /// Last recorded distance of layer l (0 when nothing was recorded).
  double final_distance(std::size_t l) const;
  double mean_final_distance() const;

 private:
  std::vector<std::string> names_;
  std::vector<std::vector<CurvePoint>> curves_;
  std::vector<std::vector<double>> angles_;
};

/// Per-layer, per-step rates that make Layca reproduce a recorded run's
/// rotation angles: rate = tan(theta).
struct ReplaySchedule {
  std::string source_run;
  std::vector<std::vector<double>> rates;  // [layer][step]

  std::size_t layer_count() const noexcept { return rates.size(); }
  std::size_t steps() const noexcept { return rates.empty() ? 0 : rates.front().size(); }
};

/// Throws std::invalid_argument naming (layer, step) for an angle >= pi/2,
/// and when layers recorded different step counts.
ReplaySchedule build_replay(const RotationRecord& record, std::string source_run = {});

std::string replay_to_json(const ReplaySchedule& schedule);
ReplaySchedule replay_from_json(const std::string& text);
void save_replay(const ReplaySchedule& schedule, const std::filesystem::path& path);
ReplaySchedule load_replay(const std::filesystem::path& path);

/// run_id,layer_index,layer_name,epoch,cosine_distance
void write_curves_csv(std::ostream& os, const std::string& run_id, const RotationRecord& record);
/// run_id,layer_index,step,theta_radians
void write_angles_csv(std::ostream& os, const std::string& run_id, const RotationRecord& record);

}  // namespace layerspin

#endif  // LAYERSPIN_ROTATION_HPP_
