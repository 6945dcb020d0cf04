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

#include "layerspin/rotation.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "json.hpp"
#include "layerspin/format.hpp"
#include "layerspin/layca.hpp"

namespace layerspin {

using nlohmann::json;

double cosine_distance(std::span<const double> a, std::span<const double> b) {
  const double na = l2_norm(a), nb = l2_norm(b);
  if (!(na > 0.0) || !(nb > 0.0))
    throw std::invalid_argument("cosine_distance: zero vector has no direction");
  // Identical vectors give exactly 0 rather than rounding noise.
  if (std::equal(a.begin(), a.end(), b.begin(), b.end())) return 0.0;
  return std::clamp(1.0 - dot(a, b) / (na * nb), 0.0, 2.0);
}

RotationRecord::RotationRecord(std::vector<std::string> layer_names)
    : names_(std::move(layer_names)), curves_(names_.size()), angles_(names_.size()) {}

RotationRecord RotationRecord::for_model(const Mlp& model) {
  std::vector<std::string> names;
  for (const Layer& layer : model.layers()) names.push_back(layer.name());
  return RotationRecord(std::move(names));
}

void RotationRecord::record_epoch(const Mlp& model, double epoch) {
  if (model.layer_count() != names_.size())
    throw std::invalid_argument("record_epoch: model has " + std::to_string(model.layer_count()) +
                                " layers, record has " + std::to_string(names_.size()));
  for (const auto& c : curves_)
    if (!c.empty() && !(epoch > c.back().epoch))
      throw std::invalid_argument("record_epoch: epoch " + fmt_double(epoch) +
                                  " does not follow " + fmt_double(c.back().epoch));
  for (std::size_t l = 0; l < names_.size(); ++l) {
    const Layer& layer = model.layer(l);
    curves_[l].push_back({epoch, cosine_distance(layer.weights_init().flat(), layer.weights().flat())});
  }
}

void RotationRecord::record_step_angle(std::size_t l, std::span<const double> before,
                                       std::span<const double> after) {
  record_angle(l, rotation_angle(before, after));
}

void RotationRecord::record_angle(std::size_t l, double theta) {
  if (!(theta >= 0.0)) throw std::invalid_argument("record_angle: angle must be >= 0");
  angles_.at(l).push_back(theta);
}

double RotationRecord::final_distance(std::size_t l) const {
  const auto& c = curves_.at(l);
  return c.empty() ? 0.0 : c.back().cosine_distance;
}

double RotationRecord::mean_final_distance() const {
  if (names_.empty()) return 0.0;
  double sum = 0.0;
  for (std::size_t l = 0; l < names_.size(); ++l) sum += final_distance(l);
  return sum / static_cast<double>(names_.size());
}

ReplaySchedule build_replay(const RotationRecord& record, std::string source_run) {
  ReplaySchedule out;
  out.source_run = std::move(source_run);
  for (std::size_t l = 0; l < record.layer_count(); ++l) {
    const auto& angles = record.angles(l);
    if (l > 0 && angles.size() != out.rates.front().size())
      throw std::invalid_argument("build_replay: layer " + std::to_string(l) + " recorded " +
                                  std::to_string(angles.size()) + " steps, layer 0 recorded " +
                                  std::to_string(out.rates.front().size()));
    std::vector<double> rates(angles.size());
    for (std::size_t t = 0; t < angles.size(); ++t) {
      if (!(angles[t] < std::numbers::pi / 2))
        throw std::invalid_argument("build_replay: angle " + fmt_double(angles[t]) +
                                    " at (layer " + std::to_string(l) + ", step " +
                                    std::to_string(t) + ") is not below pi/2");
      rates[t] = std::tan(angles[t]);
    }
    out.rates.push_back(std::move(rates));
  }
  return out;
}

std::string replay_to_json(const ReplaySchedule& schedule) {
  json j;
  j["format"] = "layerspin.replay.v1";
  j["source_run"] = schedule.source_run;
  j["layers"] = schedule.layer_count();
  j["steps"] = schedule.steps();
  j["rates"] = schedule.rates;
  return j.dump();
}

ReplaySchedule replay_from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw std::invalid_argument(std::string("replay file is not valid JSON: ") + e.what());
  }
  if (!j.is_object() || j.value("format", "") != "layerspin.replay.v1" || !j.contains("rates"))
    throw std::invalid_argument("replay file: missing format tag or 'rates'");
  ReplaySchedule out;
  out.source_run = j.value("source_run", "");
  out.rates = j.at("rates").get<std::vector<std::vector<double>>>();
  for (std::size_t l = 0; l < out.rates.size(); ++l) {
    if (out.rates[l].size() != out.steps())
      throw std::invalid_argument("replay file: layers have different step counts");
    for (double r : out.rates[l])
      if (!std::isfinite(r) || r < 0.0)
        throw std::invalid_argument("replay file: rates must be finite and >= 0");
  }
  if (j.contains("steps") && j["steps"].get<std::size_t>() != out.steps())
    throw std::invalid_argument("replay file: 'steps' does not match the rate arrays");
  return out;
}

void save_replay(const ReplaySchedule& schedule, const std::filesystem::path& path) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot write " + path.string());
  os << replay_to_json(schedule) << '\n';
  if (!os) throw std::runtime_error("write failed: " + path.string());
}

ReplaySchedule load_replay(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("cannot read replay file " + path.string());
  std::stringstream ss;
  ss << is.rdbuf();
  return replay_from_json(ss.str());
}

void write_curves_csv(std::ostream& os, const std::string& run_id, const RotationRecord& record) {
  os << "run_id,layer_index,layer_name,epoch,cosine_distance\n";
  for (std::size_t l = 0; l < record.layer_count(); ++l)
    for (const CurvePoint& p : record.curve(l))
      os << run_id << ',' << l << ',' << record.layer_name(l) << ',' << fmt_double(p.epoch) << ','
         << fmt_double(p.cosine_distance) << '\n';
}

void write_angles_csv(std::ostream& os, const std::string& run_id, const RotationRecord& record) {
  os << "run_id,layer_index,step,theta_radians\n";
  for (std::size_t l = 0; l < record.layer_count(); ++l) {
    const auto& a = record.angles(l);
    for (std::size_t t = 0; t < a.size(); ++t)
      os << run_id << ',' << l << ',' << t << ',' << fmt_double(a[t]) << '\n';
  }
}

}  // namespace layerspin
