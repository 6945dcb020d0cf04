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

#ifndef LAYERSPIN_REPORT_HPP_
#define LAYERSPIN_REPORT_HPP_

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"

namespace layerspin {

/// One row of a report: the headline numbers of a run manifest.
struct RunSummary {
  std::filesystem::path manifest;
  std::string run_id;
  std::string optimizer;
  std::string update;
  double rho0 = 0.0;
  double alpha = 0.0;
  double weight_decay = 0.0;
  std::size_t epochs = 0;
  std::string status;
  double train_accuracy = 0.0;
  std::optional<double> test_accuracy;
  double mean_cosine_distance = 0.0;
};

RunSummary summarize_manifest(const nlohmann::json& manifest, const std::filesystem::path& path);

/// Every manifest.json below `root`, sorted by path. Files that are not run
/// manifests are ignored.
std::vector<RunSummary> collect_runs(const std::filesystem::path& root);

/// run_id,optimizer,update,rho0,alpha,weight_decay,epochs,status,
/// train_accuracy,test_accuracy,mean_cosine_distance,manifest
void write_summary_csv(std::ostream& os, std::span<const RunSummary> runs);

/// Fixed-width table for terminals.
void print_summary_table(std::ostream& os, std::span<const RunSummary> runs);

}  // namespace layerspin

#endif  // LAYERSPIN_REPORT_HPP_
