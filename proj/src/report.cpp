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

#include "layerspin/report.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <ostream>

#include "layerspin/export.hpp"
#include "layerspin/format.hpp"

namespace layerspin {

using nlohmann::json;

RunSummary summarize_manifest(const json& m, const std::filesystem::path& path) {
  if (!m.is_object() || m.value("format", "") != kManifestFormat)
    throw std::invalid_argument(path.string() + " is not a run manifest");
  RunSummary s;
  s.manifest = path;
  s.run_id = m.at("run_id").get<std::string>();
  const json& c = m.at("config");
  s.optimizer = c.at("optimizer").at("kind").get<std::string>();
  s.weight_decay = c.at("optimizer").at("weight_decay").get<double>();
  s.update = c.at("layca").at("variant").get<std::string>();
  s.rho0 = c.at("schedule").at("rho0").get<double>();
  s.alpha = c.at("schedule").at("alpha").get<double>();
  s.epochs = c.at("epochs").get<std::size_t>();
  s.status = m.at("status").get<std::string>();
  const json& f = m.at("final");
  s.train_accuracy = f.at("train_accuracy").get<double>();
  if (!f.at("test_accuracy").is_null()) s.test_accuracy = f.at("test_accuracy").get<double>();
  s.mean_cosine_distance = f.at("mean_cosine_distance").get<double>();
  return s;
}

std::vector<RunSummary> collect_runs(const std::filesystem::path& root) {
  if (!std::filesystem::is_directory(root))
    throw std::runtime_error(root.string() + " is not a directory");
  std::vector<std::filesystem::path> paths;
  for (const auto& entry : std::filesystem::recursive_directory_iterator(root))
    if (entry.is_regular_file() && entry.path().filename() == "manifest.json")
      paths.push_back(entry.path());
  std::sort(paths.begin(), paths.end());

  std::vector<RunSummary> out;
  for (const auto& p : paths) {
    std::ifstream is(p, std::ios::binary);
    const json m = json::parse(is, nullptr, /*allow_exceptions=*/false);
    if (m.is_discarded() || !m.is_object() || m.value("format", "") != kManifestFormat) continue;
    out.push_back(summarize_manifest(m, p));
  }
  return out;
}

void write_summary_csv(std::ostream& os, std::span<const RunSummary> runs) {
  os << "run_id,optimizer,update,rho0,alpha,weight_decay,epochs,status,train_accuracy,"
        "test_accuracy,mean_cosine_distance,manifest\n";
  for (const RunSummary& r : runs) {
    os << r.run_id << ',' << r.optimizer << ',' << r.update << ',' << fmt_double(r.rho0) << ','
       << fmt_double(r.alpha) << ',' << fmt_double(r.weight_decay) << ',' << r.epochs << ','
       << r.status << ',' << fmt_double(r.train_accuracy) << ',';
    if (r.test_accuracy) os << fmt_double(*r.test_accuracy);
    os << ',' << fmt_double(r.mean_cosine_distance) << ',' << r.manifest.generic_string() << '\n';
  }
}

void print_summary_table(std::ostream& os, std::span<const RunSummary> runs) {
  std::size_t id_width = 6;
  for (const RunSummary& r : runs) id_width = std::max(id_width, r.run_id.size());
  char line[256];
  std::snprintf(line, sizeof line, "%-*s  %-8s  %-6s  %10s  %6s  %9s  %9s  %9s\n",
                static_cast<int>(id_width), "run_id", "optim", "update", "rho0", "alpha",
                "train_acc", "eta", "rotation");
  os << line;
  for (const RunSummary& r : runs) {
    char eta[16] = "-";
    if (r.test_accuracy) std::snprintf(eta, sizeof eta, "%.4f", *r.test_accuracy);
    std::snprintf(line, sizeof line, "%-*s  %-8s  %-6s  %10.3g  %6.2f  %9.4f  %9s  %9.4f%s\n",
                  static_cast<int>(id_width), r.run_id.c_str(), r.optimizer.c_str(),
                  r.update.c_str(), r.rho0, r.alpha, r.train_accuracy, eta,
                  r.mean_cosine_distance, r.status == "completed" ? "" : "  (aborted)");
    os << line;
  }
}

}  // namespace layerspin
