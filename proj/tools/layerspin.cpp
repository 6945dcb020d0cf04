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

// Command-line front end: run, grid, replay, probe and report.

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include "CLI11.hpp"
#include "layerspin/config.hpp"
#include "layerspin/export.hpp"
#include "layerspin/format.hpp"
#include "layerspin/report.hpp"

namespace fs = std::filesystem;
using namespace layerspin;

namespace {

struct Overrides {
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> epochs;
  std::optional<std::size_t> batch_size;
  std::string out;
  bool quiet = false;
};

void add_override_flags(CLI::App* cmd, Overrides& o) {
  cmd->add_option("--seed", o.seed, "Override the run seed");
  cmd->add_option("--epochs", o.epochs, "Override the number of epochs")->check(CLI::PositiveNumber);
  cmd->add_option("--batch-size", o.batch_size, "Override the batch size")->check(CLI::PositiveNumber);
  cmd->add_option("--out", o.out, "Output root (default: config output_dir, $LAYERSPIN_OUT, ./runs)");
  cmd->add_flag("-q,--quiet", o.quiet, "No per-epoch progress lines");
}

RunConfig load_with_overrides(const fs::path& path, const Overrides& o) {
  RunConfig c = load_run_config(path);
  if (o.seed) c.seed = *o.seed;
  if (o.epochs) {
    c.epochs = *o.epochs;
    c.schedule.total_epochs = *o.epochs;
  }
  if (o.batch_size) c.batch_size = *o.batch_size;
  c.validate();
  return c;
}

fs::path output_root(const RunConfig& c, const Overrides& o) {
  if (!o.out.empty()) return o.out;
  if (!c.output_dir.empty()) return c.output_dir;
  if (const char* env = std::getenv("LAYERSPIN_OUT"); env != nullptr && *env != '\0') return env;
  return "runs";
}

EpochCallback progress(const std::string& run_id, std::size_t epochs, bool quiet) {
  if (quiet) return {};
  return [run_id, epochs](const EpochMetrics& m) {
    std::fprintf(stderr, "[%s] epoch %zu/%zu  loss %.4f  train %.4f  test %s  rotation %.4f\n",
                 run_id.c_str(), m.epoch, epochs, m.train_loss, m.train_accuracy,
                 m.test_accuracy ? fmt_double(*m.test_accuracy).c_str() : "-",
                 m.mean_cosine_distance);
  };
}

int finish_run(const nlohmann::json& manifest, const fs::path& dir) {
  const auto& fin = manifest.at("final");
  std::cout << manifest.at("run_id").get<std::string>() << ": train "
            << fmt_double(fin.at("train_accuracy").get<double>()) << ", eta "
            << (fin.at("test_accuracy").is_null() ? std::string("-")
                                                  : fmt_double(fin.at("test_accuracy").get<double>()))
            << ", mean rotation " << fmt_double(fin.at("mean_cosine_distance").get<double>())
            << " -> " << (dir / "manifest.json").string() << '\n';
  if (manifest.at("status") != "completed") {
    std::cerr << "run aborted after epoch " << manifest.at("last_good_epoch").get<std::size_t>()
              << ": " << manifest.value("abort_reason", "") << '\n';
    return 3;
  }
  return 0;
}

int cmd_run(const fs::path& config_path, const Overrides& o, const std::string& replay_path) {
  RunConfig c = load_with_overrides(config_path, o);
  if (!replay_path.empty()) {
    c.replay_file = fs::absolute(replay_path);
    c.validate();
  }
  const fs::path dir = output_root(c, o) / c.run_id;
  return finish_run(run_experiment(c, dir, progress(c.run_id, c.epochs, o.quiet)), dir);
}

int cmd_grid(const fs::path& config_path, const Overrides& o, const std::string& mode) {
  const RunConfig base = load_with_overrides(config_path, o);
  GridSpec grid = load_grid_spec(config_path);
  if (mode == "product") grid.mode = GridMode::product;
  else if (mode == "cross") grid.mode = GridMode::cross;
  const std::vector<GridPoint> points = expand_grid(grid);
  const fs::path root = output_root(base, o) / base.run_id;
  int aborted = 0;
  for (std::size_t i = 0; i < points.size(); ++i) {
    RunConfig c = base;
    char id[32];
    std::snprintf(id, sizeof id, "_g%02zu", i);
    c.run_id = base.run_id + id;
    c.schedule.initial_rate = points[i].rate;
    c.schedule.alpha = points[i].alpha;
    c.validate();
    const fs::path dir = root / c.run_id;
    if (finish_run(run_experiment(c, dir, progress(c.run_id, c.epochs, o.quiet)), dir) != 0)
      ++aborted;
  }
  std::cout << points.size() << " grid points, " << aborted << " aborted; manifests under "
            << root.string() << '\n';
  return 0;
}

int cmd_probe(const fs::path& config_path, const Overrides& o) {
  RunConfig c = load_with_overrides(config_path, o);
  if (!c.optimizer.has_second_moment())
    throw ConfigError("schema error: optimizer.kind: " + to_string(c.optimizer.kind) +
                      " keeps no second moment to probe");
  if (c.monitor.probe_epochs.empty())
    for (std::size_t e = 1; e <= c.epochs; ++e) c.monitor.probe_epochs.push_back(e);
  const fs::path dir = output_root(c, o) / c.run_id;
  const int rc = finish_run(run_experiment(c, dir, progress(c.run_id, c.epochs, o.quiet)), dir);
  std::ifstream is(dir / "moments.csv");
  std::cout << is.rdbuf();
  return rc;
}

int cmd_report(const fs::path& dir, const std::string& csv_path) {
  const std::vector<RunSummary> runs = collect_runs(dir);
  print_summary_table(std::cout, runs);
  std::ostringstream csv;
  write_summary_csv(csv, runs);
  const fs::path out = csv_path.empty() ? dir / "summary.csv" : fs::path(csv_path);
  write_file(out, csv.str());
  std::cout << runs.size() << " runs; summary written to " << out.string() << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Layer rotation training and monitoring"};
  app.require_subcommand(1);

  Overrides o;
  std::string config, replay, mode, dir, csv;

  auto* run = app.add_subcommand("run", "Train one configuration (or re-run a manifest)");
  run->add_option("config", config, "Run config or manifest.json")->required()->check(CLI::ExistingFile);
  add_override_flags(run, o);

  auto* grid = app.add_subcommand("grid", "Sweep initial rates and alphas");
  grid->add_option("config", config, "Run config with an optional grid section")
      ->required()
      ->check(CLI::ExistingFile);
  grid->add_option("--mode", mode, "cross (default) or product")
      ->check(CLI::IsMember({"cross", "product"}));
  add_override_flags(grid, o);

  auto* rep = app.add_subcommand("replay", "Train with per-step rates copied from a recorded run");
  rep->add_option("config", config, "Run config (layca update)")->required()->check(CLI::ExistingFile);
  rep->add_option("recorded", replay, "replay.json of the source run")
      ->required()
      ->check(CLI::ExistingFile);
  add_override_flags(rep, o);

  auto* probe = app.add_subcommand("probe", "Train and print second-moment percentiles");
  probe->add_option("config", config, "Run config")->required()->check(CLI::ExistingFile);
  add_override_flags(probe, o);

  auto* report = app.add_subcommand("report", "Summarize every manifest under a directory");
  report->add_option("dir", dir, "Directory to scan")->required()->check(CLI::ExistingDirectory);
  report->add_option("--csv", csv, "Summary CSV path (default: <dir>/summary.csv)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run) return cmd_run(config, o, {});
    if (*grid) return cmd_grid(config, o, mode);
    if (*rep) return cmd_run(config, o, replay);
    if (*probe) return cmd_probe(config, o);
    if (*report) return cmd_report(dir, csv);
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 1;
}
