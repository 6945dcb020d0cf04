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

#include "layerspin/config.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <initializer_list>
#include <set>
#include <sstream>

namespace layerspin {

using nlohmann::json;

namespace {

[[noreturn]] void fail(const std::string& path, const std::string& msg) {
  throw ConfigError("schema error: " + path + ": " + msg);
}

// Typed access to one JSON object that rejects unknown keys.
class Section {
 public:
  Section(const json& j, std::string path, std::initializer_list<const char*> allowed)
      : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) fail(path_.empty() ? "<root>" : path_, "expected an object");
    std::set<std::string> ok(allowed.begin(), allowed.end());
    for (const auto& [key, value] : j_.items())
      if (!ok.count(key)) fail(child(key), "unknown key");
  }

  bool has(const char* key) const { return j_.contains(key) && !j_.at(key).is_null(); }
  const json& raw(const char* key) const { return j_.at(key); }
  std::string child(const std::string& key) const {
    return path_.empty() ? key : path_ + "." + key;
  }

  double number(const char* key, double fallback) const {
    if (!has(key)) return fallback;
    const json& v = j_.at(key);
    if (!v.is_number()) fail(child(key), "expected a number");
    const double d = v.get<double>();
    if (!std::isfinite(d)) fail(child(key), "must be finite");
    return d;
  }

  std::uint64_t count(const char* key, std::uint64_t fallback) const {
    if (!has(key)) return fallback;
    const json& v = j_.at(key);
    if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<std::int64_t>() >= 0))
      fail(child(key), "expected a non-negative integer");
    return v.get<std::uint64_t>();
  }

  bool flag(const char* key, bool fallback) const {
    if (!has(key)) return fallback;
    if (!j_.at(key).is_boolean()) fail(child(key), "expected true or false");
    return j_.at(key).get<bool>();
  }

  std::string text(const char* key, const std::string& fallback) const {
    if (!has(key)) return fallback;
    if (!j_.at(key).is_string()) fail(child(key), "expected a string");
    return j_.at(key).get<std::string>();
  }

  std::vector<double> numbers(const char* key, std::vector<double> fallback) const {
    if (!has(key)) return fallback;
    const json& v = j_.at(key);
    if (!v.is_array()) fail(child(key), "expected an array of numbers");
    std::vector<double> out;
    for (const json& e : v) {
      if (!e.is_number()) fail(child(key), "expected an array of numbers");
      out.push_back(e.get<double>());
    }
    return out;
  }

  std::vector<std::size_t> counts(const char* key) const {
    if (!has(key)) return {};
    const json& v = j_.at(key);
    if (!v.is_array()) fail(child(key), "expected an array of non-negative integers");
    std::vector<std::size_t> out;
    for (const json& e : v) {
      if (!e.is_number_unsigned() && !(e.is_number_integer() && e.get<std::int64_t>() >= 0))
        fail(child(key), "expected an array of non-negative integers");
      out.push_back(e.get<std::size_t>());
    }
    return out;
  }

 private:
  const json& j_;
  std::string path_;
};

template <typename F>
auto wrap(const std::string& path, F&& f) -> decltype(f()) {
  try {
    return f();
  } catch (const ConfigError&) {
    throw;
  } catch (const std::invalid_argument& e) {
    fail(path, e.what());
  }
}

std::filesystem::path resolve(const std::filesystem::path& base, const std::string& p) {
  if (p.empty()) return {};
  std::filesystem::path path(p);
  return path.is_absolute() || base.empty() ? path : base / path;
}

json read_json_file(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("cannot read config file " + path.string());
  std::stringstream ss;
  ss << is.rdbuf();
  try {
    return json::parse(ss.str());
  } catch (const json::parse_error& e) {
    throw ConfigError("schema error: " + path.string() + " is not valid JSON: " + e.what());
  }
}

const char* to_string(DataSource s) {
  return s == DataSource::mnist_idx ? "mnist_idx" : "synthetic_blobs";
}

}  // namespace

void RunConfig::validate() const {
  if (run_id.empty()) fail("run_id", "must not be empty");
  if (run_id.find_first_of("/\\,\n") != std::string::npos)
    fail("run_id", "must not contain '/', '\\', ',' or newlines");
  if (epochs == 0) fail("epochs", "must be >= 1");
  if (batch_size == 0) fail("batch_size", "must be >= 1");
  wrap("model", [&] { model.validate(); });
  wrap("optimizer", [&] { optimizer.validate(); });
  wrap("layca", [&] { update.validate(); });
  if (update.variant == UpdateRule::layca && optimizer.weight_decay > 0.0)
    fail("optimizer.weight_decay",
         "must be 0 with the layca update (it re-projects weights to their initial norm)");
  if (!(schedule.alpha >= -1.0 && schedule.alpha <= 1.0))
    fail("schedule.alpha", "must lie in [-1, 1]");
  if (schedule.total_epochs != epochs) fail("schedule", "total_epochs must equal epochs");
  wrap("schedule", [&] { schedule.validate(); });
  if (!replay_file.empty() && update.variant != UpdateRule::layca)
    fail("replay", "replayed rates require the layca update");
  if (dataset.source == DataSource::mnist_idx) {
    if (dataset.train_images.empty() || dataset.train_labels.empty())
      fail("dataset", "mnist_idx needs train_images and train_labels");
    if (dataset.test_images.empty() != dataset.test_labels.empty())
      fail("dataset", "test_images and test_labels must be given together");
    if (dataset.per_class_cap == 0) fail("dataset.per_class_cap", "must be >= 1");
  } else {
    if (dataset.blobs.classes != model.classes())
      fail("dataset.classes", "must equal the model output width");
    if (dataset.blobs.dimension != model.input_width())
      fail("dataset.dimension", "must equal the model input width");
    if (dataset.blobs.per_class == 0) fail("dataset.per_class", "must be >= 1");
    if (!(dataset.blobs.spread >= 0.0)) fail("dataset.spread", "must be >= 0");
  }
  for (std::size_t e : monitor.probe_epochs)
    if (e == 0 || e > epochs) fail("monitor.probe_epochs", "entries must lie in [1, epochs]");
  if (!monitor.probe_epochs.empty() && !optimizer.has_second_moment())
    fail("monitor.probe_epochs", "the optimizer keeps no second moment");
}

RunConfig parse_run_config(const json& j, const std::filesystem::path& base_dir) {
  const Section root(j, "",
                     {"run_id", "seed", "epochs", "batch_size", "model", "optimizer", "layca",
                      "schedule", "dataset", "monitor", "replay", "output_dir", "grid"});
  RunConfig c;
  c.run_id = root.text("run_id", c.run_id);
  c.seed = root.count("seed", c.seed);
  c.epochs = root.count("epochs", c.epochs);
  c.batch_size = root.count("batch_size", c.batch_size);
  c.output_dir = resolve(base_dir, root.text("output_dir", ""));
  c.replay_file = resolve(base_dir, root.text("replay", ""));

  if (!root.has("model")) fail("model", "required");
  {
    const Section s(root.raw("model"), "model", {"layer_widths", "activation"});
    if (!s.has("layer_widths")) fail("model.layer_widths", "required");
    c.model.layer_widths = s.counts("layer_widths");
    c.model.activation =
        wrap("model.activation", [&] { return parse_activation(s.text("activation", "relu")); });
  }

  if (root.has("optimizer")) {
    const Section s(root.raw("optimizer"), "optimizer",
                    {"kind", "momentum", "beta1", "beta2", "rmsprop_decay", "epsilon",
                     "weight_decay"});
    OptimizerConfig& o = c.optimizer;
    o.kind = wrap("optimizer.kind", [&] { return parse_optimizer_kind(s.text("kind", "sgd")); });
    o.momentum = s.number("momentum", o.momentum);
    o.beta1 = s.number("beta1", o.beta1);
    o.beta2 = s.number("beta2", o.beta2);
    o.rmsprop_decay = s.number("rmsprop_decay", o.rmsprop_decay);
    o.epsilon = s.number("epsilon", o.epsilon);
    o.weight_decay = s.number("weight_decay", o.weight_decay);
  }

  if (root.has("layca")) {
    const Section s(root.raw("layca"), "layca", {"variant", "lars_norm_growth_cap"});
    c.update.variant =
        wrap("layca.variant", [&] { return parse_update_rule(s.text("variant", "layca")); });
    c.update.lars_norm_growth_cap = s.number("lars_norm_growth_cap", c.update.lars_norm_growth_cap);
  }

  c.schedule.total_epochs = c.epochs;
  if (root.has("schedule")) {
    const Section s(root.raw("schedule"), "schedule", {"rho0", "alpha", "decay", "warmup_epochs"});
    c.schedule.initial_rate = s.number("rho0", c.schedule.initial_rate);
    c.schedule.alpha = s.number("alpha", c.schedule.alpha);
    c.schedule.warmup_epochs = s.count("warmup_epochs", 0);
    if (s.has("decay")) {
      const json& d = s.raw("decay");
      if (!d.is_array()) fail("schedule.decay", "expected an array of [epoch, factor] pairs");
      for (const json& e : d) {
        if (!e.is_array() || e.size() != 2 || !e[0].is_number_unsigned() || !e[1].is_number())
          fail("schedule.decay", "expected an array of [epoch, factor] pairs");
        c.schedule.decay.push_back({e[0].get<std::size_t>(), e[1].get<double>()});
      }
    }
  }

  if (!root.has("dataset")) fail("dataset", "required");
  {
    const Section s(root.raw("dataset"), "dataset",
                    {"source", "train_images", "train_labels", "test_images", "test_labels",
                     "per_class_cap", "classes", "per_class", "test_per_class", "dimension",
                     "spread", "seed"});
    DatasetSpec& d = c.dataset;
    const std::string source = s.text("source", "mnist_idx");
    if (source == "mnist_idx") {
      d.source = DataSource::mnist_idx;
    } else if (source == "synthetic_blobs") {
      d.source = DataSource::synthetic_blobs;
    } else {
      fail("dataset.source", "expected 'mnist_idx' or 'synthetic_blobs', got '" + source + "'");
    }
    d.train_images = resolve(base_dir, s.text("train_images", ""));
    d.train_labels = resolve(base_dir, s.text("train_labels", ""));
    d.test_images = resolve(base_dir, s.text("test_images", ""));
    d.test_labels = resolve(base_dir, s.text("test_labels", ""));
    d.per_class_cap = s.count("per_class_cap", d.per_class_cap);
    d.blobs.classes = s.count("classes", d.blobs.classes);
    d.blobs.per_class = s.count("per_class", d.blobs.per_class);
    d.test_per_class = s.count("test_per_class", d.test_per_class);
    d.blobs.dimension = s.count("dimension", d.blobs.dimension);
    d.blobs.spread = s.number("spread", d.blobs.spread);
    d.blobs.seed = s.count("seed", d.blobs.seed);
  }

  if (root.has("monitor")) {
    const Section s(root.raw("monitor"), "monitor",
                    {"record_angles", "per_step_curves", "probe_epochs", "feature_neurons"});
    c.monitor.record_angles = s.flag("record_angles", c.monitor.record_angles);
    c.monitor.per_step_curves = s.flag("per_step_curves", c.monitor.per_step_curves);
    c.monitor.probe_epochs = s.counts("probe_epochs");
    c.monitor.feature_neurons = s.count("feature_neurons", c.monitor.feature_neurons);
  }

  if (root.has("grid")) parse_grid_spec(j);  // reject a malformed grid section early
  c.validate();
  return c;
}

RunConfig load_run_config(const std::filesystem::path& path) {
  const json j = read_json_file(path);
  const std::filesystem::path base = std::filesystem::absolute(path).parent_path();
  // A run manifest carries the complete configuration of the run it describes.
  if (j.is_object() && j.contains("format") && j["format"] == "layerspin.manifest.v1") {
    if (!j.contains("config")) fail("config", "manifest has no config section");
    return parse_run_config(j.at("config"), base);
  }
  return parse_run_config(j, base);
}

json to_json(const RunConfig& c) {
  json j;
  j["run_id"] = c.run_id;
  j["seed"] = c.seed;
  j["epochs"] = c.epochs;
  j["batch_size"] = c.batch_size;
  j["model"] = {{"layer_widths", c.model.layer_widths},
                {"activation", to_string(c.model.activation)}};
  j["optimizer"] = {{"kind", to_string(c.optimizer.kind)},
                    {"momentum", c.optimizer.momentum},
                    {"beta1", c.optimizer.beta1},
                    {"beta2", c.optimizer.beta2},
                    {"rmsprop_decay", c.optimizer.rmsprop_decay},
                    {"epsilon", c.optimizer.epsilon},
                    {"weight_decay", c.optimizer.weight_decay}};
  j["layca"] = {{"variant", to_string(c.update.variant)},
                {"lars_norm_growth_cap", c.update.lars_norm_growth_cap}};
  json decay = json::array();
  for (const RateDecay& d : c.schedule.decay) decay.push_back({d.epoch, d.factor});
  j["schedule"] = {{"rho0", c.schedule.initial_rate},
                   {"alpha", c.schedule.alpha},
                   {"decay", decay},
                   {"warmup_epochs", c.schedule.warmup_epochs}};
  const DatasetSpec& d = c.dataset;
  if (d.source == DataSource::mnist_idx) {
    j["dataset"] = {{"source", to_string(d.source)},
                    {"train_images", d.train_images.string()},
                    {"train_labels", d.train_labels.string()},
                    {"per_class_cap", d.per_class_cap}};
    if (!d.test_images.empty()) {
      j["dataset"]["test_images"] = d.test_images.string();
      j["dataset"]["test_labels"] = d.test_labels.string();
    }
  } else {
    j["dataset"] = {{"source", to_string(d.source)},
                    {"classes", d.blobs.classes},
                    {"per_class", d.blobs.per_class},
                    {"test_per_class", d.test_per_class},
                    {"dimension", d.blobs.dimension},
                    {"spread", d.blobs.spread},
                    {"seed", d.blobs.seed}};
  }
  j["monitor"] = {{"record_angles", c.monitor.record_angles},
                  {"per_step_curves", c.monitor.per_step_curves},
                  {"probe_epochs", c.monitor.probe_epochs},
                  {"feature_neurons", c.monitor.feature_neurons}};
  if (!c.replay_file.empty()) j["replay"] = c.replay_file.string();
  if (!c.output_dir.empty()) j["output_dir"] = c.output_dir.string();
  return j;
}

std::vector<GridPoint> expand_grid(const GridSpec& grid) {
  std::vector<GridPoint> out;
  if (grid.mode == GridMode::product) {
    for (double a : grid.alphas)
      for (double r : grid.rates) out.push_back({r, a});
    return out;
  }
  for (double r : grid.rates) out.push_back({r, 0.0});
  for (double a : grid.alphas) {
    const bool shared = a == 0.0 && std::find(grid.rates.begin(), grid.rates.end(),
                                              grid.pivot_rate) != grid.rates.end();
    if (!shared) out.push_back({grid.pivot_rate, a});
  }
  return out;
}

GridSpec parse_grid_spec(const json& j) {
  GridSpec g;
  if (!j.is_object() || !j.contains("grid")) return g;
  const Section s(j.at("grid"), "grid", {"rates", "alphas", "pivot_rate", "mode"});
  g.rates = s.numbers("rates", g.rates);
  g.alphas = s.numbers("alphas", g.alphas);
  g.pivot_rate = s.number("pivot_rate", g.pivot_rate);
  const std::string mode = s.text("mode", "cross");
  if (mode == "cross") {
    g.mode = GridMode::cross;
  } else if (mode == "product") {
    g.mode = GridMode::product;
  } else {
    fail("grid.mode", "expected 'cross' or 'product', got '" + mode + "'");
  }
  if (g.rates.empty()) fail("grid.rates", "must not be empty");
  for (double r : g.rates)
    if (!(r >= 0.0) || !std::isfinite(r)) fail("grid.rates", "entries must be finite and >= 0");
  for (double a : g.alphas)
    if (!(a >= -1.0 && a <= 1.0)) fail("grid.alphas", "entries must lie in [-1, 1]");
  if (!(g.pivot_rate >= 0.0)) fail("grid.pivot_rate", "must be >= 0");
  return g;
}

GridSpec load_grid_spec(const std::filesystem::path& path) {
  return parse_grid_spec(read_json_file(path));
}

}  // namespace layerspin
