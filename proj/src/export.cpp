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

#include "layerspin/export.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <memory>
#include <numeric>
#include <sstream>

#include "layerspin/format.hpp"
#include "layerspin/rng.hpp"

namespace layerspin {

using nlohmann::json;

namespace {

constexpr std::uint64_t kFeatureStream = 2;

std::string fixed2(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

// Dark purple -> teal -> yellow, interpolated by depth in [0, 1].
std::string depth_color(double t) {
  static constexpr std::array<std::array<double, 3>, 3> kStops{
      {{68, 1, 84}, {33, 145, 140}, {253, 231, 37}}};
  t = std::clamp(t, 0.0, 1.0) * 2.0;
  const std::size_t i = t >= 1.0 ? 1 : 0;
  const double f = t - static_cast<double>(i);
  char buf[8];
  int c[3];
  for (int k = 0; k < 3; ++k)
    c[k] = static_cast<int>(std::lround(kStops[i][k] + f * (kStops[i + 1][k] - kStops[i][k])));
  std::snprintf(buf, sizeof buf, "#%02x%02x%02x", c[0], c[1], c[2]);
  return buf;
}

std::string xml_escape(const std::string& s) {
  std::string out;
  for (char ch : s) {
    switch (ch) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += ch;
    }
  }
  return out;
}

template <typename Writer>
std::string render(Writer&& w) {
  std::ostringstream os;
  w(os);
  return os.str();
}

}  // namespace

std::string sha256_hex(std::string_view bytes) {
  std::array<unsigned char, EVP_MAX_MD_SIZE> md{};
  unsigned int len = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), md.data(), &len, EVP_sha256(), nullptr) != 1)
    throw std::runtime_error("sha256 failed");
  static constexpr char kHex[] = "0123456789abcdef";
  std::string out;
  for (unsigned int i = 0; i < len; ++i) {
    out.push_back(kHex[md[i] >> 4]);
    out.push_back(kHex[md[i] & 15]);
  }
  return out;
}

std::string sha256_file(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("cannot read " + path.string());
  std::ostringstream ss;
  ss << is.rdbuf();
  return sha256_hex(ss.str());
}

void write_file(const std::filesystem::path& path, std::string_view bytes) {
  std::error_code ec;
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path(), ec);
  if (ec) throw std::runtime_error("cannot create " + path.parent_path().string() + ": " + ec.message());
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot write " + path.string());
  os.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  os.close();
  if (!os) throw std::runtime_error("write failed: " + path.string());
}

void write_metrics_csv(std::ostream& os, const std::string& run_id,
                       std::span<const EpochMetrics> metrics) {
  os << "run_id,epoch,global_rate,train_loss,train_accuracy,test_accuracy,mean_cosine_distance,"
        "skipped_steps\n";
  for (const EpochMetrics& m : metrics) {
    os << run_id << ',' << m.epoch << ',' << fmt_double(m.global_rate) << ','
       << fmt_double(m.train_loss) << ',' << fmt_double(m.train_accuracy) << ',';
    if (m.test_accuracy) os << fmt_double(*m.test_accuracy);
    os << ',' << fmt_double(m.mean_cosine_distance) << ',' << m.skipped_steps << '\n';
  }
}

void write_curves_svg(std::ostream& os, const RotationRecord& record, const std::string& title) {
  constexpr double kWidth = 720, kHeight = 440;
  constexpr double kLeft = 64, kRight = 150, kTop = 36, kBottom = 48;
  const double pw = kWidth - kLeft - kRight, ph = kHeight - kTop - kBottom;

  double max_epoch = 0.0, max_dist = 0.0;
  for (std::size_t l = 0; l < record.layer_count(); ++l)
    for (const CurvePoint& p : record.curve(l)) {
      max_epoch = std::max(max_epoch, p.epoch);
      max_dist = std::max(max_dist, p.cosine_distance);
    }
  const double x_max = max_epoch > 0.0 ? max_epoch : 1.0;
  const double y_max = max_dist > 0.0 ? 1.05 * max_dist : 1.0;
  auto px = [&](double e) { return kLeft + pw * e / x_max; };
  auto py = [&](double d) { return kTop + ph * (1.0 - d / y_max); };

  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth << "\" height=\""
     << kHeight << "\" viewBox=\"0 0 " << kWidth << ' ' << kHeight
     << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  os << "<text x=\"" << kLeft << "\" y=\"22\" font-size=\"14\">" << xml_escape(title) << "</text>\n";

  for (int i = 0; i <= 5; ++i) {
    const double e = x_max * i / 5.0, d = y_max * i / 5.0;
    os << "<line x1=\"" << fixed2(px(e)) << "\" y1=\"" << fixed2(kTop + ph) << "\" x2=\""
       << fixed2(px(e)) << "\" y2=\"" << fixed2(kTop + ph + 5) << "\" stroke=\"black\"/>\n";
    os << "<text x=\"" << fixed2(px(e)) << "\" y=\"" << fixed2(kTop + ph + 18)
       << "\" text-anchor=\"middle\">" << fixed2(e) << "</text>\n";
    os << "<line x1=\"" << fixed2(kLeft - 5) << "\" y1=\"" << fixed2(py(d)) << "\" x2=\""
       << fixed2(kLeft + pw) << "\" y2=\"" << fixed2(py(d)) << "\" stroke=\"#dddddd\"/>\n";
    os << "<text x=\"" << fixed2(kLeft - 8) << "\" y=\"" << fixed2(py(d) + 4)
       << "\" text-anchor=\"end\">" << fixed2(d) << "</text>\n";
  }
  os << "<rect x=\"" << kLeft << "\" y=\"" << kTop << "\" width=\"" << pw << "\" height=\"" << ph
     << "\" fill=\"none\" stroke=\"black\"/>\n";
  os << "<text x=\"" << fixed2(kLeft + pw / 2) << "\" y=\"" << fixed2(kHeight - 10)
     << "\" text-anchor=\"middle\">epoch</text>\n";
  os << "<text transform=\"translate(16 " << fixed2(kTop + ph / 2)
     << ") rotate(-90)\" text-anchor=\"middle\">cosine distance from initialization</text>\n";

  const std::size_t layers = record.layer_count();
  for (std::size_t l = 0; l < layers; ++l) {
    const std::string color =
        depth_color(layers > 1 ? static_cast<double>(l) / static_cast<double>(layers - 1) : 0.0);
    const auto& curve = record.curve(l);
    if (!curve.empty()) {
      os << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.5\" points=\"";
      for (std::size_t i = 0; i < curve.size(); ++i)
        os << (i ? " " : "") << fixed2(px(curve[i].epoch)) << ',' << fixed2(py(curve[i].cosine_distance));
      os << "\"/>\n";
    }
    const double ly = kTop + 14.0 + 18.0 * static_cast<double>(l);
    os << "<line x1=\"" << fixed2(kLeft + pw + 12) << "\" y1=\"" << fixed2(ly - 4) << "\" x2=\""
       << fixed2(kLeft + pw + 36) << "\" y2=\"" << fixed2(ly - 4) << "\" stroke=\"" << color
       << "\" stroke-width=\"2\"/>\n";
    os << "<text x=\"" << fixed2(kLeft + pw + 42) << "\" y=\"" << fixed2(ly) << "\">"
       << xml_escape(record.layer_name(l)) << "</text>\n";
  }
  os << "</svg>\n";
}

void write_feature_pgm(std::ostream& os, std::span<const double> values, std::size_t rows,
                       std::size_t cols) {
  if (rows * cols != values.size())
    throw std::invalid_argument("write_feature_pgm: " + std::to_string(values.size()) +
                                " values do not fill " + std::to_string(rows) + "x" +
                                std::to_string(cols));
  double m = 0.0;
  for (double v : values) m = std::max(m, std::abs(v));
  os << "P5\n" << cols << ' ' << rows << "\n255\n";
  for (double v : values) {
    const double t = m > 0.0 ? v / m : 0.0;
    const long p = std::clamp(std::lround(127.5 * (1.0 + t)), 0L, 255L);
    os.put(static_cast<char>(static_cast<unsigned char>(p)));
  }
}

std::vector<std::size_t> pick_feature_neurons(const Mlp& model, std::size_t count,
                                              std::uint64_t seed) {
  const std::size_t n = model.layer(0).fan_out();
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  Rng rng(Rng::derive(seed, kFeatureStream));
  rng.shuffle(std::span<std::size_t>(idx));
  idx.resize(std::min(count, n));
  std::sort(idx.begin(), idx.end());
  return idx;
}

json write_run_outputs(const RunResult& result, const Dataset& train,
                       const std::filesystem::path& dir) {
  const RunConfig& cfg = result.config;
  const std::string& id = cfg.run_id;
  std::vector<std::string> files;
  auto emit = [&](const std::string& name, std::string_view bytes) {
    write_file(dir / name, bytes);
    files.push_back(name);
  };

  emit("curves.csv", render([&](std::ostream& os) { write_curves_csv(os, id, result.record); }));
  emit("metrics.csv", render([&](std::ostream& os) { write_metrics_csv(os, id, result.metrics); }));
  emit("curves.svg",
       render([&](std::ostream& os) { write_curves_svg(os, result.record, id + " layer rotation"); }));
  if (cfg.monitor.record_angles || !cfg.replay_file.empty())
    emit("angles.csv", render([&](std::ostream& os) { write_angles_csv(os, id, result.record); }));
  if (!result.probes.empty())
    emit("moments.csv", render([&](std::ostream& os) { write_moment_csv(os, result.probes); }));

  json notes = json::array();
  const bool have_angles = cfg.monitor.record_angles || !cfg.replay_file.empty();
  if (have_angles && result.status == RunStatus::completed) {
    try {
      emit("replay.json", replay_to_json(build_replay(result.record, id)) + "\n");
    } catch (const std::invalid_argument& e) {
      notes.push_back(std::string("replay.json not written: ") + e.what());
    }
  }

  // Feature snapshots of the first layer.
  const std::vector<std::size_t> neurons =
      pick_feature_neurons(result.model, cfg.monitor.feature_neurons, cfg.seed);
  if (!neurons.empty()) {
    const FeatureSnapshot snap = result.model.snapshot_features(0);
    const bool image = train.image_rows * train.image_cols == snap.current.cols();
    json feats = {{"layer_index", 0},
                  {"image_rows", image ? train.image_rows : 0},
                  {"image_cols", image ? train.image_cols : 0},
                  {"neurons", json::array()}};
    for (std::size_t n : neurons) {
      const auto cur = snap.current.row(n);
      const auto init = snap.initial.row(n);
      feats["neurons"].push_back({{"index", n},
                                  {"cosine_distance", cosine_distance(init, cur)},
                                  {"initial", std::vector<double>(init.begin(), init.end())},
                                  {"final", std::vector<double>(cur.begin(), cur.end())}});
      if (image) {
        const std::string stem = "features/neuron_" + std::to_string(n);
        emit(stem + "_initial.pgm", render([&](std::ostream& os) {
               write_feature_pgm(os, init, train.image_rows, train.image_cols);
             }));
        emit(stem + "_final.pgm", render([&](std::ostream& os) {
               write_feature_pgm(os, cur, train.image_rows, train.image_cols);
             }));
      }
    }
    emit("features.json", feats.dump() + "\n");
  }

  json m;
  m["format"] = kManifestFormat;
  m["run_id"] = id;
  m["config"] = to_json(cfg);
  m["output_dir"] = dir.string();
  m["dataset_sizes"] = {{"train", result.train_size}, {"test", result.test_size}};
  m["steps_per_epoch"] = result.steps_per_epoch;
  m["steps"] = result.steps;
  m["skipped_steps"] = result.skipped_steps;
  m["status"] = result.status == RunStatus::completed ? "completed" : "aborted";
  m["last_good_epoch"] = result.last_good_epoch;
  if (result.status == RunStatus::aborted) m["abort_reason"] = result.abort_reason;
  const EpochMetrics& fin = result.final_metrics();
  json per_layer = json::array();
  for (std::size_t l = 0; l < result.record.layer_count(); ++l)
    per_layer.push_back({{"layer", result.record.layer_name(l)},
                         {"cosine_distance", result.record.final_distance(l)}});
  m["final"] = {{"epoch", fin.epoch},
                {"train_accuracy", fin.train_accuracy},
                {"test_accuracy", fin.test_accuracy ? json(*fin.test_accuracy) : json(nullptr)},
                {"train_loss", fin.train_loss},
                {"mean_cosine_distance", result.record.mean_final_distance()},
                {"layers", per_layer}};
  if (!notes.empty()) m["notes"] = notes;
  json digests = json::object();
  for (const std::string& f : files) digests[f] = sha256_file(dir / f);
  m["files"] = digests;
  write_file(dir / "manifest.json", m.dump(2) + "\n");
  return m;
}

json run_experiment(const RunConfig& config, const std::filesystem::path& dir,
                    const EpochCallback& on_epoch) {
  config.validate();
  std::unique_ptr<ReplaySchedule> replay;
  if (!config.replay_file.empty()) replay = std::make_unique<ReplaySchedule>(load_replay(config.replay_file));
  const DataBundle data = load_datasets(config.dataset);
  const RunResult result = train(config, data, replay.get(), on_epoch);
  return write_run_outputs(result, data.train, dir);
}

}  // namespace layerspin
