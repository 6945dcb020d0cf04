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

#include "layerspin/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "layerspin/layca.hpp"
#include "layerspin/rng.hpp"
#include "layerspin/schedules.hpp"

namespace layerspin {
namespace {

// Independent random streams of one run.
constexpr std::uint64_t kInitStream = 0;
constexpr std::uint64_t kShuffleStream = 1;

struct Batch {
  Dense inputs;
  std::vector<int> labels;
};

void gather(const Dataset& data, std::span<const std::size_t> idx, Batch& out) {
  const std::size_t d = data.dimension();
  if (out.inputs.rank() != 2 || out.inputs.rows() != idx.size()) out.inputs = Dense({idx.size(), d});
  out.labels.resize(idx.size());
  for (std::size_t r = 0; r < idx.size(); ++r) {
    const auto src = data.images.row(idx[r]);
    std::copy(src.begin(), src.end(), out.inputs.row(r).begin());
    out.labels[r] = data.labels[idx[r]];
  }
}

bool model_finite(const Mlp& model) {
  for (const Layer& layer : model.layers())
    if (!layer.weights().all_finite() || !layer.bias().all_finite()) return false;
  return true;
}

void check_replay(const ReplaySchedule& replay, std::size_t layers, std::size_t steps) {
  if (replay.layer_count() != layers)
    throw ConfigError("schema error: replay: schedule has " + std::to_string(replay.layer_count()) +
                      " layers, model has " + std::to_string(layers));
  if (replay.steps() != steps)
    throw ConfigError("schema error: replay: schedule covers " + std::to_string(replay.steps()) +
                      " steps, this run takes " + std::to_string(steps));
}

}  // namespace

DataBundle load_datasets(const DatasetSpec& spec) {
  DataBundle out;
  if (spec.source == DataSource::mnist_idx) {
    out.train = load_mnist_idx(spec.train_images, spec.train_labels, spec.per_class_cap);
    if (!spec.test_images.empty()) out.test = load_mnist_idx(spec.test_images, spec.test_labels);
    return out;
  }
  out.train = make_synthetic_blobs(spec.blobs, 0);
  BlobSpec test = spec.blobs;
  test.per_class = spec.test_per_class;
  if (test.per_class > 0) out.test = make_synthetic_blobs(test, 1);
  return out;
}

std::size_t steps_per_epoch(std::size_t samples, std::size_t batch_size) {
  if (batch_size == 0) throw std::invalid_argument("batch size must be >= 1");
  return (samples + batch_size - 1) / batch_size;
}

RunResult train(const RunConfig& config, const DataBundle& data, const ReplaySchedule* replay,
                const EpochCallback& on_epoch) {
  config.validate();
  const Dataset& train_set = data.train;
  if (train_set.size() == 0) throw std::invalid_argument("training set is empty");
  if (train_set.dimension() != config.model.input_width())
    throw ConfigError("schema error: model.layer_widths: input width " +
                      std::to_string(config.model.input_width()) + " does not match sample size " +
                      std::to_string(train_set.dimension()));
  if (train_set.classes != config.model.classes())
    throw ConfigError("schema error: model.layer_widths: output width " +
                      std::to_string(config.model.classes()) + " does not match " +
                      std::to_string(train_set.classes) + " classes");

  Rng init_rng(Rng::derive(config.seed, kInitStream));
  Rng shuffle_rng(Rng::derive(config.seed, kShuffleStream));

  RunResult res(config, Mlp(config.model, init_rng));
  res.train_size = train_set.size();
  res.test_size = data.test ? data.test->size() : 0;
  Mlp& model = res.model;
  const std::size_t layers = model.layer_count();
  res.record = RotationRecord::for_model(model);
  res.steps_per_epoch = steps_per_epoch(train_set.size(), config.batch_size);
  if (replay != nullptr) check_replay(*replay, layers, res.steps_per_epoch * config.epochs);

  Optimizer opt(config.optimizer, model);
  const bool record_angles = config.monitor.record_angles || replay != nullptr;

  auto measure = [&](std::size_t epoch, double rate, std::size_t skipped) {
    EpochMetrics m;
    m.epoch = epoch;
    m.global_rate = rate;
    const Evaluation ev = model.evaluate(train_set.images, train_set.labels);
    m.train_loss = ev.loss;
    m.train_accuracy = ev.accuracy;
    if (data.test) m.test_accuracy = model.evaluate(data.test->images, data.test->labels).accuracy;
    double dist = 0.0;
    for (std::size_t l = 0; l < layers; ++l) dist += res.record.final_distance(l);
    m.mean_cosine_distance = dist / static_cast<double>(layers);
    m.skipped_steps = skipped;
    res.metrics.push_back(m);
    if (on_epoch) on_epoch(m);
  };

  res.record.record_epoch(model, 0.0);
  measure(0, config.schedule.initial_rate, 0);

  std::vector<std::size_t> order(train_set.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  Batch batch;
  std::vector<std::vector<double>> before(layers);
  std::vector<double> rates(layers);
  const double steps_d = static_cast<double>(res.steps_per_epoch);

  for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
    const std::vector<double> epoch_rates = effective_rates(config.schedule, epoch, layers);
    shuffle_rng.shuffle(std::span<std::size_t>(order));
    std::size_t skipped = 0;
    bool failed = false;

    for (std::size_t b = 0; b < res.steps_per_epoch && !failed; ++b) {
      const std::size_t begin = b * config.batch_size;
      const std::size_t end = std::min(order.size(), begin + config.batch_size);
      gather(train_set, std::span<const std::size_t>(order).subspan(begin, end - begin), batch);

      const LossAndGrad lg = model.loss_and_grad(batch.inputs, batch.labels);
      if (!std::isfinite(lg.loss)) {
        res.abort_reason = "non-finite loss at epoch " + std::to_string(epoch + 1) + ", step " +
                           std::to_string(res.steps);
        failed = true;
        break;
      }
      StepUpdate step;
      try {
        step = opt.propose_step(lg.grads, model);
      } catch (const NumericalError& e) {
        res.abort_reason = e.what();
        failed = true;
        break;
      }

      for (std::size_t l = 0; l < layers; ++l)
        rates[l] = replay != nullptr ? replay->rates[l][res.steps] : epoch_rates[l];

      for (std::size_t l = 0; l < layers; ++l) {
        Layer& layer = model.layer(l);
        const std::span<double> w = layer.weights().flat();
        const double rate = rates[l];
        if (record_angles) before[l].assign(w.begin(), w.end());
        axpy(rate, step.layers[l].bias.flat(), layer.bias().flat());

        TransformStatus status = TransformStatus::applied;
        if (rate == 0.0) {
          // nothing moves; keeps a zero-rate run bit-identical to its init
        } else if (config.update.variant == UpdateRule::layca) {
          status = layca_update(w, layer.init_norm(), step.layers[l].weights.flat(), rate);
        } else if (config.update.variant == UpdateRule::lars) {
          status = lars_update(w, layer.init_norm(), step.layers[l].weights.flat(), rate,
                               config.update.lars_norm_growth_cap);
        } else {
          axpy(rate, step.layers[l].weights.flat(), w);
        }

        if (status == TransformStatus::skipped) ++skipped;
        if (!layer.weights().all_finite() || !(l2_norm(layer.weights().flat()) > 0.0)) {
          res.abort_reason = "weights of " + layer.name() + " became non-finite or zero at step " +
                             std::to_string(res.steps);
          failed = true;
          break;
        }
        if (record_angles) {
          if (status == TransformStatus::skipped || rate == 0.0)
            res.record.record_angle(l, 0.0);
          else
            res.record.record_step_angle(l, before[l], w);
        }
      }
      if (failed) break;
      ++res.steps;
      if (config.monitor.per_step_curves)
        res.record.record_epoch(model, static_cast<double>(epoch) + static_cast<double>(b + 1) / steps_d);
    }

    if (failed || !model_finite(model)) {
      if (res.abort_reason.empty()) res.abort_reason = "non-finite parameters";
      res.status = RunStatus::aborted;
      res.last_good_epoch = epoch;
      break;
    }
    res.skipped_steps += skipped;
    if (!config.monitor.per_step_curves) res.record.record_epoch(model, static_cast<double>(epoch + 1));
    measure(epoch + 1, global_rate(config.schedule, epoch), skipped);
    if (!std::isfinite(res.metrics.back().train_loss)) {
      res.metrics.pop_back();
      res.abort_reason = "non-finite training loss after epoch " + std::to_string(epoch + 1);
      res.status = RunStatus::aborted;
      res.last_good_epoch = epoch;
      break;
    }
    const auto& probes = config.monitor.probe_epochs;
    if (std::find(probes.begin(), probes.end(), epoch + 1) != probes.end())
      res.probes.push_back(opt.probe_second_moment(epoch + 1));
    res.last_good_epoch = epoch + 1;
  }
  return res;
}

}  // namespace layerspin
