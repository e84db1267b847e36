// Copyright 2026 The HALD Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>
#include <stdexcept>
#include <string>

#include "hald/model_io.hpp"
#include "hald/rng.hpp"
#include "hald/train.hpp"

namespace hald {

namespace {

void scale_bundle(PredictionBundle& b, double s) {
  for (LogitBlock* blk : {&b.loc_rows, &b.loc_cols, &b.exist_rows, &b.exist_cols})
    for (double& v : blk->values) v *= s;
}

void scale_bundle(RegressionBundle& b, double s) {
  for (LogitBlock* blk : {&b.coord_rows, &b.coord_cols, &b.exist_rows, &b.exist_cols})
    for (double& v : blk->values) v *= s;
}

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

void TrainConfig::validate() const {
  if (epochs < 1) throw std::invalid_argument("epochs must be >= 1");
  if (batch_size < 1) throw std::invalid_argument("batch_size must be >= 1");
  if (!(lr0 >= 0.0)) throw std::invalid_argument("lr0 must be >= 0");
  if (!(lr_decay_factor > 0.0)) throw std::invalid_argument("lr_decay_factor must be positive");
  if (!(decay_epoch_fraction > 0.0 && decay_epoch_fraction <= 1.0))
    throw std::invalid_argument("decay_epoch_fraction must lie in (0, 1]");
  if (!(momentum >= 0.0 && momentum < 1.0)) throw std::invalid_argument("momentum must lie in [0, 1)");
  if (!(data.max_shift >= 0.0 && data.max_shift < 1.0)) throw std::invalid_argument("max_shift must lie in [0, 1)");
  weights.validate();
}

double lr_at(const TrainConfig& config, int epoch) {
  const int decay_epoch = static_cast<int>(std::ceil(config.decay_epoch_fraction * config.epochs - 1e-9));
  return epoch < decay_epoch ? config.lr0 : config.lr0 / config.lr_decay_factor;
}

void sgd_step(std::span<double> params, std::span<const double> grads, double lr, double momentum,
              std::span<double> velocity) {
  if (params.size() != grads.size() || params.size() != velocity.size())
    throw std::invalid_argument("sgd_step: parameter, gradient and velocity sizes differ");
  for (std::size_t i = 0; i < params.size(); ++i) {
    velocity[i] = momentum * velocity[i] + grads[i];
    params[i] -= lr * velocity[i];
  }
}

Sample make_sample(const Scene& scene, const AnchorSystem& system, const DataConfig& data, int height, int width,
                   double dx, double dy, std::uint64_t raster_seed) {
  const Scene shifted = (dx == 0.0 && dy == 0.0) ? scene : shift_augment(scene, dx, dy, data.max_shift);
  Sample s;
  s.image = rasterize_scene(shifted, height, width, data.stroke, data.noise_sigma, data.occlusions, raster_seed);
  s.coords = encode_targets(shifted, system, assign_lanes(shifted, system, effective_assign(system, data.assign)));
  s.classes = quantize_targets(s.coords, system);
  return s;
}

std::string TrainLog::to_csv() const {
  std::ostringstream out;
  out << "step,epoch,lr,loss,cls,exp,ext,sim,shp,coord\n";
  for (const StepRecord& r : steps)
    out << r.step << ',' << r.epoch << ',' << fmt(r.lr) << ',' << fmt(r.loss.total) << ',' << fmt(r.loss.cls) << ','
        << fmt(r.loss.exp) << ',' << fmt(r.loss.ext) << ',' << fmt(r.loss.sim) << ',' << fmt(r.loss.shp) << ','
        << fmt(r.loss.coord) << '\n';
  return out.str();
}

TrainResult train(std::span<const Scene> dataset, const ModelConfig& model_config, const TrainConfig& config) {
  if (dataset.empty()) throw std::invalid_argument("training dataset is empty");
  config.validate();
  TrainResult result{Model(model_config, mix_seed(config.seed, 1)), {}};
  Model& model = result.model;
  const AnchorSystem& system = model.system();
  const bool regression = model.config().head == HeadKind::regression;
  const int n = static_cast<int>(dataset.size());
  const int height = model.config().input_height;
  const int width = model.config().input_width;

  std::vector<std::vector<double>> velocity;
  for (const Tensor* t : model.parameters()) velocity.emplace_back(t->size(), 0.0);

  std::vector<int> order(n);
  for (int i = 0; i < n; ++i) order[i] = i;
  Rng shuffle_rng(mix_seed(config.seed, 2));
  int step = 0;

  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    for (int i = n - 1; i > 0; --i) std::swap(order[i], order[shuffle_rng.below(static_cast<std::uint64_t>(i) + 1)]);
    const double lr = lr_at(config, epoch);
    double epoch_total = 0.0;
    int epoch_steps = 0;

    for (int start = 0; start < n; start += config.batch_size, ++step) {
      const int count = std::min(config.batch_size, n - start);
      std::vector<Sample> batch(count);
      std::vector<std::string> errors(count);
#pragma omp parallel for schedule(static)
      for (int b = 0; b < count; ++b) {
        const int idx = order[start + b];
        Rng aug(mix_seed(mix_seed(config.seed, 3 + static_cast<std::uint64_t>(epoch)), idx));
        const double dx = aug.uniform(-config.data.max_shift, config.data.max_shift);
        const double dy = aug.uniform(-config.data.max_shift, config.data.max_shift);
        try {
          batch[b] = make_sample(dataset[idx], system, config.data, height, width, dx, dy, aug.next());
        } catch (const std::exception& e) {
          errors[b] = "scene " + std::to_string(idx) + ": " + e.what();
        }
      }
      for (const std::string& e : errors)
        if (!e.empty())
          throw std::runtime_error("epoch " + std::to_string(epoch) + ", step " + std::to_string(step) + ": " + e);

      model.zero_grad();
      LossBreakdown batch_loss;
      const double inv = 1.0 / count;
      ForwardCache cache;
      for (const Sample& s : batch) {
        if (regression) {
          const RegressionBundle out = model.regression_forward(s.image, cache);
          RegressionLoss loss = regression_loss(out, s.coords, s.classes, system, config.weights);
          scale_bundle(loss.grad, inv);
          model.backward(cache, loss.grad);
          batch_loss += loss.parts;
        } else {
          const PredictionBundle out = model.forward(s.image, cache);
          TotalLoss loss = total_loss(out, s.classes, config.weights);
          scale_bundle(loss.grad, inv);
          model.backward(cache, loss.grad);
          batch_loss += loss.parts;
        }
      }
      batch_loss = batch_loss.scaled(inv);
      if (!std::isfinite(batch_loss.total))
        throw std::runtime_error("epoch " + std::to_string(epoch) + ", step " + std::to_string(step) +
                                 ": loss is not finite");

      auto params = model.parameters();
      for (std::size_t p = 0; p < params.size(); ++p)
        sgd_step(params[p]->values, params[p]->grad, lr, config.momentum, velocity[p]);

      result.log.steps.push_back({epoch, step, lr, batch_loss});
      epoch_total += batch_loss.total;
      ++epoch_steps;
    }
    result.log.epoch_mean_total.push_back(epoch_total / epoch_steps);

    if (!config.checkpoint_dir.empty()) {
      char name[32];
      std::snprintf(name, sizeof name, "epoch_%03d.hald", epoch);
      save_model(model, config.checkpoint_dir / name);
    }
  }
  model.zero_grad();
  return result;
}

}  // namespace hald
