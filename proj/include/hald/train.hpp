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

#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "hald/anchors.hpp"
#include "hald/losses.hpp"
#include "hald/model.hpp"
#include "hald/scene.hpp"

namespace hald {

/// How scenes become training images and targets.
struct DataConfig {
  int stroke = 2;
  double noise_sigma = 0.05;
  int occlusions = 1;
  double max_shift = 0.05;
  AssignMode assign = AssignMode::semantics;
};

struct TrainConfig {
  int epochs = 15;
  int batch_size = 16;
  double lr0 = 0.05;
  double lr_decay_factor = 10.0;
  double decay_epoch_fraction = 0.8;
  double momentum = 0.9;
  std::uint64_t seed = 1;
  LossWeights weights;
  DataConfig data;
  std::filesystem::path checkpoint_dir;  // empty: no checkpoints

  void validate() const;
};

/// lr0 before epoch ceil(fraction * epochs), lr0 / decay_factor from then on.
double lr_at(const TrainConfig& config, int epoch);

/// v <- momentum * v + g; p <- p - lr * v.
void sgd_step(std::span<double> params, std::span<const double> grads, double lr, double momentum,
              std::span<double> velocity);

struct Sample {
  ImageGrid image;
  CoordTarget coords;
  ClassTarget classes;
};

/// Shifts the scene by (dx, dy), rasterizes it and encodes its targets.
Sample make_sample(const Scene& scene, const AnchorSystem& system, const DataConfig& data, int height, int width,
                   double dx, double dy, std::uint64_t raster_seed);

struct StepRecord {
  int epoch = 0;
  int step = 0;
  double lr = 0.0;
  LossBreakdown loss;  // batch mean
};

struct TrainLog {
  std::vector<StepRecord> steps;
  std::vector<double> epoch_mean_total;

  std::string to_csv() const;
};

struct TrainResult {
  Model model;
  TrainLog log;
};

TrainResult train(std::span<const Scene> dataset, const ModelConfig& model_config, const TrainConfig& config);

}  // namespace hald
