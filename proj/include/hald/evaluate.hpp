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
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "hald/anchors.hpp"
#include "hald/metrics.hpp"
#include "hald/model.hpp"
#include "hald/scene.hpp"
#include "hald/train.hpp"

namespace hald {

struct EvalOptions {
  DecodeMode decode = DecodeMode::expectation;
  bool fltta = false;
  int fltta_shift = 1;
  int min_points = -1;  // -1: default_min_points(system)
  int eval_height = 320;
  int eval_width = 800;
  double lane_width_px = 30.0;  // at the 800-pixel reference width
  double iou_threshold = 0.5;
  double tol_px = 20.0;
  std::vector<double> accuracy_rows;  // empty: default_accuracy_rows()
  double roi_top = 0.3;
  DataConfig data;
  std::uint64_t image_seed = 0;
  MatchMethod match = MatchMethod::hungarian;
  bool keep_predictions = false;
};

/// y = 0.30, 0.32, ..., 1.00.
std::vector<double> default_accuracy_rows();

/// Test image for a scene: no shift, noise seeded from (image_seed, scene seed).
ImageGrid eval_image(const Scene& scene, int height, int width, const DataConfig& data, std::uint64_t image_seed);

/// Maps a scene and its rendered image to decoded lanes before post-processing.
using Predictor = std::function<DecodedLanes(const Scene&, const ImageGrid&)>;

Predictor model_predictor(const Model& model, const EvalOptions& options);
/// Decodes one-hot logits built from the scene's own targets.
Predictor oracle_predictor(const AnchorSystem& system, AssignMode assign);

struct EvalReport {
  F1Report f1;
  AccuracyReport accuracy;
  double mean_loc_error = 0.0;  // along-anchor error, normalized units
  long loc_points = 0;
  std::vector<std::vector<Lane>> predictions;  // per scene, when kept
};

EvalReport evaluate(const Predictor& predictor, std::span<const Scene> scenes, const AnchorSystem& system,
                    int image_height, int image_width, const EvalOptions& options);
EvalReport evaluate(const Model& model, std::span<const Scene> scenes, const EvalOptions& options);

struct AngleBin {
  double lo = 0.0;  // degrees, exclusive
  double hi = 0.0;  // degrees, inclusive
  long count = 0;
  double mean_horizontal = 0.0;
  double mean_perpendicular = 0.0;
};

struct AngleErrorTable {
  std::vector<AngleBin> bins;
  std::string to_csv() const;
  /// Mean errors per bin with eps / sin(theta) overlaid, eps the overall
  /// mean perpendicular error.
  std::string to_svg() const;
};

/// Per row-anchor point of every lane placed on row anchors: horizontal error
/// and perpendicular error to the ground-truth line, binned by lane angle.
AngleErrorTable angle_error_stats(const Predictor& predictor, std::span<const Scene> scenes,
                                  const AnchorSystem& system, AssignMode assign, int image_height, int image_width,
                                  const EvalOptions& options, std::vector<double> edges_deg = {0.0, 30.0, 60.0, 90.0});

}  // namespace hald
