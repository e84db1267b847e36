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

#include <atomic>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "hald/anchors.hpp"
#include "hald/bundle.hpp"
#include "hald/kernels.hpp"
#include "hald/scene.hpp"
#include "hald/tensor.hpp"

namespace hald {

enum class Pooling { flatten, gap };
enum class HeadKind { classification, regression };

Pooling parse_pooling(std::string_view name);
std::string_view pooling_name(Pooling p);
HeadKind parse_head(std::string_view name);
std::string_view head_name(HeadKind h);

struct ConvStage {
  int channels = 8;
  int kernel = 3;
  int stride = 2;
  friend bool operator==(const ConvStage&, const ConvStage&) = default;
};

struct ModelConfig {
  int input_height = 64;
  int input_width = 160;
  std::vector<ConvStage> stages{{8, 3, 2}, {16, 3, 2}, {32, 3, 2}};
  int hidden = 256;
  Pooling pooling = Pooling::flatten;
  HeadKind head = HeadKind::classification;
  AnchorSystem system = AnchorSystem::preset("desk");

  void validate() const;
  std::vector<ConvShape> conv_shapes() const;
  int pooled_size() const;
  int loc_outputs() const;
  int exist_outputs() const;

  friend bool operator==(const ModelConfig&, const ModelConfig&) = default;
};

nlohmann::ordered_json model_config_to_json(const ModelConfig& config);
ModelConfig model_config_from_json(const nlohmann::ordered_json& j);

/// Backbone output, channels x height x width.
struct FeatureMap {
  int channels = 0;
  int height = 0;
  int width = 0;
  std::vector<double> values;

  double at(int c, int y, int x) const { return values[(static_cast<std::size_t>(c) * height + y) * width + x]; }
  friend bool operator==(const FeatureMap&, const FeatureMap&) = default;
};

/// All c*h*w values in channel-major, then row, then column order.
std::vector<double> pool_flatten(const FeatureMap& feature);
/// Per-channel spatial mean.
std::vector<double> pool_gap(const FeatureMap& feature);

/// Activations kept for the backward pass. One cache per caller.
struct ForwardCache {
  std::vector<std::vector<double>> stage_inputs;  // input to every conv stage
  FeatureMap feature;                             // post-ReLU output of the last stage
  std::vector<double> pooled;
  std::vector<double> hidden;                     // post-ReLU
  bool valid = false;
};

/// Raw head outputs: loc = [rows | cols], exist = [rows | cols].
struct HeadOutput {
  std::vector<double> loc;
  std::vector<double> exist;
};

struct Conv2d {
  ConvShape shape;
  Tensor weight;
  Tensor bias;
};

struct Linear {
  int n_in = 0;
  int n_out = 0;
  Tensor weight;  // [n_out][n_in]
  Tensor bias;
};

class Model {
 public:
  /// Kaiming-uniform (fan-in) weights and zero biases drawn from `seed`.
  Model(ModelConfig config, std::uint64_t seed);
  Model(const Model& other);
  Model& operator=(const Model& other);
  Model(Model&& other) noexcept;
  Model& operator=(Model&& other) noexcept;

  const ModelConfig& config() const { return config_; }
  const AnchorSystem& system() const { return config_.system; }

  /// Fixed order: conv weight/bias per stage, hidden, loc head, exist head.
  std::vector<Tensor*> parameters();
  std::vector<const Tensor*> parameters() const;
  std::vector<std::string> parameter_names() const;
  std::size_t parameter_count() const;
  void zero_grad();

  FeatureMap backbone(const ImageGrid& image, ForwardCache& cache) const;
  HeadOutput classify(const FeatureMap& feature, ForwardCache& cache) const;
  HeadOutput classify(const FeatureMap& feature) const;

  PredictionBundle forward(const ImageGrid& image, ForwardCache& cache) const;
  PredictionBundle forward(const ImageGrid& image) const;
  RegressionBundle regression_forward(const ImageGrid& image, ForwardCache& cache) const;
  RegressionBundle regression_forward(const ImageGrid& image) const;

  /// Accumulates parameter gradients into Tensor::grad.
  void backward(const ForwardCache& cache, const HeadOutput& grad);
  void backward(const ForwardCache& cache, const PredictionBundle& grad);
  void backward(const ForwardCache& cache, const RegressionBundle& grad);

  PredictionBundle to_bundle(const HeadOutput& out) const;
  RegressionBundle to_regression(const HeadOutput& out) const;

  std::size_t backbone_calls() const { return backbone_calls_.load(); }
  std::size_t classifier_calls() const { return classifier_calls_.load(); }
  void reset_counters();

 private:
  HeadOutput run(const ImageGrid& image, ForwardCache& cache) const;
  void copy_counters(const Model& other);

  ModelConfig config_;
  std::vector<Conv2d> convs_;
  Linear hidden_;
  Linear loc_;
  Linear exist_;
  mutable std::atomic<std::size_t> backbone_calls_{0};
  mutable std::atomic<std::size_t> classifier_calls_{0};
};

/// Feature-level test-time augmentation. The backbone runs once; the
/// classifier sees the feature plus four copies shifted by `shift_cells`
/// (up, down, left, right, zero fill) and the per-anchor probabilities are
/// averaged, then returned as log-probabilities.
PredictionBundle fltta_forward(const Model& model, const ImageGrid& image, int shift_cells);

/// Moves content by (dy, dx) cells; vacated cells are zero.
FeatureMap shift_feature(const FeatureMap& feature, int dy, int dx);

}  // namespace hald
