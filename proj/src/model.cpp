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
#include <limits>
#include <stdexcept>
#include <string>

#include "hald/losses.hpp"
#include "hald/model.hpp"
#include "hald/rng.hpp"

namespace hald {

using nlohmann::ordered_json;

namespace {

void relu_inplace(std::vector<double>& v) {
  for (double& x : v) x = x > 0.0 ? x : 0.0;
}

// Zeroes gradient entries whose post-ReLU activation is not positive.
void relu_mask(std::vector<double>& grad, const std::vector<double>& activation) {
  for (std::size_t i = 0; i < grad.size(); ++i)
    if (!(activation[i] > 0.0)) grad[i] = 0.0;
}

void kaiming_uniform(Tensor& t, int fan_in, Rng& rng) {
  const double bound = std::sqrt(6.0 / fan_in);
  for (double& v : t.values) v = rng.uniform(-bound, bound);
}

Linear make_linear(int n_in, int n_out) {
  return {n_in, n_out, Tensor({n_out, n_in}), Tensor({n_out})};
}

void linear_apply(const Linear& l, const std::vector<double>& x, std::vector<double>& y) {
  y.resize(l.n_out);
  kernels::linear_forward(l.n_in, l.n_out, x, l.weight.values, l.bias.values, y);
}

std::vector<double> concat(const std::vector<double>& a, const std::vector<double>& b) {
  std::vector<double> out(a);
  out.insert(out.end(), b.begin(), b.end());
  return out;
}

void split_into(const std::vector<double>& src, std::size_t at, LogitBlock& first, LogitBlock& second) {
  first.values.assign(src.begin(), src.begin() + static_cast<std::ptrdiff_t>(at));
  second.values.assign(src.begin() + static_cast<std::ptrdiff_t>(at), src.end());
}

}  // namespace

Pooling parse_pooling(std::string_view name) {
  if (name == "flatten") return Pooling::flatten;
  if (name == "gap") return Pooling::gap;
  throw std::invalid_argument("unknown pooling '" + std::string(name) + "'");
}
std::string_view pooling_name(Pooling p) { return p == Pooling::flatten ? "flatten" : "gap"; }

HeadKind parse_head(std::string_view name) {
  if (name == "classification" || name == "cls") return HeadKind::classification;
  if (name == "regression" || name == "reg") return HeadKind::regression;
  throw std::invalid_argument("unknown head '" + std::string(name) + "'");
}
std::string_view head_name(HeadKind h) { return h == HeadKind::classification ? "classification" : "regression"; }

void ModelConfig::validate() const {
  if (input_height < 8 || input_width < 8) throw std::invalid_argument("model input must be at least 8x8");
  if (stages.empty()) throw std::invalid_argument("model needs at least one conv stage");
  for (const ConvStage& s : stages)
    if (s.channels < 1 || s.kernel < 1 || s.stride < 1) throw std::invalid_argument("invalid conv stage");
  if (hidden < 1) throw std::invalid_argument("hidden width must be >= 1");
  system.validate();
}

std::vector<ConvShape> ModelConfig::conv_shapes() const {
  std::vector<ConvShape> shapes;
  int c = 1, h = input_height, w = input_width;
  for (const ConvStage& s : stages) {
    shapes.push_back(ConvShape::same(c, h, w, s.channels, s.kernel, s.stride));
    c = shapes.back().out_c;
    h = shapes.back().out_h;
    w = shapes.back().out_w;
  }
  return shapes;
}

int ModelConfig::pooled_size() const {
  const ConvShape last = conv_shapes().back();
  return pooling == Pooling::flatten ? static_cast<int>(last.out_size()) : last.out_c;
}

int ModelConfig::loc_outputs() const {
  const AnchorSystem& s = system;
  if (head == HeadKind::regression) return s.n_row_lanes * s.n_row() + s.n_col_lanes * s.n_col();
  return s.n_row_lanes * s.n_row() * s.row_dim + s.n_col_lanes * s.n_col() * s.col_dim;
}

int ModelConfig::exist_outputs() const {
  return 2 * (system.n_row_lanes * system.n_row() + system.n_col_lanes * system.n_col());
}

ordered_json model_config_to_json(const ModelConfig& c) {
  ordered_json j;
  j["input_height"] = c.input_height;
  j["input_width"] = c.input_width;
  ordered_json stages = ordered_json::array();
  for (const ConvStage& s : c.stages) stages.push_back({s.channels, s.kernel, s.stride});
  j["stages"] = std::move(stages);
  j["hidden"] = c.hidden;
  j["pooling"] = pooling_name(c.pooling);
  j["head"] = head_name(c.head);
  j["system"] = anchor_system_to_json(c.system);
  return j;
}

ModelConfig model_config_from_json(const ordered_json& j) {
  ModelConfig c;
  c.input_height = j.at("input_height").get<int>();
  c.input_width = j.at("input_width").get<int>();
  c.stages.clear();
  for (const auto& s : j.at("stages")) c.stages.push_back({s.at(0).get<int>(), s.at(1).get<int>(), s.at(2).get<int>()});
  c.hidden = j.at("hidden").get<int>();
  c.pooling = parse_pooling(j.at("pooling").get<std::string>());
  c.head = parse_head(j.at("head").get<std::string>());
  c.system = anchor_system_from_json(j.at("system"));
  c.validate();
  return c;
}

std::vector<double> pool_flatten(const FeatureMap& feature) { return feature.values; }

std::vector<double> pool_gap(const FeatureMap& feature) {
  std::vector<double> out(feature.channels, 0.0);
  const std::size_t area = static_cast<std::size_t>(feature.height) * feature.width;
  for (int c = 0; c < feature.channels; ++c) {
    double s = 0.0;
    for (std::size_t i = 0; i < area; ++i) s += feature.values[c * area + i];
    out[c] = s / static_cast<double>(area);
  }
  return out;
}

Model::Model(ModelConfig config, std::uint64_t seed) : config_(std::move(config)) {
  config_.validate();
  for (const ConvShape& s : config_.conv_shapes())
    convs_.push_back({s, Tensor({s.out_c, s.in_c, s.kernel, s.kernel}), Tensor({s.out_c})});
  hidden_ = make_linear(config_.pooled_size(), config_.hidden);
  loc_ = make_linear(config_.hidden, config_.loc_outputs());
  exist_ = make_linear(config_.hidden, config_.exist_outputs());

  Rng rng(mix_seed(seed, 0x1417));
  for (Conv2d& c : convs_) kaiming_uniform(c.weight, c.shape.in_c * c.shape.kernel * c.shape.kernel, rng);
  kaiming_uniform(hidden_.weight, hidden_.n_in, rng);
  kaiming_uniform(loc_.weight, loc_.n_in, rng);
  kaiming_uniform(exist_.weight, exist_.n_in, rng);
}

Model::Model(const Model& o) : config_(o.config_), convs_(o.convs_), hidden_(o.hidden_), loc_(o.loc_), exist_(o.exist_) {
  copy_counters(o);
}

Model& Model::operator=(const Model& o) {
  if (this != &o) {
    config_ = o.config_;
    convs_ = o.convs_;
    hidden_ = o.hidden_;
    loc_ = o.loc_;
    exist_ = o.exist_;
    copy_counters(o);
  }
  return *this;
}

Model::Model(Model&& o) noexcept
    : config_(std::move(o.config_)),
      convs_(std::move(o.convs_)),
      hidden_(std::move(o.hidden_)),
      loc_(std::move(o.loc_)),
      exist_(std::move(o.exist_)) {
  copy_counters(o);
}

Model& Model::operator=(Model&& o) noexcept {
  config_ = std::move(o.config_);
  convs_ = std::move(o.convs_);
  hidden_ = std::move(o.hidden_);
  loc_ = std::move(o.loc_);
  exist_ = std::move(o.exist_);
  copy_counters(o);
  return *this;
}

void Model::copy_counters(const Model& o) {
  backbone_calls_.store(o.backbone_calls_.load());
  classifier_calls_.store(o.classifier_calls_.load());
}

void Model::reset_counters() {
  backbone_calls_.store(0);
  classifier_calls_.store(0);
}

std::vector<Tensor*> Model::parameters() {
  std::vector<Tensor*> out;
  for (Conv2d& c : convs_) {
    out.push_back(&c.weight);
    out.push_back(&c.bias);
  }
  for (Linear* l : {&hidden_, &loc_, &exist_}) {
    out.push_back(&l->weight);
    out.push_back(&l->bias);
  }
  return out;
}

std::vector<const Tensor*> Model::parameters() const {
  auto mut = const_cast<Model*>(this)->parameters();
  return {mut.begin(), mut.end()};
}

std::vector<std::string> Model::parameter_names() const {
  std::vector<std::string> names;
  for (std::size_t i = 0; i < convs_.size(); ++i) {
    names.push_back("conv" + std::to_string(i) + ".weight");
    names.push_back("conv" + std::to_string(i) + ".bias");
  }
  for (const char* l : {"hidden", "loc_head", "exist_head"}) {
    names.push_back(std::string(l) + ".weight");
    names.push_back(std::string(l) + ".bias");
  }
  return names;
}

std::size_t Model::parameter_count() const {
  std::size_t n = 0;
  for (const Tensor* t : parameters()) n += t->size();
  return n;
}

void Model::zero_grad() {
  for (Tensor* t : parameters()) t->zero_grad();
}

FeatureMap Model::backbone(const ImageGrid& image, ForwardCache& cache) const {
  if (image.height != config_.input_height || image.width != config_.input_width ||
      image.values.size() != static_cast<std::size_t>(image.height) * image.width)
    throw std::invalid_argument("image is " + std::to_string(image.height) + "x" + std::to_string(image.width) +
                                ", model expects " + std::to_string(config_.input_height) + "x" +
                                std::to_string(config_.input_width));
  backbone_calls_.fetch_add(1);
  cache.valid = false;
  cache.stage_inputs.assign(1, image.values);
  std::vector<double> out;
  for (std::size_t s = 0; s < convs_.size(); ++s) {
    const Conv2d& conv = convs_[s];
    out.assign(conv.shape.out_size(), 0.0);
    kernels::conv2d_forward(conv.shape, cache.stage_inputs.back(), conv.weight.values, conv.bias.values, out);
    relu_inplace(out);
    if (s + 1 < convs_.size()) cache.stage_inputs.push_back(out);
  }
  const ConvShape& last = convs_.back().shape;
  cache.feature = {last.out_c, last.out_h, last.out_w, std::move(out)};
  return cache.feature;
}

HeadOutput Model::classify(const FeatureMap& feature, ForwardCache& cache) const {
  const ConvShape& last = convs_.back().shape;
  if (feature.channels != last.out_c || feature.height != last.out_h || feature.width != last.out_w)
    throw std::invalid_argument("feature map shape does not match the backbone");
  classifier_calls_.fetch_add(1);
  cache.pooled = config_.pooling == Pooling::flatten ? pool_flatten(feature) : pool_gap(feature);
  linear_apply(hidden_, cache.pooled, cache.hidden);
  relu_inplace(cache.hidden);
  HeadOutput out;
  linear_apply(loc_, cache.hidden, out.loc);
  linear_apply(exist_, cache.hidden, out.exist);
  return out;
}

HeadOutput Model::classify(const FeatureMap& feature) const {
  ForwardCache scratch;
  return classify(feature, scratch);
}

HeadOutput Model::run(const ImageGrid& image, ForwardCache& cache) const {
  backbone(image, cache);
  HeadOutput out = classify(cache.feature, cache);
  cache.valid = true;
  return out;
}

PredictionBundle Model::to_bundle(const HeadOutput& out) const {
  if (config_.head != HeadKind::classification) throw std::logic_error("model has a regression head");
  const AnchorSystem& s = config_.system;
  PredictionBundle b{LogitBlock(s.n_row_lanes, s.n_row(), s.row_dim), LogitBlock(s.n_col_lanes, s.n_col(), s.col_dim),
                     LogitBlock(s.n_row_lanes, s.n_row(), 2), LogitBlock(s.n_col_lanes, s.n_col(), 2)};
  split_into(out.loc, b.loc_rows.size(), b.loc_rows, b.loc_cols);
  split_into(out.exist, b.exist_rows.size(), b.exist_rows, b.exist_cols);
  return b;
}

RegressionBundle Model::to_regression(const HeadOutput& out) const {
  if (config_.head != HeadKind::regression) throw std::logic_error("model has a classification head");
  const AnchorSystem& s = config_.system;
  RegressionBundle b{LogitBlock(s.n_row_lanes, s.n_row(), 1), LogitBlock(s.n_col_lanes, s.n_col(), 1),
                     LogitBlock(s.n_row_lanes, s.n_row(), 2), LogitBlock(s.n_col_lanes, s.n_col(), 2)};
  split_into(out.loc, b.coord_rows.size(), b.coord_rows, b.coord_cols);
  split_into(out.exist, b.exist_rows.size(), b.exist_rows, b.exist_cols);
  return b;
}

PredictionBundle Model::forward(const ImageGrid& image, ForwardCache& cache) const {
  if (config_.head != HeadKind::classification) throw std::logic_error("forward() needs a classification head");
  return to_bundle(run(image, cache));
}

PredictionBundle Model::forward(const ImageGrid& image) const {
  ForwardCache cache;
  return forward(image, cache);
}

RegressionBundle Model::regression_forward(const ImageGrid& image, ForwardCache& cache) const {
  if (config_.head != HeadKind::regression) throw std::logic_error("regression_forward() needs a regression head");
  return to_regression(run(image, cache));
}

RegressionBundle Model::regression_forward(const ImageGrid& image) const {
  ForwardCache cache;
  return regression_forward(image, cache);
}

void Model::backward(const ForwardCache& cache, const HeadOutput& grad) {
  if (!cache.valid) throw std::logic_error("backward called without a cached forward pass");
  if (grad.loc.size() != static_cast<std::size_t>(loc_.n_out) ||
      grad.exist.size() != static_cast<std::size_t>(exist_.n_out))
    throw std::invalid_argument("output gradient has the wrong size");

  kernels::linear_backward_params(loc_.n_in, loc_.n_out, cache.hidden, grad.loc, loc_.weight.grad, loc_.bias.grad);
  kernels::linear_backward_params(exist_.n_in, exist_.n_out, cache.hidden, grad.exist, exist_.weight.grad,
                                  exist_.bias.grad);
  std::vector<double> g_hidden(config_.hidden);
  std::vector<double> g_tmp(config_.hidden);
  kernels::linear_backward_input(loc_.n_in, loc_.n_out, loc_.weight.values, grad.loc, g_hidden);
  kernels::linear_backward_input(exist_.n_in, exist_.n_out, exist_.weight.values, grad.exist, g_tmp);
  for (std::size_t i = 0; i < g_hidden.size(); ++i) g_hidden[i] += g_tmp[i];
  relu_mask(g_hidden, cache.hidden);

  kernels::linear_backward_params(hidden_.n_in, hidden_.n_out, cache.pooled, g_hidden, hidden_.weight.grad,
                                  hidden_.bias.grad);
  std::vector<double> g_pooled(hidden_.n_in);
  kernels::linear_backward_input(hidden_.n_in, hidden_.n_out, hidden_.weight.values, g_hidden, g_pooled);

  const FeatureMap& f = cache.feature;
  std::vector<double> g_feature;
  if (config_.pooling == Pooling::flatten) {
    g_feature = std::move(g_pooled);
  } else {
    const std::size_t area = static_cast<std::size_t>(f.height) * f.width;
    g_feature.resize(f.values.size());
    for (int c = 0; c < f.channels; ++c)
      std::fill(g_feature.begin() + c * area, g_feature.begin() + (c + 1) * area, g_pooled[c] / area);
  }
  relu_mask(g_feature, f.values);

  std::vector<double> g_out = std::move(g_feature);
  std::vector<double> g_in;
  for (std::size_t s = convs_.size(); s-- > 0;) {
    Conv2d& conv = convs_[s];
    kernels::conv2d_backward_params(conv.shape, cache.stage_inputs[s], g_out, conv.weight.grad, conv.bias.grad);
    if (s == 0) break;
    g_in.assign(conv.shape.in_size(), 0.0);
    kernels::conv2d_backward_input(conv.shape, conv.weight.values, g_out, g_in);
    relu_mask(g_in, cache.stage_inputs[s]);
    std::swap(g_out, g_in);
  }
}

void Model::backward(const ForwardCache& cache, const PredictionBundle& grad) {
  backward(cache, HeadOutput{concat(grad.loc_rows.values, grad.loc_cols.values),
                             concat(grad.exist_rows.values, grad.exist_cols.values)});
}

void Model::backward(const ForwardCache& cache, const RegressionBundle& grad) {
  backward(cache, HeadOutput{concat(grad.coord_rows.values, grad.coord_cols.values),
                             concat(grad.exist_rows.values, grad.exist_cols.values)});
}

FeatureMap shift_feature(const FeatureMap& f, int dy, int dx) {
  FeatureMap out{f.channels, f.height, f.width, std::vector<double>(f.values.size(), 0.0)};
  for (int c = 0; c < f.channels; ++c)
    for (int y = 0; y < f.height; ++y) {
      const int sy = y - dy;
      if (sy < 0 || sy >= f.height) continue;
      for (int x = 0; x < f.width; ++x) {
        const int sx = x - dx;
        if (sx < 0 || sx >= f.width) continue;
        out.values[(static_cast<std::size_t>(c) * f.height + y) * f.width + x] = f.at(c, sy, sx);
      }
    }
  return out;
}

PredictionBundle fltta_forward(const Model& model, const ImageGrid& image, int shift_cells) {
  if (shift_cells < 0) throw std::invalid_argument("FLTTA shift must be >= 0");
  ForwardCache cache;
  const FeatureMap feature = model.backbone(image, cache);
  if (shift_cells >= feature.height || shift_cells >= feature.width)
    throw std::invalid_argument("FLTTA shift is not smaller than the feature map");
  // Five identical copies average to the copy itself.
  if (shift_cells == 0) return model.to_bundle(model.classify(feature));

  const int s = shift_cells;
  const FeatureMap copies[5] = {feature, shift_feature(feature, -s, 0), shift_feature(feature, s, 0),
                                shift_feature(feature, 0, -s), shift_feature(feature, 0, s)};
  PredictionBundle outs[5];
  for (int k = 0; k < 5; ++k) outs[k] = model.to_bundle(model.classify(copies[k]));

  PredictionBundle merged = outs[0];
  auto integrate = [&](LogitBlock PredictionBundle::*member) {
    LogitBlock& dst = merged.*member;
    for (int l = 0; l < dst.lanes; ++l)
      for (int j = 0; j < dst.anchors; ++j) {
        std::vector<double> mean(dst.width, 0.0);
        for (const PredictionBundle& o : outs) {
          const auto p = softmax((o.*member).at(l, j));
          for (int k = 0; k < dst.width; ++k) mean[k] += p[k];
        }
        auto out = dst.at(l, j);
        for (int k = 0; k < dst.width; ++k)
          out[k] = std::log(std::max(mean[k] / 5.0, std::numeric_limits<double>::min()));
      }
  };
  integrate(&PredictionBundle::loc_rows);
  integrate(&PredictionBundle::loc_cols);
  integrate(&PredictionBundle::exist_rows);
  integrate(&PredictionBundle::exist_cols);
  return merged;
}

}  // namespace hald
