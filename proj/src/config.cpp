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

#include "hald/config.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

namespace hald {

namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

template <class T>
T parse_number(std::string_view key, const std::string& text) {
  T value{};
  const char* end = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(text.data(), end, value);
  if (ec != std::errc() || ptr != end || text.empty())
    throw ConfigError("key '" + std::string(key) + "': '" + text + "' is not a valid number");
  return value;
}

std::vector<std::string> split_list(const std::string& text) {
  std::vector<std::string> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

}  // namespace

const std::vector<ConfigKey>& config_schema() {
  static const std::vector<ConfigKey> schema{
      {"seed", "1", "master seed (gen: first scene seed; train/ablate: model and shuffle seed)"},
      {"out", ".", "output directory (gen also accepts a .jsonl file path)"},
      {"threads", "", "worker threads; empty uses HAL_THREADS, then all cores"},
      {"n", "100", "number of scenes to generate"},
      {"preset", "", "gen: desk|straight; complexity: anchor preset (empty uses explicit dims)"},
      {"scenes", "scenes.jsonl", "scene file"},
      {"system", "desk", "anchor system preset: desk, desk-rows, desk-cols, culane-like, tusimple-rows"},
      {"assign", "semantics", "lane to anchor assignment: semantics, geometry, rows, columns"},
      {"pooling", "flatten", "feature pooling: flatten, gap"},
      {"head", "classification", "output head: classification, regression"},
      {"hidden", "256", "hidden layer width"},
      {"input_height", "64", "network input height"},
      {"input_width", "160", "network input width"},
      {"epochs", "15", "training epochs"},
      {"batch_size", "16", "samples per step"},
      {"lr0", "0.05", "initial learning rate"},
      {"lr_decay", "10", "learning rate divisor after the decay epoch"},
      {"decay_fraction", "0.8", "fraction of epochs before the decay"},
      {"momentum", "0.9", "SGD momentum"},
      {"alpha", "0.05", "expectation loss weight"},
      {"beta", "1", "existence loss weight"},
      {"w_sim", "0", "similarity loss weight"},
      {"w_shp", "0", "shape loss weight"},
      {"stroke", "2", "rendered lane stroke in pixels"},
      {"noise", "0.05", "image noise sigma"},
      {"occlusions", "1", "occluding rectangles per image"},
      {"max_shift", "0.05", "maximum shift augmentation"},
      {"checkpoints", "0", "write a model file after every epoch"},
      {"model", "model.hald", "model file"},
      {"decode", "expectation", "decode mode: expectation, argmax"},
      {"fltta", "0", "feature-level test-time augmentation"},
      {"shift", "1", "FLTTA shift in feature cells"},
      {"min_points", "-1", "post-processing minimum lane points; -1 uses the system default"},
      {"oracle", "0", "evaluate one-hot ground-truth predictions instead of a model"},
      {"eval_height", "320", "evaluation height"},
      {"eval_width", "800", "evaluation width"},
      {"lane_width", "30", "lane width in pixels at width 800"},
      {"iou", "0.5", "IoU threshold (strict)"},
      {"tol", "20", "accuracy tolerance in pixels at width 800"},
      {"roi_top", "0.3", "lanes are evaluated below this normalized y"},
      {"image_seed", "0", "seed for evaluation image noise"},
      {"match", "hungarian", "lane matching: hungarian, greedy"},
      {"overlays", "4", "number of scene overlay SVGs"},
      {"angle_bins", "0,30,60,90", "lane angle bin edges in degrees"},
      {"kind", "anchors", "ablation: anchors, decode, head, dims, pool"},
      {"values", "25,50,100,200", "dims ablation values"},
      {"axis", "row", "dims ablation axis: row, column"},
      {"train_scenes", "600", "ablation training scenes"},
      {"test_scenes", "200", "ablation test scenes"},
      {"train_seed", "1000", "first ablation training scene seed"},
      {"test_seed", "500000", "first ablation test scene seed"},
      {"image_h", "320", "complexity: image height"},
      {"image_w", "1600", "complexity: image width"},
      {"n_row", "18", "complexity: row anchors"},
      {"n_col", "41", "complexity: column anchors"},
      {"row_lanes", "2", "complexity: lanes on row anchors"},
      {"col_lanes", "2", "complexity: lanes on column anchors"},
      {"row_dim", "200", "complexity: row classification dimension"},
      {"col_dim", "100", "complexity: column classification dimension"},
      {"seg_classes", "5", "complexity: segmentation classes"},
  };
  return schema;
}

const ConfigKey* find_config_key(std::string_view name) {
  for (const ConfigKey& k : config_schema())
    if (k.name == name) return &k;
  return nullptr;
}

std::string flag_name(std::string_view key) {
  std::string f(key);
  for (char& c : f)
    if (c == '_') c = '-';
  return "--" + f;
}

RunConfig::RunConfig() {
  for (const ConfigKey& k : config_schema()) values_[k.name] = k.default_value;
}

void RunConfig::set(std::string_view key, std::string value) {
  std::string name(key);
  for (char& c : name)
    if (c == '-') c = '_';
  if (!find_config_key(name)) throw ConfigError("unknown config key '" + std::string(key) + "'");
  values_[name] = std::move(value);
  explicit_.insert(name);
}

void RunConfig::merge_text(std::string_view text, std::string_view source) {
  std::istringstream in{std::string(text)};
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    const std::string body = trim(line);
    if (body.empty()) continue;
    const auto eq = body.find('=');
    const std::string where = std::string(source) + ":" + std::to_string(lineno);
    if (eq == std::string::npos) throw ConfigError(where + ": expected 'key = value'");
    const std::string key = trim(std::string_view(body).substr(0, eq));
    try {
      set(key, trim(std::string_view(body).substr(eq + 1)));
    } catch (const ConfigError& e) {
      throw ConfigError(where + ": " + e.what());
    }
  }
}

void RunConfig::merge_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file '" + path.string() + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  merge_text(ss.str(), path.string());
}

bool RunConfig::is_set(std::string_view key) const { return explicit_.contains(key); }

const std::string& RunConfig::get(std::string_view key) const {
  const auto it = values_.find(key);
  if (it == values_.end()) throw ConfigError("unknown config key '" + std::string(key) + "'");
  return it->second;
}

int RunConfig::get_int(std::string_view key) const { return parse_number<int>(key, get(key)); }

std::uint64_t RunConfig::get_u64(std::string_view key) const { return parse_number<std::uint64_t>(key, get(key)); }

double RunConfig::get_double(std::string_view key) const { return parse_number<double>(key, get(key)); }

bool RunConfig::get_bool(std::string_view key) const {
  const std::string& v = get(key);
  if (v == "1" || v == "true" || v == "on" || v == "yes") return true;
  if (v == "0" || v == "false" || v == "off" || v == "no") return false;
  throw ConfigError("key '" + std::string(key) + "': '" + v + "' is not a boolean");
}

std::vector<int> RunConfig::get_int_list(std::string_view key) const {
  std::vector<int> out;
  for (const std::string& item : split_list(get(key))) out.push_back(parse_number<int>(key, item));
  return out;
}

std::vector<double> RunConfig::get_double_list(std::string_view key) const {
  std::vector<double> out;
  for (const std::string& item : split_list(get(key))) out.push_back(parse_number<double>(key, item));
  return out;
}

std::string RunConfig::to_text() const {
  std::string s;
  for (const ConfigKey& k : config_schema()) s += k.name + " = " + values_.at(k.name) + "\n";
  return s;
}

}  // namespace hald
