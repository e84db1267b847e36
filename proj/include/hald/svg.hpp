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

#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "hald/scene.hpp"

namespace hald {

struct BarSeries {
  std::string name;
  std::vector<double> values;  // one per label
};

struct LineSeries {
  std::string name;
  std::vector<double> xs;
  std::vector<double> ys;
  bool markers = true;
};

/// Grouped bars, one group per label.
std::string svg_bar_chart(std::string_view title, std::span<const std::string> labels,
                          std::span<const BarSeries> series);
std::string svg_line_chart(std::string_view title, std::string_view x_label, std::string_view y_label,
                           std::span<const LineSeries> series);
/// Ground truth in green, predictions in red, on a width x height canvas.
std::string svg_scene_overlay(std::span<const Lane> ground_truth, std::span<const Lane> predictions, int width,
                              int height);

std::string xml_escape(std::string_view text);

}  // namespace hald
