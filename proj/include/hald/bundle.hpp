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
#include <vector>

namespace hald {

/// lanes x anchors x width values, row-major. Holds localization logits
/// (width = classes), existence logits (width = 2) or regressed
/// coordinates (width = 1).
struct LogitBlock {
  int lanes = 0;
  int anchors = 0;
  int width = 0;
  std::vector<double> values;

  LogitBlock() = default;
  LogitBlock(int l, int a, int w, double fill = 0.0)
      : lanes(l), anchors(a), width(w), values(static_cast<std::size_t>(l) * a * w, fill) {}

  std::size_t offset(int lane, int anchor) const {
    return (static_cast<std::size_t>(lane) * anchors + anchor) * width;
  }
  std::span<double> at(int lane, int anchor) { return {values.data() + offset(lane, anchor), static_cast<std::size_t>(width)}; }
  std::span<const double> at(int lane, int anchor) const {
    return {values.data() + offset(lane, anchor), static_cast<std::size_t>(width)};
  }
  bool same_shape(const LogitBlock& o) const { return lanes == o.lanes && anchors == o.anchors && width == o.width; }
  std::size_t size() const { return values.size(); }

  friend bool operator==(const LogitBlock&, const LogitBlock&) = default;
};

/// Existence index convention: [0] = absent, [1] = present.
inline constexpr int kAbsent = 0;
inline constexpr int kPresent = 1;

/// Classification head output.
struct PredictionBundle {
  LogitBlock loc_rows;    // N^r_lane x N_row x N^r_dim
  LogitBlock loc_cols;    // N^c_lane x N_col x N^c_dim
  LogitBlock exist_rows;  // N^r_lane x N_row x 2
  LogitBlock exist_cols;  // N^c_lane x N_col x 2

  friend bool operator==(const PredictionBundle&, const PredictionBundle&) = default;
};

/// Regression head output. Coordinates are in class units: the decoded
/// position is (value + 0.5) / N_dim, matching the classification decode.
struct RegressionBundle {
  LogitBlock coord_rows;  // N^r_lane x N_row x 1
  LogitBlock coord_cols;  // N^c_lane x N_col x 1
  LogitBlock exist_rows;
  LogitBlock exist_cols;

  friend bool operator==(const RegressionBundle&, const RegressionBundle&) = default;
};

}  // namespace hald
