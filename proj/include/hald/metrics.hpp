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
#include <span>
#include <vector>

#include "hald/scene.hpp"

namespace hald {

/// Pixels whose centre lies within width_px / 2 of the lane. Pixel (r, c)
/// has its centre at (c, r); a lane point maps to (x * W, y * H).
struct LaneMask {
  int height = 0;
  int width = 0;
  std::vector<std::uint8_t> bits;

  bool at(int r, int c) const { return bits[static_cast<std::size_t>(r) * width + c] != 0; }
  std::size_t count() const;
};

LaneMask rasterize_lane_mask(const Lane& lane, double width_px, int height, int width);
double mask_iou(const LaneMask& a, const LaneMask& b);
double lane_iou(const Lane& a, const Lane& b, double width_px, int height, int width);

/// Lane width at `eval_width` that corresponds to `width_px` at `ref_width`.
inline double scaled_lane_width(int eval_width, double width_px = 30.0, int ref_width = 800) {
  return width_px * eval_width / ref_width;
}

enum class MatchMethod { hungarian, greedy };

struct F1Report {
  long tp = 0;
  long fp = 0;
  long fn = 0;
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  std::vector<double> pair_ious;

  static F1Report from_counts(long tp, long fp, long fn);
  /// Sums counts and recomputes the ratios.
  F1Report& operator+=(const F1Report& o);
};

/// Matched pairs with IoU strictly above the threshold are true positives.
F1Report culane_f1(std::span<const Lane> preds, std::span<const Lane> gts, double iou_threshold = 0.5,
                   double width_px = 30.0, int height = 320, int width = 800,
                   MatchMethod method = MatchMethod::hungarian);

struct AccuracyReport {
  long correct = 0;
  long total = 0;
  double accuracy() const { return total == 0 ? 0.0 : static_cast<double>(correct) / static_cast<double>(total); }
  AccuracyReport& operator+=(const AccuracyReport& o) {
    correct += o.correct;
    total += o.total;
    return *this;
  }
};

/// x where the lane first crosses each row (bottom first), or -1.
std::vector<double> sample_rows(const Lane& lane, std::span<const double> rows);

/// Lanes are matched by mean absolute x error over shared rows; a ground
/// truth point is correct when the matched prediction lies within tol_px at
/// the reference width.
AccuracyReport tusimple_accuracy(std::span<const Lane> preds, std::span<const Lane> gts,
                                 std::span<const double> row_anchors, double tol_px = 20.0, double width_ref = 800.0);

/// Longest piece of the lane with y in [top, 1]; empty points when none.
Lane clip_lane_below(const Lane& lane, double top);

}  // namespace hald
