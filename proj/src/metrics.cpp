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

#include "hald/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "hald/anchors.hpp"
#include "hald/hungarian.hpp"

namespace hald {

namespace {

double segment_distance_sq(double px, double py, double ax, double ay, double bx, double by) {
  const double dx = bx - ax;
  const double dy = by - ay;
  const double len2 = dx * dx + dy * dy;
  double t = 0.0;
  if (len2 > 0.0) t = std::clamp(((px - ax) * dx + (py - ay) * dy) / len2, 0.0, 1.0);
  const double ex = ax + t * dx - px;
  const double ey = ay + t * dy - py;
  return ex * ex + ey * ey;
}

}  // namespace

std::size_t LaneMask::count() const {
  return static_cast<std::size_t>(std::count(bits.begin(), bits.end(), std::uint8_t{1}));
}

LaneMask rasterize_lane_mask(const Lane& lane, double width_px, int height, int width) {
  if (lane.points.empty()) throw std::invalid_argument("cannot rasterize an empty lane");
  if (!(width_px >= 1.0)) throw std::invalid_argument("lane width must be >= 1 pixel");
  if (height <= 0 || width <= 0) throw std::invalid_argument("mask dimensions must be positive");
  LaneMask mask{height, width, std::vector<std::uint8_t>(static_cast<std::size_t>(height) * width, 0)};
  const double half = width_px / 2.0;
  const double half_sq = half * half;
  const std::size_t n = lane.points.size();
  const std::size_t segments = n == 1 ? 1 : n - 1;
  for (std::size_t i = 0; i < segments; ++i) {
    const Point2& a = lane.points[i];
    const Point2& b = lane.points[std::min(i + 1, n - 1)];
    const double ax = a.x * width, ay = a.y * height;
    const double bx = b.x * width, by = b.y * height;
    const int c0 = std::max(0, static_cast<int>(std::floor(std::min(ax, bx) - half)) - 1);
    const int c1 = std::min(width - 1, static_cast<int>(std::ceil(std::max(ax, bx) + half)) + 1);
    const int r0 = std::max(0, static_cast<int>(std::floor(std::min(ay, by) - half)) - 1);
    const int r1 = std::min(height - 1, static_cast<int>(std::ceil(std::max(ay, by) + half)) + 1);
    for (int r = r0; r <= r1; ++r) {
      for (int c = c0; c <= c1; ++c) {
        if (segment_distance_sq(c, r, ax, ay, bx, by) <= half_sq)
          mask.bits[static_cast<std::size_t>(r) * width + c] = 1;
      }
    }
  }
  return mask;
}

double mask_iou(const LaneMask& a, const LaneMask& b) {
  if (a.height != b.height || a.width != b.width) throw std::invalid_argument("mask dimensions differ");
  std::size_t inter = 0, uni = 0;
  for (std::size_t i = 0; i < a.bits.size(); ++i) {
    inter += a.bits[i] & b.bits[i];
    uni += a.bits[i] | b.bits[i];
  }
  return uni == 0 ? 0.0 : static_cast<double>(inter) / static_cast<double>(uni);
}

double lane_iou(const Lane& a, const Lane& b, double width_px, int height, int width) {
  return mask_iou(rasterize_lane_mask(a, width_px, height, width), rasterize_lane_mask(b, width_px, height, width));
}

F1Report F1Report::from_counts(long tp, long fp, long fn) {
  F1Report r;
  r.tp = tp;
  r.fp = fp;
  r.fn = fn;
  r.precision = tp + fp == 0 ? 0.0 : static_cast<double>(tp) / static_cast<double>(tp + fp);
  r.recall = tp + fn == 0 ? 0.0 : static_cast<double>(tp) / static_cast<double>(tp + fn);
  r.f1 = r.precision + r.recall == 0.0 ? 0.0 : 2.0 * r.precision * r.recall / (r.precision + r.recall);
  return r;
}

F1Report& F1Report::operator+=(const F1Report& o) {
  auto ious = std::move(pair_ious);
  ious.insert(ious.end(), o.pair_ious.begin(), o.pair_ious.end());
  *this = from_counts(tp + o.tp, fp + o.fp, fn + o.fn);
  pair_ious = std::move(ious);
  return *this;
}

F1Report culane_f1(std::span<const Lane> preds, std::span<const Lane> gts, double iou_threshold, double width_px,
                   int height, int width, MatchMethod method) {
  std::vector<LaneMask> pm, gm;
  pm.reserve(preds.size());
  gm.reserve(gts.size());
  for (const Lane& l : preds) pm.push_back(rasterize_lane_mask(l, width_px, height, width));
  for (const Lane& l : gts) gm.push_back(rasterize_lane_mask(l, width_px, height, width));
  Grid<double> iou(static_cast<int>(preds.size()), static_cast<int>(gts.size()));
  for (int i = 0; i < iou.rows; ++i)
    for (int j = 0; j < iou.cols; ++j) iou(i, j) = mask_iou(pm[i], gm[j]);
  const Matching m = method == MatchMethod::hungarian ? hungarian_max(iou) : greedy_max(iou);
  long tp = 0;
  std::vector<double> ious;
  for (auto [i, j] : m.pairs) {
    ious.push_back(iou(i, j));
    if (iou(i, j) > iou_threshold) ++tp;
  }
  const long np = static_cast<long>(preds.size());
  const long ng = static_cast<long>(gts.size());
  F1Report r = F1Report::from_counts(tp, np - tp, ng - tp);
  r.pair_ious = std::move(ious);
  return r;
}

std::vector<double> sample_rows(const Lane& lane, std::span<const double> rows) {
  std::vector<double> xs(rows.size(), -1.0);
  for (std::size_t k = 0; k < rows.size(); ++k) {
    if (auto x = intersect_lane_anchor(lane, AnchorKind::row, rows[k])) xs[k] = *x;
  }
  return xs;
}

AccuracyReport tusimple_accuracy(std::span<const Lane> preds, std::span<const Lane> gts,
                                 std::span<const double> row_anchors, double tol_px, double width_ref) {
  std::vector<std::vector<double>> px, gx;
  for (const Lane& l : preds) px.push_back(sample_rows(l, row_anchors));
  for (const Lane& l : gts) gx.push_back(sample_rows(l, row_anchors));

  AccuracyReport report;
  for (const auto& g : gx)
    for (double x : g)
      if (x >= 0.0) ++report.total;

  constexpr double kNoOverlap = 2.0;
  Grid<double> score(static_cast<int>(px.size()), static_cast<int>(gx.size()));
  for (int i = 0; i < score.rows; ++i) {
    for (int j = 0; j < score.cols; ++j) {
      double sum = 0.0;
      int shared = 0;
      for (std::size_t k = 0; k < row_anchors.size(); ++k) {
        if (px[i][k] >= 0.0 && gx[j][k] >= 0.0) {
          sum += std::abs(px[i][k] - gx[j][k]);
          ++shared;
        }
      }
      score(i, j) = -(shared == 0 ? kNoOverlap : sum / shared);
    }
  }
  const Matching m = hungarian_max(score);
  for (auto [i, j] : m.pairs) {
    for (std::size_t k = 0; k < row_anchors.size(); ++k) {
      if (gx[j][k] < 0.0 || px[i][k] < 0.0) continue;
      if (std::abs(px[i][k] - gx[j][k]) * width_ref <= tol_px) ++report.correct;
    }
  }
  return report;
}

Lane clip_lane_below(const Lane& lane, double top) {
  Lane best{{}, lane.slot};
  Lane cur{{}, lane.slot};
  auto flush = [&] {
    if (cur.points.size() > best.points.size()) best.points = cur.points;
    cur.points.clear();
  };
  const auto& p = lane.points;
  for (std::size_t i = 0; i < p.size(); ++i) {
    const bool inside = p[i].y >= top;
    if (i > 0) {
      const bool prev_inside = p[i - 1].y >= top;
      if (inside != prev_inside) {
        const double t = (top - p[i - 1].y) / (p[i].y - p[i - 1].y);
        const Point2 cross{p[i - 1].x + t * (p[i].x - p[i - 1].x), top};
        if (prev_inside) {
          cur.points.push_back(cross);
          flush();
        } else {
          cur.points.push_back(cross);
        }
      }
    }
    if (inside) cur.points.push_back(p[i]);
  }
  flush();
  return best;
}

}  // namespace hald
