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

#include <doctest.h>

#include <algorithm>
#include <numeric>

#include "hald/hungarian.hpp"
#include "hald/metrics.hpp"
#include "hald/rng.hpp"

using namespace hald;

namespace {

Lane vertical(double x, double y0 = 0.0, double y1 = 1.0) { return Lane{{{x, y1}, {x, y0}}, Slot::none}; }

double brute_best(const Grid<double>& s) {
  const bool transpose = s.rows > s.cols;
  const int n = transpose ? s.cols : s.rows;
  const int m = transpose ? s.rows : s.cols;
  std::vector<int> idx(m);
  std::iota(idx.begin(), idx.end(), 0);
  double best = -1e300;
  do {
    double t = 0.0;
    for (int i = 0; i < n; ++i) t += transpose ? s(idx[i], i) : s(i, idx[i]);
    best = std::max(best, t);
  } while (std::next_permutation(idx.begin(), idx.end()));
  return best;
}

double matching_total(const Grid<double>& s, const Matching& m) {
  double t = 0.0;
  for (auto [r, c] : m.pairs) t += s(r, c);
  return t;
}

}  // namespace

TEST_SUITE("metrics") {
  TEST_CASE("lane mask examples") {
    const LaneMask one = rasterize_lane_mask(vertical(0.5), 1.0, 10, 10);
    CHECK(one.count() == 10u);
    for (int r = 0; r < 10; ++r) CHECK(one.at(r, 5));
    const LaneMask three = rasterize_lane_mask(vertical(0.5), 3.0, 10, 10);
    CHECK(three.count() == 30u);
    for (int r = 0; r < 10; ++r)
      for (int c : {4, 5, 6}) CHECK(three.at(r, c));
    CHECK(rasterize_lane_mask(vertical(2.0), 4.0, 10, 10).count() == 0u);
    CHECK_THROWS_AS(rasterize_lane_mask(Lane{}, 4.0, 10, 10), std::invalid_argument);
    CHECK_THROWS_AS(rasterize_lane_mask(vertical(0.5), 0.5, 10, 10), std::invalid_argument);
  }

  TEST_CASE("IoU examples") {
    CHECK(lane_iou(vertical(0.5), vertical(0.5), 4.0, 10, 20) == 1.0);
    CHECK(lane_iou(vertical(0.1), vertical(0.9), 4.0, 10, 20) == 0.0);
    CHECK(lane_iou(vertical(0.25), vertical(0.35), 4.0, 10, 20) == doctest::Approx(3.0 / 7.0));
    CHECK(lane_iou(vertical(0.25), vertical(0.3), 2.0, 10, 20) == 0.5);
    LaneMask empty{4, 4, std::vector<std::uint8_t>(16, 0)};
    CHECK(mask_iou(empty, empty) == 0.0);
  }

  TEST_CASE("mask matches a brute-force distance oracle") {
    Rng rng(31);
    for (int trial = 0; trial < 200; ++trial) {
      const int h = 4 + static_cast<int>(rng.below(61));
      const int w = 4 + static_cast<int>(rng.below(61));
      Lane lane;
      const int n = 1 + static_cast<int>(rng.below(4));
      for (int i = 0; i < n; ++i) lane.points.push_back({rng.uniform(-0.2, 1.2), rng.uniform(-0.2, 1.2)});
      const double width = rng.uniform(1.0, 8.0);
      const LaneMask mask = rasterize_lane_mask(lane, width, h, w);
      for (int r = 0; r < h; ++r)
        for (int c = 0; c < w; ++c) {
          double best = 1e300;
          for (std::size_t i = 0; i < lane.points.size(); ++i) {
            const Point2 a{lane.points[i].x * w, lane.points[i].y * h};
            const Point2 b = i + 1 < lane.points.size() ? Point2{lane.points[i + 1].x * w, lane.points[i + 1].y * h} : a;
            if (i + 1 == lane.points.size() && n > 1) break;
            const double dx = b.x - a.x, dy = b.y - a.y;
            const double len2 = dx * dx + dy * dy;
            double t = len2 > 0 ? ((c - a.x) * dx + (r - a.y) * dy) / len2 : 0.0;
            t = std::clamp(t, 0.0, 1.0);
            const double px = a.x + t * dx - c, py = a.y + t * dy - r;
            best = std::min(best, px * px + py * py);
          }
          const bool inside = best <= width * width / 4.0;
          if (std::abs(best - width * width / 4.0) < 1e-9) continue;
          CHECK(mask.at(r, c) == inside);
        }
    }
  }

  TEST_CASE("hungarian is optimal and never worse than greedy") {
    Rng rng(41);
    for (int trial = 0; trial < 300; ++trial) {
      const int r = 1 + static_cast<int>(rng.below(6));
      const int c = 1 + static_cast<int>(rng.below(6));
      Grid<double> s(r, c);
      for (double& v : s.data) v = rng.bernoulli(0.3) ? 0.0 : rng.uniform();
      const Matching h = hungarian_max(s);
      const Matching g = greedy_max(s);
      CHECK(h.pairs.size() == static_cast<std::size_t>(std::min(r, c)));
      CHECK(matching_total(s, h) == doctest::Approx(brute_best(s)).epsilon(1e-12));
      CHECK(matching_total(s, h) >= matching_total(s, g) - 1e-12);
      CHECK(h.unmatched_rows.size() + h.pairs.size() == static_cast<std::size_t>(r));
      CHECK(h.unmatched_cols.size() + h.pairs.size() == static_cast<std::size_t>(c));
    }
    Grid<double> single(1, 1, 0.7);
    CHECK(hungarian_max(single).pairs == std::vector<std::pair<int, int>>{{0, 0}});
    Grid<double> diag(3, 3, 0.0);
    for (int i = 0; i < 3; ++i) diag(i, i) = 1.0;
    CHECK(hungarian_max(diag).pairs == std::vector<std::pair<int, int>>{{0, 0}, {1, 1}, {2, 2}});
    Grid<double> trap(2, 2);
    trap(0, 0) = 0.9;
    trap(0, 1) = 0.8;
    trap(1, 0) = 0.8;
    trap(1, 1) = 0.0;
    CHECK(matching_total(trap, hungarian_max(trap)) == doctest::Approx(1.6));
    CHECK(matching_total(trap, greedy_max(trap)) == doctest::Approx(0.9));
  }

  TEST_CASE("F1 examples") {
    const std::vector<Lane> gts{vertical(0.2), vertical(0.5), vertical(0.8)};
    const F1Report same = culane_f1(gts, gts, 0.5, 30.0, 320, 800);
    CHECK(same.tp == 3);
    CHECK(same.f1 == 1.0);
    const std::vector<Lane> one_gt{vertical(0.2)};
    const std::vector<Lane> tp_fp{vertical(0.2), vertical(0.8)};
    const F1Report r = culane_f1(tp_fp, one_gt, 0.5, 30.0, 320, 800);
    CHECK(r.tp == 1);
    CHECK(r.fp == 1);
    CHECK(r.fn == 0);
    CHECK(r.f1 == doctest::Approx(2.0 / 3.0));
    const std::vector<Lane> p{vertical(0.25)}, g{vertical(0.3)};
    const F1Report edge = culane_f1(p, g, 0.5, 2.0, 10, 20);
    REQUIRE(edge.pair_ious.size() == 1u);
    CHECK(edge.pair_ious[0] == 0.5);
    CHECK(edge.tp == 0);
    CHECK(edge.fp == 1);
    CHECK(edge.fn == 1);
    const F1Report none = culane_f1({}, {}, 0.5, 30.0, 320, 800);
    CHECK(none.f1 == 0.0);
    F1Report sum = F1Report::from_counts(1, 0, 1);
    sum += F1Report::from_counts(1, 2, 0);
    CHECK(sum.tp == 2);
    CHECK(sum.precision == doctest::Approx(0.5));
    CHECK(sum.recall == doctest::Approx(2.0 / 3.0));
  }

  TEST_CASE("F1 is invariant to lane order") {
    Rng rng(5);
    std::vector<Lane> preds, gts;
    for (int i = 0; i < 4; ++i) {
      const double x = 0.15 + 0.2 * i;
      gts.push_back(Lane{{{x, 1.0}, {x + rng.uniform(-0.05, 0.05), 0.3}}, Slot::none});
      preds.push_back(Lane{{{x + rng.uniform(-0.01, 0.01), 1.0}, {x + rng.uniform(-0.05, 0.05), 0.3}}, Slot::none});
    }
    const F1Report base = culane_f1(preds, gts);
    std::reverse(preds.begin(), preds.end());
    std::rotate(gts.begin(), gts.begin() + 1, gts.end());
    const F1Report perm = culane_f1(preds, gts);
    CHECK(perm.tp == base.tp);
    CHECK(perm.f1 == base.f1);
  }

  TEST_CASE("accuracy examples") {
    const std::vector<double> rows{0.4, 0.6, 0.8, 1.0};
    const std::vector<Lane> gt{vertical(0.5)};
    const AccuracyReport exact = tusimple_accuracy(gt, gt, rows);
    CHECK(exact.total == 4);
    CHECK(exact.accuracy() == 1.0);
    const std::vector<Lane> far{vertical(0.9)};
    CHECK(tusimple_accuracy(far, gt, rows).accuracy() == 0.0);
    CHECK(tusimple_accuracy({}, gt, rows).accuracy() == 0.0);
    const std::vector<Lane> bent{Lane{{{0.5, 1.0}, {0.5, 0.7}, {0.6, 0.6}, {0.6, 0.0}}, Slot::none}};
    const AccuracyReport half = tusimple_accuracy(bent, gt, rows);
    CHECK(half.total == 4);
    CHECK(half.correct == 2);
    CHECK(half.accuracy() == 0.5);
    const std::vector<double> sampled = sample_rows(vertical(0.5, 0.5, 1.0), rows);
    CHECK(sampled == std::vector<double>{-1.0, 0.5, 0.5, 0.5});
  }

  TEST_CASE("clip below") {
    const Lane l{{{0.5, 1.0}, {0.5, 0.0}}, Slot::none};
    const Lane c = clip_lane_below(l, 0.3);
    REQUIRE(c.points.size() == 2u);
    CHECK(c.points.back().y == doctest::Approx(0.3));
    CHECK(clip_lane_below(vertical(0.5, 0.0, 0.2), 0.3).points.empty());
  }
}
