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

#include <cmath>
#include <numbers>

#include "hald/anchors.hpp"
#include "hald/scene.hpp"
#include "test_util.hpp"

using namespace hald;

namespace {

Lane seg(double x0, double y0, double x1, double y1) { return {{{x0, y0}, {x1, y1}}, Slot::none}; }

double deg(double rad) { return rad * 180.0 / std::numbers::pi; }

/// Straight lane through (x, 1) at `angle_deg` in aspect-corrected space.
Lane tilted(double x, double angle_deg, double aspect) {
  const double a = angle_deg * std::numbers::pi / 180.0;
  return seg(x, 1.0, x + 0.2 * std::cos(a), 1.0 - 0.2 * aspect * std::sin(a));
}

}  // namespace

TEST_SUITE("scenegen") {
  TEST_CASE("generation is a pure function of the seed") {
    const auto c = GeneratorConfig::desk();
    CHECK(generate_scene(7, c) == generate_scene(7, c));
    CHECK(scene_to_json(generate_scene(7, c)) == scene_to_json(generate_scene(7, c)));
    CHECK_FALSE(generate_scene(7, c) == generate_scene(8, c));
  }

  TEST_CASE("zero presence gives an empty scene") {
    auto c = GeneratorConfig::desk();
    for (auto& s : c.slots) s.presence = 0.0;
    CHECK(generate_scene(3, c).lanes.empty());
  }

  TEST_CASE("seed 7 default scene has four lanes with angles in their slot ranges") {
    const auto c = GeneratorConfig::straight();
    const Scene s = generate_scene(7, c);
    REQUIRE(s.lanes.size() == 4);
    for (const Lane& lane : s.lanes) {
      const SlotSpec& spec = c.slots[static_cast<int>(lane.slot)];
      const double a = deg(lane_angle(lane, c.aspect));
      CHECK(a >= spec.angle_deg.lo - 1e-9);
      CHECK(a <= spec.angle_deg.hi + 1e-9);
    }
    const Scene d = generate_scene(7, GeneratorConfig::desk());
    CHECK(d.lanes.size() == 4);
  }

  TEST_CASE("generated lanes obey the slot angle rule and touch the boundary") {
    const auto c = GeneratorConfig::desk();
    for (const Scene& s : generate_scenes(100, 200, c)) {
      int seen[5] = {};
      for (const Lane& lane : s.lanes) {
        ++seen[static_cast<int>(lane.slot)];
        REQUIRE(lane.points.size() >= 2);
        const bool ego = lane.slot == Slot::ego_left || lane.slot == Slot::ego_right;
        const double a = deg(lane_angle(lane));
        if (ego)
          CHECK(a > 45.0);
        else
          CHECK(a <= 45.0);
        auto on_boundary = [](const Point2& p) {
          return std::abs(p.x) < 1e-12 || std::abs(p.x - 1) < 1e-12 || std::abs(p.y) < 1e-12 ||
                 std::abs(p.y - 1) < 1e-12;
        };
        CHECK(on_boundary(lane.points.front()));
        CHECK(on_boundary(lane.points.back()));
        for (std::size_t i = 1; i < lane.points.size(); ++i) CHECK_FALSE(lane.points[i] == lane.points[i - 1]);
      }
      for (int k = 0; k < 4; ++k) CHECK(seen[k] <= 1);
    }
  }

  TEST_CASE("generate_scenes matches per-seed generation") {
    const auto c = GeneratorConfig::desk();
    const auto batch = generate_scenes(40, 10, c);
    for (int i = 0; i < 10; ++i) CHECK(batch[i] == generate_scene(40 + i, c));
  }

  TEST_CASE("config validation") {
    auto c = GeneratorConfig::desk();
    c.slots[0].presence = 1.5;
    CHECK_THROWS_AS(c.validate(), std::invalid_argument);
    c = GeneratorConfig::desk();
    c.slots[2].angle_deg = {30.0, 20.0};
    CHECK_THROWS_AS(c.validate(), std::invalid_argument);
    c = GeneratorConfig::desk();
    c.slots[1].presence = -0.1;
    CHECK_THROWS_AS(generate_scene(1, c), std::invalid_argument);
  }

  TEST_CASE("rasterize: empty scene without noise is all zero") {
    const ImageGrid g = rasterize_scene(Scene{}, 16, 24, 2, 0.0, 0, 5);
    CHECK(g.values.size() == 16u * 24u);
    for (double v : g.values) CHECK(v == 0.0);
  }

  TEST_CASE("rasterize: vertical lane at x = 0.5 lights column 4 of an 8x8 grid") {
    Scene s;
    s.lanes.push_back(seg(0.5, 1.0, 0.5, 0.0));
    const ImageGrid g = rasterize_scene(s, 8, 8, 1, 0.0, 0, 1);
    for (int r = 0; r < 8; ++r)
      for (int c = 0; c < 8; ++c) CHECK(g.at(r, c) == (c == 4 ? 1.0 : 0.0));
  }

  TEST_CASE("rasterize: deterministic, bounded, validated") {
    const Scene s = generate_scene(11, GeneratorConfig::desk());
    const ImageGrid a = rasterize_scene(s, 64, 160, 2, 0.1, 2, 99);
    CHECK(a == rasterize_scene(s, 64, 160, 2, 0.1, 2, 99));
    CHECK_FALSE(a == rasterize_scene(s, 64, 160, 2, 0.1, 2, 100));
    for (double v : a.values) {
      CHECK(v >= 0.0);
      CHECK(v <= 1.0);
    }
    CHECK_THROWS_AS(rasterize_scene(s, 8, 8, 9, 0.0, 0, 1), std::invalid_argument);
    CHECK_THROWS_AS(rasterize_scene(s, 4, 8, 1, 0.0, 0, 1), std::invalid_argument);
  }

  TEST_CASE("lane_angle examples") {
    CHECK(lane_angle(seg(0.2, 1.0, 0.2, 0.0), 1.0) == doctest::Approx(std::numbers::pi / 2).epsilon(1e-15));
    CHECK(lane_angle(seg(0.0, 1.0, 1.0, 0.0), 1.0) == doctest::Approx(std::numbers::pi / 4).epsilon(1e-12));
    CHECK(lane_angle(seg(0.0, 0.5, 1.0, 0.5), 1.0) == kAngleFloor);
    CHECK_THROWS_AS(lane_angle(seg(0.3, 0.3, 0.3, 0.3)), std::invalid_argument);
    for (double a : {10.0, 30.0, 45.0, 60.0, 80.0})
      CHECK(deg(lane_angle(tilted(0.3, a, kDefaultAspect))) == doctest::Approx(a).epsilon(1e-10));
  }

  TEST_CASE("perpendicular_error examples") {
    CHECK(perpendicular_error(seg(0.5, 1.0, 0.5, 0.0), 0.6, 0.5, 1.0) == doctest::Approx(0.1).epsilon(1e-12));
    const Lane l30 = tilted(0.2, 30.0, 1.0);
    const double x30 = *intersect_lane_anchor(l30, AnchorKind::row, 0.95);
    CHECK(perpendicular_error(l30, x30 + 0.1, 0.95, 1.0) == doctest::Approx(0.05).epsilon(1e-12));
    const Lane l45 = seg(0.0, 1.0, 1.0, 0.0);
    CHECK(perpendicular_error(l45, 0.52, 0.5, 1.0) == doctest::Approx(0.02 * std::sqrt(2.0) / 2).epsilon(1e-12));
    CHECK_THROWS_AS(perpendicular_error(seg(0.5, 1.0, 0.5, 0.6), 0.5, 0.2), std::invalid_argument);
  }

  TEST_CASE("perpendicular error equals horizontal error times sin(angle)") {
    Rng rng(5);
    for (int i = 0; i < 500; ++i) {
      const double aspect = rng.uniform(0.5, 3.0);
      const Lane l = extend_to_boundary(tilted(rng.uniform(0.2, 0.8), rng.uniform(5.0, 90.0), aspect));
      const double y = rng.uniform(std::max(0.0, std::min(l.points[0].y, l.points[1].y)) + 1e-3,
                                   std::max(l.points[0].y, l.points[1].y) - 1e-3);
      const double x = *intersect_lane_anchor(l, AnchorKind::row, y);
      const double delta = rng.uniform(-0.2, 0.2);
      CHECK(std::abs(perpendicular_error(l, x + delta, y, aspect) - std::abs(delta) * std::sin(lane_angle(l, aspect))) <
            1e-12);
    }
  }

  TEST_CASE("extend_to_boundary examples") {
    const Lane v = extend_to_boundary(seg(0.5, 0.9, 0.5, 0.1));
    REQUIRE(v.points.size() == 2);
    CHECK(v.points[0].x == doctest::Approx(0.5));
    CHECK(v.points[0].y == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(v.points[1].y == doctest::Approx(0.0).epsilon(1e-12));
    const Lane full = seg(0.5, 1.0, 0.5, 0.0);
    CHECK(extend_to_boundary(full) == full);
    const Lane d = extend_to_boundary(seg(0.4, 0.6, 0.6, 0.4));
    CHECK(std::abs(d.points.front().x - 0.0) < 1e-12);
    CHECK(std::abs(d.points.front().y - 1.0) < 1e-12);
    CHECK(std::abs(d.points.back().x - 1.0) < 1e-12);
    CHECK(std::abs(d.points.back().y - 0.0) < 1e-12);
    CHECK_THROWS_AS(extend_to_boundary(seg(1.5, 0.5, 1.7, 0.2)), std::invalid_argument);
  }

  TEST_CASE("extend_to_boundary is idempotent") {
    for (const Scene& s : generate_scenes(300, 50, GeneratorConfig::desk())) {
      for (const Lane& lane : s.lanes) {
        const Lane once = extend_to_boundary(lane);
        const Lane twice = extend_to_boundary(once);
        REQUIRE(once.points.size() == twice.points.size());
        for (std::size_t i = 0; i < once.points.size(); ++i) {
          CHECK(std::abs(once.points[i].x - twice.points[i].x) < 1e-12);
          CHECK(std::abs(once.points[i].y - twice.points[i].y) < 1e-12);
        }
      }
    }
  }

  TEST_CASE("shift_augment examples") {
    Scene s;
    s.lanes.push_back(seg(0.5, 1.0, 0.5, 0.0));
    const Scene same = shift_augment(s, 0.0, 0.0);
    REQUIRE(same.lanes.size() == 1);
    CHECK(same.lanes[0] == extend_to_boundary(s.lanes[0]));
    const Scene moved = shift_augment(s, 0.2, 0.0);
    REQUIRE(moved.lanes.size() == 1);
    for (const Point2& p : moved.lanes[0].points) CHECK(p.x == doctest::Approx(0.7).epsilon(1e-12));
    CHECK(std::min(moved.lanes[0].points.front().y, moved.lanes[0].points.back().y) == doctest::Approx(0.0));
    CHECK(std::max(moved.lanes[0].points.front().y, moved.lanes[0].points.back().y) == doctest::Approx(1.0));
    Scene right;
    right.lanes.push_back(seg(0.8, 1.0, 0.8, 0.0));
    CHECK(shift_augment(right, 0.3, 0.0).lanes.empty());
  }

  TEST_CASE("shift then inverse shift reproduces straight lanes in the shared region") {
    Rng rng(17);
    for (const Scene& s : generate_scenes(500, 40, GeneratorConfig::straight())) {
      const double dx = rng.uniform(-0.1, 0.1), dy = rng.uniform(-0.1, 0.1);
      const Scene back = shift_augment(shift_augment(s, dx, dy), -dx, -dy);
      for (const Lane& b : back.lanes) {
        const Lane* orig = nullptr;
        for (const Lane& l : s.lanes)
          if (l.slot == b.slot) orig = &l;
        REQUIRE(orig != nullptr);
        for (double y = 0.35; y <= 0.65; y += 0.05) {
          const auto xo = intersect_lane_anchor(*orig, AnchorKind::row, y);
          const auto xb = intersect_lane_anchor(b, AnchorKind::row, y);
          if (xo && xb && *xo > 0.0 && *xo < 1.0) CHECK(std::abs(*xo - *xb) < 1e-12);
        }
      }
    }
  }

  TEST_CASE("JSONL round trip") {
    const auto dir = test::temp_dir("scene_io");
    const auto scenes = generate_scenes(1, 20, GeneratorConfig::desk());
    write_scenes_jsonl(dir / "s.jsonl", scenes);
    const auto loaded = read_scenes_jsonl(dir / "s.jsonl");
    REQUIRE(loaded.size() == scenes.size());
    for (std::size_t i = 0; i < scenes.size(); ++i) {
      CHECK(loaded[i].seed == scenes[i].seed);
      CHECK(loaded[i].lanes == scenes[i].lanes);
    }
    CHECK_THROWS(scene_from_json("{\"seed\":1,\"lanes\":[{\"slot\":\"ego_left\",\"points\":[[0.1,0.2]]}]}"));
    CHECK_THROWS(scene_from_json("not json"));
    std::filesystem::remove_all(dir);
  }
}
