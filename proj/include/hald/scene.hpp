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

#include <array>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace hald {

/// Normalized image coordinates: x in [0,1] left to right, y in [0,1] top to bottom.
struct Point2 {
  double x = 0.0;
  double y = 0.0;
  friend bool operator==(const Point2&, const Point2&) = default;
};

enum class Slot { ego_left, ego_right, side_left, side_right, none };

std::string_view slot_name(Slot slot);
Slot parse_slot(std::string_view name);

/// Ordered polyline, bottom of the image first.
struct Lane {
  std::vector<Point2> points;
  Slot slot = Slot::none;
  friend bool operator==(const Lane&, const Lane&) = default;
};

/// Generator parameters that produced one lane.
struct LaneShape {
  Slot slot = Slot::none;
  double angle = 0.0;      // radians, aspect-corrected, to the horizontal
  double offset = 0.0;     // entry coordinate on the image boundary
  double curvature = 0.0;  // peak normal displacement, normalized units
  friend bool operator==(const LaneShape&, const LaneShape&) = default;
};

struct Scene {
  std::vector<Lane> lanes;
  std::uint64_t seed = 0;
  std::vector<LaneShape> shape_params;
  friend bool operator==(const Scene&, const Scene&) = default;
};

struct ImageGrid {
  int height = 0;
  int width = 0;
  std::vector<double> values;

  ImageGrid() = default;
  ImageGrid(int h, int w, double fill = 0.0) : height(h), width(w), values(static_cast<std::size_t>(h) * w, fill) {}
  double& at(int r, int c) { return values[static_cast<std::size_t>(r) * width + c]; }
  double at(int r, int c) const { return values[static_cast<std::size_t>(r) * width + c]; }
  friend bool operator==(const ImageGrid&, const ImageGrid&) = default;
};

/// Reference resolution 320x800 (height x width); x is scaled by this ratio
/// relative to y when measuring angles and distances.
inline constexpr double kDefaultAspect = 800.0 / 320.0;
/// Floor on lane_angle so that 1/sin stays finite for horizontal lanes.
inline constexpr double kAngleFloor = 1e-4;
/// Boundary snapping tolerance for extend_to_boundary.
inline constexpr double kBoundaryEps = 1e-12;

struct Range {
  double lo = 0.0;
  double hi = 0.0;
};

struct SlotSpec {
  double presence = 1.0;
  Range angle_deg;  // aspect-corrected angle to the horizontal
  Range offset;     // ego: bottom-edge x; side: left/right-edge y
};

/// Slots are indexed by Slot (ego_left, ego_right, side_left, side_right).
struct GeneratorConfig {
  std::array<SlotSpec, 4> slots;
  Range curvature{-0.04, 0.04};
  int curve_points = 12;
  double aspect = kDefaultAspect;

  static GeneratorConfig desk();
  /// Desk geometry with curvature disabled; every lane is a two-point segment.
  static GeneratorConfig straight();
  void validate() const;
};

Scene generate_scene(std::uint64_t seed, const GeneratorConfig& config);
/// Scenes for seeds first_seed, first_seed + 1, ...
std::vector<Scene> generate_scenes(std::uint64_t first_seed, int count, const GeneratorConfig& config);

ImageGrid rasterize_scene(const Scene& scene, int height, int width, int stroke, double noise_sigma, int occlusions,
                          std::uint64_t rng_seed);

/// Acute angle between the total-least-squares line through the lane and the
/// horizontal, in (0, pi/2]. `aspect` is the width/height ratio of the
/// reference resolution.
double lane_angle(const Lane& lane, double aspect = kDefaultAspect);

/// Distance from (predicted_x, anchor_y) to the infinite line through the
/// lane's end points, in units of normalized width.
double perpendicular_error(const Lane& lane, double predicted_x, double anchor_y, double aspect = kDefaultAspect);

Lane extend_to_boundary(const Lane& lane);

/// Translates every lane, re-extends it to the image boundary and drops lanes
/// that leave the image.
Scene shift_augment(const Scene& scene, double dx, double dy, double max_shift = 0.5);

// JSONL persistence: {"seed":int,"lanes":[{"slot":string,"points":[[x,y],...]}]}
std::string scene_to_json(const Scene& scene);
Scene scene_from_json(std::string_view line);
void write_scenes_jsonl(const std::filesystem::path& path, std::span<const Scene> scenes);
std::vector<Scene> read_scenes_jsonl(const std::filesystem::path& path);

}  // namespace hald
