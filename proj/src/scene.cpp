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
#include <numbers>
#include <optional>
#include <stdexcept>
#include <string>

#include "hald/rng.hpp"
#include "hald/scene.hpp"

namespace hald {

namespace {

struct ClipRange {
  double t0;
  double t1;
};

// Liang-Barsky clip of p + t*(q-p), t in [t0, t1], against the unit square.
std::optional<ClipRange> clip_to_unit_square(Point2 p, Point2 q, double t0, double t1) {
  const double dx = q.x - p.x;
  const double dy = q.y - p.y;
  auto edge = [&](double den, double num) {
    if (den == 0.0) return num >= 0.0;
    const double t = num / den;
    if (den < 0.0) {
      if (t > t1) return false;
      t0 = std::max(t0, t);
    } else {
      if (t < t0) return false;
      t1 = std::min(t1, t);
    }
    return true;
  };
  if (!edge(-dx, p.x) || !edge(dx, 1.0 - p.x) || !edge(-dy, p.y) || !edge(dy, 1.0 - p.y)) return std::nullopt;
  return ClipRange{t0, t1};
}

Point2 lerp(Point2 p, Point2 q, double t) { return {p.x + t * (q.x - p.x), p.y + t * (q.y - p.y)}; }

double snap_coord(double c) {
  if (std::abs(c) < 1e-9) return 0.0;
  if (std::abs(c - 1.0) < 1e-9) return 1.0;
  return std::clamp(c, 0.0, 1.0);
}

Point2 snap(Point2 p) { return {snap_coord(p.x), snap_coord(p.y)}; }

bool on_boundary(Point2 p) {
  return p.x <= kBoundaryEps || p.x >= 1.0 - kBoundaryEps || p.y <= kBoundaryEps || p.y >= 1.0 - kBoundaryEps;
}

bool inside(Point2 p) { return p.x >= 0.0 && p.x <= 1.0 && p.y >= 0.0 && p.y <= 1.0; }

double polyline_length(const std::vector<Point2>& pts) {
  double len = 0.0;
  for (std::size_t i = 1; i < pts.size(); ++i) len += std::hypot(pts[i].x - pts[i - 1].x, pts[i].y - pts[i - 1].y);
  return len;
}

// Moves `end` along (end - prev) until it reaches the unit-square boundary.
Point2 extrapolate(Point2 end, Point2 prev) {
  if (on_boundary(end)) return end;
  const double dx = end.x - prev.x;
  const double dy = end.y - prev.y;
  double best = std::numeric_limits<double>::infinity();
  int axis = -1;
  double bound = 0.0;
  auto consider = [&](double d, double from, int ax) {
    if (d == 0.0) return;
    const double b = d > 0.0 ? 1.0 : 0.0;
    const double t = (b - from) / d;
    if (t < best) {
      best = t;
      axis = ax;
      bound = b;
    }
  };
  consider(dx, end.x, 0);
  consider(dy, end.y, 1);
  if (axis < 0) return end;
  Point2 out{end.x + best * dx, end.y + best * dy};
  if (axis == 0) {
    out.x = bound;
    out.y = std::clamp(out.y, 0.0, 1.0);
  } else {
    out.y = bound;
    out.x = std::clamp(out.x, 0.0, 1.0);
  }
  return out;
}

void dedupe(std::vector<Point2>& pts) { pts.erase(std::unique(pts.begin(), pts.end()), pts.end()); }

bool segments_intersect(Point2 a, Point2 b, Point2 c, Point2 d) {
  auto orient = [](Point2 p, Point2 q, Point2 r) { return (q.x - p.x) * (r.y - p.y) - (q.y - p.y) * (r.x - p.x); };
  const double d1 = orient(c, d, a);
  const double d2 = orient(c, d, b);
  const double d3 = orient(a, b, c);
  const double d4 = orient(a, b, d);
  return ((d1 > 0) != (d2 > 0)) && ((d3 > 0) != (d4 > 0));
}

bool lanes_cross(const Lane& a, const Lane& b) {
  for (std::size_t i = 1; i < a.points.size(); ++i)
    for (std::size_t j = 1; j < b.points.size(); ++j)
      if (segments_intersect(a.points[i - 1], a.points[i], b.points[j - 1], b.points[j])) return true;
  return false;
}

constexpr double deg2rad(double d) { return d * std::numbers::pi / 180.0; }

}  // namespace

std::string_view slot_name(Slot slot) {
  switch (slot) {
    case Slot::ego_left: return "ego_left";
    case Slot::ego_right: return "ego_right";
    case Slot::side_left: return "side_left";
    case Slot::side_right: return "side_right";
    case Slot::none: return "none";
  }
  return "none";
}

Slot parse_slot(std::string_view name) {
  for (Slot s : {Slot::ego_left, Slot::ego_right, Slot::side_left, Slot::side_right, Slot::none})
    if (slot_name(s) == name) return s;
  throw std::invalid_argument("unknown lane slot '" + std::string(name) + "'");
}

GeneratorConfig GeneratorConfig::desk() {
  GeneratorConfig c;
  c.slots[0] = {1.0, {58.0, 85.0}, {0.15, 0.40}};
  c.slots[1] = {1.0, {58.0, 85.0}, {0.60, 0.85}};
  c.slots[2] = {1.0, {20.0, 42.0}, {0.45, 0.85}};
  c.slots[3] = {1.0, {20.0, 42.0}, {0.45, 0.85}};
  return c;
}

GeneratorConfig GeneratorConfig::straight() {
  GeneratorConfig c = desk();
  c.curvature = {0.0, 0.0};
  c.curve_points = 2;
  return c;
}

void GeneratorConfig::validate() const {
  for (std::size_t i = 0; i < slots.size(); ++i) {
    const SlotSpec& s = slots[i];
    const std::string name(slot_name(static_cast<Slot>(i)));
    if (!(s.presence >= 0.0 && s.presence <= 1.0))
      throw std::invalid_argument("presence probability of " + name + " outside [0,1]");
    if (!(s.angle_deg.lo <= s.angle_deg.hi)) throw std::invalid_argument("empty angle range for " + name);
    if (!(s.angle_deg.lo > 0.0 && s.angle_deg.hi <= 90.0))
      throw std::invalid_argument("angle range for " + name + " must lie in (0, 90] degrees");
    const bool ego = i < 2;
    if (ego && !(s.angle_deg.lo > 45.0)) throw std::invalid_argument(name + " angles must exceed 45 degrees");
    if (!ego && !(s.angle_deg.hi <= 45.0)) throw std::invalid_argument(name + " angles must not exceed 45 degrees");
    if (!(s.offset.lo <= s.offset.hi) || s.offset.lo < 0.0 || s.offset.hi > 1.0)
      throw std::invalid_argument("offset range for " + name + " must be a non-empty subrange of [0,1]");
  }
  if (!(curvature.lo <= curvature.hi)) throw std::invalid_argument("empty curvature range");
  if (curve_points < 2) throw std::invalid_argument("curve_points must be >= 2");
  if (!(aspect > 0.0)) throw std::invalid_argument("aspect must be positive");
}

Scene generate_scene(std::uint64_t seed, const GeneratorConfig& config) {
  config.validate();
  Scene scene;
  scene.seed = seed;
  Rng rng(mix_seed(seed, 0x5ce7e));
  constexpr int kAttempts = 64;

  for (int si = 0; si < 4; ++si) {
    const Slot slot = static_cast<Slot>(si);
    const SlotSpec& spec = config.slots[si];
    if (!rng.bernoulli(spec.presence)) continue;
    const bool ego = si < 2;
    const bool leftward = slot == Slot::ego_right || slot == Slot::side_right;

    for (int attempt = 0; attempt < kAttempts; ++attempt) {
      const double angle = deg2rad(rng.uniform(spec.angle_deg.lo, spec.angle_deg.hi));
      const double offset = rng.uniform(spec.offset.lo, spec.offset.hi);
      const double curvature = config.curve_points > 2 ? rng.uniform(config.curvature.lo, config.curvature.hi) : 0.0;

      Point2 start;
      if (ego)
        start = {offset, 1.0};
      else
        start = {leftward ? 1.0 : 0.0, offset};
      const Point2 dir{(leftward ? -1.0 : 1.0) * std::cos(angle), -config.aspect * std::sin(angle)};
      const auto range = clip_to_unit_square(start, {start.x + dir.x, start.y + dir.y}, 0.0,
                                             std::numeric_limits<double>::infinity());
      if (!range) continue;
      const Point2 end = snap(lerp(start, {start.x + dir.x, start.y + dir.y}, range->t1));
      if (std::hypot(end.x - start.x, end.y - start.y) < 0.05) continue;

      Lane lane;
      lane.slot = slot;
      if (curvature == 0.0) {
        lane.points = {start, end};
      } else {
        const double len = std::hypot(end.x - start.x, end.y - start.y);
        const Point2 normal{-(end.y - start.y) / len, (end.x - start.x) / len};
        const int n = config.curve_points;
        for (int k = 0; k < n; ++k) {
          const double s = static_cast<double>(k) / (n - 1);
          const double bend = (k == 0 || k == n - 1) ? 0.0 : curvature * 4.0 * s * (1.0 - s);
          lane.points.push_back({start.x + s * (end.x - start.x) + bend * normal.x,
                                 start.y + s * (end.y - start.y) + bend * normal.y});
        }
        lane.points.front() = start;
        lane.points.back() = end;
      }
      if (!std::all_of(lane.points.begin(), lane.points.end(), inside)) continue;
      dedupe(lane.points);
      if (lane.points.size() < 2) continue;
      const double fitted = lane_angle(lane, config.aspect);
      if (ego != (fitted > std::numbers::pi / 4.0)) continue;
      if (std::any_of(scene.lanes.begin(), scene.lanes.end(), [&](const Lane& o) { return lanes_cross(o, lane); }))
        continue;

      scene.lanes.push_back(std::move(lane));
      scene.shape_params.push_back({slot, angle, offset, curvature});
      break;
    }
  }
  return scene;
}

std::vector<Scene> generate_scenes(std::uint64_t first_seed, int count, const GeneratorConfig& config) {
  if (count < 0) throw std::invalid_argument("scene count must be >= 0");
  config.validate();
  std::vector<Scene> scenes(count);
#pragma omp parallel for schedule(static)
  for (int i = 0; i < count; ++i) scenes[i] = generate_scene(first_seed + static_cast<std::uint64_t>(i), config);
  return scenes;
}

ImageGrid rasterize_scene(const Scene& scene, int height, int width, int stroke, double noise_sigma, int occlusions,
                          std::uint64_t rng_seed) {
  if (height < 8 || width < 8) throw std::invalid_argument("raster dimensions must be at least 8x8");
  if (stroke < 1) throw std::invalid_argument("stroke must be >= 1");
  if (stroke > std::min(height, width)) throw std::invalid_argument("stroke larger than the image");
  if (noise_sigma < 0.0 || occlusions < 0) throw std::invalid_argument("noise and occlusion count must be >= 0");

  ImageGrid img(height, width);
  Rng rng(mix_seed(rng_seed, 0x7a57e7));
  const int lo = -(stroke - 1) / 2;
  const int hi = stroke / 2;

  auto plot = [&](int r, int c) {
    for (int dr = lo; dr <= hi; ++dr)
      for (int dc = lo; dc <= hi; ++dc) {
        const int rr = r + dr;
        const int cc = c + dc;
        if (rr >= 0 && rr < height && cc >= 0 && cc < width) img.at(rr, cc) = 1.0;
      }
  };
  auto to_col = [&](double x) { return std::clamp(static_cast<int>(std::floor(x * width)), 0, width - 1); };
  auto to_row = [&](double y) { return std::clamp(static_cast<int>(std::floor(y * height)), 0, height - 1); };

  for (const Lane& lane : scene.lanes) {
    for (std::size_t i = 1; i < lane.points.size(); ++i) {
      int c0 = to_col(lane.points[i - 1].x), r0 = to_row(lane.points[i - 1].y);
      const int c1 = to_col(lane.points[i].x), r1 = to_row(lane.points[i].y);
      const int dc = std::abs(c1 - c0), sc = c0 < c1 ? 1 : -1;
      const int dr = -std::abs(r1 - r0), sr = r0 < r1 ? 1 : -1;
      int err = dc + dr;
      while (true) {
        plot(r0, c0);
        if (c0 == c1 && r0 == r1) break;
        const int e2 = 2 * err;
        if (e2 >= dr) {
          err += dr;
          c0 += sc;
        }
        if (e2 <= dc) {
          err += dc;
          r0 += sr;
        }
      }
    }
  }

  for (int k = 0; k < occlusions; ++k) {
    const int rw = 1 + static_cast<int>(rng.below(std::max(1, width / 4)));
    const int rh = 1 + static_cast<int>(rng.below(std::max(1, height / 4)));
    const int c0 = static_cast<int>(rng.below(width - rw + 1));
    const int r0 = static_cast<int>(rng.below(height - rh + 1));
    for (int r = r0; r < r0 + rh; ++r)
      for (int c = c0; c < c0 + rw; ++c) img.at(r, c) = 0.5;
  }

  if (noise_sigma > 0.0)
    for (double& v : img.values) v = std::clamp(v + noise_sigma * rng.normal(), 0.0, 1.0);
  return img;
}

double lane_angle(const Lane& lane, double aspect) {
  const auto& pts = lane.points;
  if (pts.size() < 2) throw std::invalid_argument("lane_angle needs at least two points");
  if (!(aspect > 0.0)) throw std::invalid_argument("aspect must be positive");
  // Offsets from the first point keep identical coordinates exactly zero.
  const double n = static_cast<double>(pts.size());
  double mx = 0.0, my = 0.0;
  for (const Point2& p : pts) {
    mx += p.x - pts[0].x;
    my += (p.y - pts[0].y) / aspect;
  }
  mx /= n;
  my /= n;
  double sxx = 0.0, syy = 0.0, sxy = 0.0;
  for (const Point2& p : pts) {
    const double dx = (p.x - pts[0].x) - mx;
    const double dy = (p.y - pts[0].y) / aspect - my;
    sxx += dx * dx;
    syy += dy * dy;
    sxy += dx * dy;
  }
  if (sxx == 0.0 && syy == 0.0) throw std::invalid_argument("lane_angle on a degenerate lane");
  const double phi = 0.5 * std::atan2(2.0 * sxy, sxx - syy);
  return std::max(std::abs(phi), kAngleFloor);
}

double perpendicular_error(const Lane& lane, double predicted_x, double anchor_y, double aspect) {
  if (lane.points.size() < 2) throw std::invalid_argument("perpendicular_error needs a two-point lane");
  const Point2 a = lane.points.front();
  const Point2 b = lane.points.back();
  if (a.y == b.y || anchor_y < std::min(a.y, b.y) || anchor_y > std::max(a.y, b.y))
    throw std::invalid_argument("lane does not cross the anchor");
  const double ux = b.x - a.x;
  const double uy = (b.y - a.y) / aspect;
  const double px = predicted_x - a.x;
  const double py = (anchor_y - a.y) / aspect;
  return std::abs(ux * py - uy * px) / std::hypot(ux, uy);
}

Lane extend_to_boundary(const Lane& lane) {
  const auto& pts = lane.points;
  if (pts.size() < 2) throw std::invalid_argument("extend_to_boundary needs at least two points");

  std::vector<std::vector<Point2>> runs;
  std::vector<Point2> cur;
  auto close = [&] {
    if (cur.size() >= 2) runs.push_back(cur);
    cur.clear();
  };
  for (std::size_t i = 1; i < pts.size(); ++i) {
    const Point2 p = pts[i - 1];
    const Point2 q = pts[i];
    const auto c = clip_to_unit_square(p, q, 0.0, 1.0);
    if (!c || (c->t0 >= c->t1 && !(p == q))) {
      close();
      continue;
    }
    const Point2 a = c->t0 > 0.0 ? snap(lerp(p, q, c->t0)) : p;
    const Point2 b = c->t1 < 1.0 ? snap(lerp(p, q, c->t1)) : q;
    if (cur.empty() || !(c->t0 == 0.0 && cur.back() == p)) {
      close();
      cur.push_back(a);
    }
    if (!(b == cur.back())) cur.push_back(b);
    if (c->t1 < 1.0) close();
  }
  close();

  const std::vector<Point2>* best = nullptr;
  double best_len = 0.0;
  for (const auto& run : runs) {
    const double len = polyline_length(run);
    if (len > best_len) {
      best_len = len;
      best = &run;
    }
  }
  if (best == nullptr) throw std::invalid_argument("lane lies outside the image");

  Lane out;
  out.slot = lane.slot;
  out.points = *best;
  const std::size_t n = out.points.size();
  const Point2 front = extrapolate(out.points[0], out.points[1]);
  const Point2 back = extrapolate(out.points[n - 1], out.points[n - 2]);
  out.points.front() = front;
  out.points.back() = back;
  dedupe(out.points);
  if (out.points.size() < 2) throw std::invalid_argument("lane degenerates after clipping");
  return out;
}

Scene shift_augment(const Scene& scene, double dx, double dy, double max_shift) {
  if (std::abs(dx) > max_shift || std::abs(dy) > max_shift)
    throw std::invalid_argument("shift exceeds the configured maximum");
  Scene out;
  out.seed = scene.seed;
  const bool has_shapes = scene.shape_params.size() == scene.lanes.size();
  for (std::size_t i = 0; i < scene.lanes.size(); ++i) {
    Lane moved = scene.lanes[i];
    for (Point2& p : moved.points) {
      p.x += dx;
      p.y += dy;
    }
    try {
      out.lanes.push_back(extend_to_boundary(moved));
    } catch (const std::invalid_argument&) {
      continue;
    }
    if (has_shapes) out.shape_params.push_back(scene.shape_params[i]);
  }
  return out;
}

}  // namespace hald
