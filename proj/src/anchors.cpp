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
#include <numbers>
#include <stdexcept>
#include <string>

#include "hald/anchors.hpp"
#include "hald/losses.hpp"

namespace hald {

using nlohmann::ordered_json;

namespace {

void check_anchor_list(const std::vector<double>& anchors, const char* what) {
  for (std::size_t i = 0; i < anchors.size(); ++i) {
    if (!(anchors[i] >= 0.0 && anchors[i] <= 1.0))
      throw std::invalid_argument(std::string(what) + " anchor outside [0,1]");
    if (i > 0 && !(anchors[i] > anchors[i - 1]))
      throw std::invalid_argument(std::string(what) + " anchors must be strictly increasing");
  }
}

double mean_x(const Lane& lane) {
  double s = 0.0;
  for (const Point2& p : lane.points) s += p.x;
  return s / static_cast<double>(lane.points.size());
}

template <class Coord, class Other>
std::optional<double> first_crossing(const std::vector<Point2>& pts, bool forward, double a, Coord along,
                                     Other across) {
  const std::size_t n = pts.size();
  auto at = [&](std::size_t k) -> const Point2& { return forward ? pts[k] : pts[n - 1 - k]; };
  for (std::size_t k = 0; k + 1 < n; ++k) {
    const Point2& p = at(k);
    const Point2& q = at(k + 1);
    const double pa = along(p) - a;
    const double qa = along(q) - a;
    if (pa == 0.0) return across(p);
    if ((pa < 0.0 && qa > 0.0) || (pa > 0.0 && qa < 0.0)) {
      const double t = pa / (pa - qa);
      return std::clamp(across(p) + t * (across(q) - across(p)), 0.0, 1.0);
    }
  }
  if (along(at(n - 1)) == a) return across(at(n - 1));
  return std::nullopt;
}

std::size_t argmax_lowest(std::span<const double> v) {
  std::size_t best = 0;
  for (std::size_t k = 1; k < v.size(); ++k)
    if (v[k] > v[best]) best = k;
  return best;
}

void check_block(const LogitBlock& b, int lanes, int anchors, int width, const char* what) {
  if (b.lanes != lanes || b.anchors != anchors || b.width != width ||
      b.values.size() != static_cast<std::size_t>(lanes) * anchors * width)
    throw std::invalid_argument(std::string("bundle shape mismatch in ") + what);
}

template <class LocFn>
DecodedLanes decode_with(const LogitBlock& loc_rows, const LogitBlock& loc_cols, const LogitBlock& exist_rows,
                         const LogitBlock& exist_cols, const AnchorSystem& system, LocFn loc_of) {
  DecodedLanes out;
  out.rows = Grid<double>(system.n_row_lanes, system.n_row(), -1.0);
  out.cols = Grid<double>(system.n_col_lanes, system.n_col(), -1.0);

  for (int l = 0; l < system.n_row_lanes; ++l) {
    DecodedLane lane{AnchorKind::row, l, {}};
    for (int j = system.n_row() - 1; j >= 0; --j) {
      const auto e = exist_rows.at(l, j);
      if (!(e[kPresent] > e[kAbsent])) continue;
      const double coord = loc_of(loc_rows.at(l, j), system.row_dim);
      out.rows(l, j) = coord;
      lane.points.push_back({coord, system.row_anchors[j]});
    }
    out.lanes.push_back(std::move(lane));
  }
  for (int l = 0; l < system.n_col_lanes; ++l) {
    DecodedLane lane{AnchorKind::column, l, {}};
    for (int j = 0; j < system.n_col(); ++j) {
      const auto e = exist_cols.at(l, j);
      if (!(e[kPresent] > e[kAbsent])) continue;
      const double coord = loc_of(loc_cols.at(l, j), system.col_dim);
      out.cols(l, j) = coord;
      lane.points.push_back({system.col_anchors[j], coord});
    }
    out.lanes.push_back(std::move(lane));
  }
  return out;
}

ordered_json grid_json(const Grid<double>& g) {
  ordered_json rows = ordered_json::array();
  for (int r = 0; r < g.rows; ++r) {
    ordered_json row = ordered_json::array();
    for (double v : g.row(r)) {
      if (v == -1.0)
        row.push_back(-1);
      else
        row.push_back(v);
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

ordered_json grid_json(const Grid<int>& g) {
  ordered_json rows = ordered_json::array();
  for (int r = 0; r < g.rows; ++r) rows.push_back(std::vector<int>(g.row(r).begin(), g.row(r).end()));
  return rows;
}

}  // namespace

std::vector<double> linspace(double lo, double hi, int n) {
  std::vector<double> v(static_cast<std::size_t>(std::max(n, 0)));
  for (int i = 0; i < n; ++i) v[i] = n == 1 ? lo : lo + (hi - lo) * i / (n - 1);
  if (n > 1) v.back() = hi;
  return v;
}

void AnchorSystem::validate() const {
  check_anchor_list(row_anchors, "row");
  check_anchor_list(col_anchors, "column");
  if (row_dim < 2 || col_dim < 2) throw std::invalid_argument("classification dimensions must be >= 2");
  if (n_row_lanes < 0 || n_col_lanes < 0) throw std::invalid_argument("lane counts must be >= 0");
  if (n_row_lanes + n_col_lanes < 1) throw std::invalid_argument("anchor system has no lane slots");
  if (n_row_lanes > 0 && row_anchors.empty()) throw std::invalid_argument("row lanes need at least one row anchor");
  if (n_col_lanes > 0 && col_anchors.empty())
    throw std::invalid_argument("column lanes need at least one column anchor");
}

AnchorSystem AnchorSystem::preset(std::string_view name) {
  AnchorSystem s;
  if (name == "tusimple-rows") {
    for (int k = 160; k <= 710; k += 10) s.row_anchors.push_back(k / 720.0);
    s.n_row_lanes = 4;
    s.row_dim = 100;
  } else if (name == "culane-like") {
    s.row_anchors = linspace(0.44, 1.0, 18);
    s.col_anchors = linspace(0.0, 1.0, 40);
    s.n_row_lanes = s.n_col_lanes = 2;
    s.row_dim = 200;
    s.col_dim = 100;
  } else if (name == "desk") {
    s.row_anchors = linspace(0.3, 1.0, 12);
    s.col_anchors = linspace(0.0, 1.0, 16);
    s.n_row_lanes = s.n_col_lanes = 2;
    s.row_dim = 50;
    s.col_dim = 25;
  } else if (name == "desk-rows") {
    s.row_anchors = linspace(0.3, 1.0, 12);
    s.n_row_lanes = 4;
    s.row_dim = 50;
    s.col_dim = 25;
  } else if (name == "desk-cols") {
    s.col_anchors = linspace(0.0, 1.0, 16);
    s.n_col_lanes = 4;
    s.row_dim = 50;
    s.col_dim = 25;
  } else {
    throw std::invalid_argument("unknown anchor preset '" + std::string(name) + "'");
  }
  s.validate();
  return s;
}

ordered_json anchor_system_to_json(const AnchorSystem& s) {
  ordered_json j;
  j["row_anchors"] = s.row_anchors;
  j["col_anchors"] = s.col_anchors;
  j["n_row_lanes"] = s.n_row_lanes;
  j["n_col_lanes"] = s.n_col_lanes;
  j["row_dim"] = s.row_dim;
  j["col_dim"] = s.col_dim;
  return j;
}

AnchorSystem anchor_system_from_json(const ordered_json& j) {
  AnchorSystem s;
  s.row_anchors = j.at("row_anchors").get<std::vector<double>>();
  s.col_anchors = j.at("col_anchors").get<std::vector<double>>();
  s.n_row_lanes = j.at("n_row_lanes").get<int>();
  s.n_col_lanes = j.at("n_col_lanes").get<int>();
  s.row_dim = j.at("row_dim").get<int>();
  s.col_dim = j.at("col_dim").get<int>();
  s.validate();
  return s;
}

AssignMode parse_assign_mode(std::string_view name) {
  for (AssignMode m : {AssignMode::semantics, AssignMode::geometry, AssignMode::rows_only, AssignMode::columns_only})
    if (assign_mode_name(m) == name) return m;
  throw std::invalid_argument("unknown assignment mode '" + std::string(name) + "'");
}

std::string_view assign_mode_name(AssignMode mode) {
  switch (mode) {
    case AssignMode::semantics: return "semantics";
    case AssignMode::geometry: return "geometry";
    case AssignMode::rows_only: return "rows";
    case AssignMode::columns_only: return "columns";
  }
  return "semantics";
}

SlotOverflow::SlotOverflow(int lane, AnchorKind kind)
    : std::runtime_error("no free " + std::string(kind == AnchorKind::row ? "row" : "column") +
                         " anchor slot for lane " + std::to_string(lane)),
      lane_(lane) {}

AssignMode effective_assign(const AnchorSystem& system, AssignMode mode) {
  if (system.n_col_lanes == 0) return AssignMode::rows_only;
  if (system.n_row_lanes == 0) return AssignMode::columns_only;
  return mode;
}

AnchorAssignment assign_lanes(const Scene& scene, const AnchorSystem& system, AssignMode mode, double aspect) {
  std::vector<int> on_rows;
  std::vector<int> on_cols;
  for (int i = 0; i < static_cast<int>(scene.lanes.size()); ++i) {
    const Lane& lane = scene.lanes[i];
    bool row = false;
    switch (mode) {
      case AssignMode::rows_only: row = true; break;
      case AssignMode::columns_only: row = false; break;
      case AssignMode::semantics:
        if (lane.slot == Slot::ego_left || lane.slot == Slot::ego_right) {
          row = true;
          break;
        }
        if (lane.slot == Slot::side_left || lane.slot == Slot::side_right) {
          row = false;
          break;
        }
        [[fallthrough]];
      case AssignMode::geometry: row = lane_angle(lane, aspect) > std::numbers::pi / 4.0; break;
    }
    (row ? on_rows : on_cols).push_back(i);
  }

  AnchorAssignment out;
  auto place = [&](std::vector<int>& lanes, AnchorKind kind, int capacity) {
    std::stable_sort(lanes.begin(), lanes.end(),
                     [&](int a, int b) { return mean_x(scene.lanes[a]) < mean_x(scene.lanes[b]); });
    if (static_cast<int>(lanes.size()) > capacity) throw SlotOverflow(lanes[capacity], kind);
    for (int k = 0; k < static_cast<int>(lanes.size()); ++k) out.entries.push_back({lanes[k], kind, k});
  };
  place(on_rows, AnchorKind::row, system.n_row_lanes);
  place(on_cols, AnchorKind::column, system.n_col_lanes);
  std::sort(out.entries.begin(), out.entries.end(),
            [](const LaneAssignment& a, const LaneAssignment& b) { return a.lane < b.lane; });
  return out;
}

std::optional<double> intersect_lane_anchor(const Lane& lane, AnchorKind kind, double position) {
  const auto& pts = lane.points;
  if (pts.size() < 2) return std::nullopt;
  const bool forward = pts.front().y >= pts.back().y;
  if (kind == AnchorKind::row)
    return first_crossing(pts, forward, position, [](const Point2& p) { return p.y; },
                          [](const Point2& p) { return p.x; });
  return first_crossing(pts, forward, position, [](const Point2& p) { return p.x; },
                        [](const Point2& p) { return p.y; });
}

CoordTarget encode_targets(const Scene& scene, const AnchorSystem& system, const AnchorAssignment& assignment) {
  CoordTarget t{Grid<double>(system.n_row_lanes, system.n_row(), -1.0),
                Grid<double>(system.n_col_lanes, system.n_col(), -1.0)};
  for (const LaneAssignment& a : assignment.entries) {
    const Lane& lane = scene.lanes.at(a.lane);
    const bool row = a.kind == AnchorKind::row;
    Grid<double>& g = row ? t.rows : t.cols;
    const auto& anchors = row ? system.row_anchors : system.col_anchors;
    if (a.slot < 0 || a.slot >= g.rows) throw std::invalid_argument("assignment slot outside the anchor system");
    for (int j = 0; j < static_cast<int>(anchors.size()); ++j) {
      const auto v = intersect_lane_anchor(lane, a.kind, anchors[j]);
      g(a.slot, j) = v ? *v : -1.0;
    }
  }
  return t;
}

int quantize(double t, int dim) { return std::min(static_cast<int>(std::floor(t * dim)), dim - 1); }

ClassTarget quantize_targets(const CoordTarget& coords, const AnchorSystem& system) {
  ClassTarget out;
  auto fill = [](const Grid<double>& src, int dim, Grid<int>& cls, Grid<int>& ext) {
    cls = Grid<int>(src.rows, src.cols, -1);
    ext = Grid<int>(src.rows, src.cols, 0);
    for (std::size_t k = 0; k < src.data.size(); ++k) {
      if (src.data[k] < 0.0) continue;
      cls.data[k] = quantize(src.data[k], dim);
      ext.data[k] = 1;
    }
  };
  fill(coords.rows, system.row_dim, out.cls_rows, out.ext_rows);
  fill(coords.cols, system.col_dim, out.cls_cols, out.ext_cols);
  return out;
}

PredictionBundle onehot_bundle(const ClassTarget& target, const AnchorSystem& system, double margin) {
  PredictionBundle b{LogitBlock(system.n_row_lanes, system.n_row(), system.row_dim),
                     LogitBlock(system.n_col_lanes, system.n_col(), system.col_dim),
                     LogitBlock(system.n_row_lanes, system.n_row(), 2),
                     LogitBlock(system.n_col_lanes, system.n_col(), 2)};
  auto fill = [margin](const Grid<int>& cls, const Grid<int>& ext, LogitBlock& loc, LogitBlock& exist) {
    for (int l = 0; l < cls.rows; ++l)
      for (int j = 0; j < cls.cols; ++j) {
        if (ext(l, j) == 1) {
          loc.at(l, j)[cls(l, j)] = margin;
          exist.at(l, j)[kPresent] = margin;
        } else {
          exist.at(l, j)[kAbsent] = margin;
        }
      }
  };
  fill(target.cls_rows, target.ext_rows, b.loc_rows, b.exist_rows);
  fill(target.cls_cols, target.ext_cols, b.loc_cols, b.exist_cols);
  return b;
}

std::vector<Lane> DecodedLanes::polylines() const {
  std::vector<Lane> out;
  for (const DecodedLane& d : lanes)
    if (d.points.size() >= 2) out.push_back({d.points, Slot::none});
  return out;
}

DecodeMode parse_decode_mode(std::string_view name) {
  if (name == "expectation") return DecodeMode::expectation;
  if (name == "argmax") return DecodeMode::argmax;
  throw std::invalid_argument("unknown decode mode '" + std::string(name) + "'");
}

std::string_view decode_mode_name(DecodeMode mode) {
  return mode == DecodeMode::expectation ? "expectation" : "argmax";
}

DecodedLanes decode(const PredictionBundle& b, const AnchorSystem& system, DecodeMode mode) {
  check_block(b.loc_rows, system.n_row_lanes, system.n_row(), system.row_dim, "loc_rows");
  check_block(b.loc_cols, system.n_col_lanes, system.n_col(), system.col_dim, "loc_cols");
  check_block(b.exist_rows, system.n_row_lanes, system.n_row(), 2, "exist_rows");
  check_block(b.exist_cols, system.n_col_lanes, system.n_col(), 2, "exist_cols");
  if (mode == DecodeMode::expectation)
    return decode_with(b.loc_rows, b.loc_cols, b.exist_rows, b.exist_cols, system,
                       [](std::span<const double> p, int dim) { return class_to_coord(expectation(p), dim); });
  return decode_with(b.loc_rows, b.loc_cols, b.exist_rows, b.exist_cols, system, [](std::span<const double> p, int dim) {
    return class_to_coord(static_cast<double>(argmax_lowest(p)), dim);
  });
}

DecodedLanes decode_predictions(const PredictionBundle& bundle, const AnchorSystem& system) {
  return decode(bundle, system, DecodeMode::expectation);
}

DecodedLanes argmax_decode(const PredictionBundle& bundle, const AnchorSystem& system) {
  return decode(bundle, system, DecodeMode::argmax);
}

DecodedLanes decode_regression(const RegressionBundle& b, const AnchorSystem& system) {
  check_block(b.coord_rows, system.n_row_lanes, system.n_row(), 1, "coord_rows");
  check_block(b.coord_cols, system.n_col_lanes, system.n_col(), 1, "coord_cols");
  check_block(b.exist_rows, system.n_row_lanes, system.n_row(), 2, "exist_rows");
  check_block(b.exist_cols, system.n_col_lanes, system.n_col(), 2, "exist_cols");
  return decode_with(b.coord_rows, b.coord_cols, b.exist_rows, b.exist_cols, system,
                     [](std::span<const double> v, int dim) { return std::clamp(class_to_coord(v[0], dim), 0.0, 1.0); });
}

int default_min_points(const AnchorSystem& system) { return system.n_col_lanes == 0 ? 2 : 4; }

DecodedLanes postprocess(DecodedLanes decoded, int min_points) {
  if (min_points < 0) throw std::invalid_argument("min_points must be >= 0");
  std::vector<DecodedLane> kept;
  for (DecodedLane& lane : decoded.lanes) {
    if (static_cast<int>(lane.points.size()) >= min_points) {
      kept.push_back(std::move(lane));
      continue;
    }
    Grid<double>& g = lane.kind == AnchorKind::row ? decoded.rows : decoded.cols;
    for (double& v : g.row(lane.slot)) v = -1.0;
  }
  decoded.lanes = std::move(kept);
  return decoded;
}

ComplexityDims ComplexityDims::from(const AnchorSystem& s) {
  return {s.n_row(), s.n_col(), s.n_row_lanes, s.n_col_lanes, s.row_dim, s.col_dim};
}

ComplexityStats complexity_report(long long image_h, long long image_w, const ComplexityDims& d,
                                  long long seg_classes) {
  if (image_h <= 0 || image_w <= 0 || seg_classes <= 0) throw std::invalid_argument("dimensions must be positive");
  ComplexityStats s;
  s.n_classifications = d.n_row * d.n_row_lanes + d.n_col * d.n_col_lanes;
  s.n_calculations = d.n_row * d.n_row_lanes * d.row_dim + d.n_col * d.n_col_lanes * d.col_dim;
  s.seg_classifications = image_h * image_w;
  s.seg_calculations = image_h * image_w * seg_classes;
  if (s.n_classifications <= 0 || s.n_calculations <= 0) throw std::invalid_argument("anchor dimensions must be positive");
  s.ratio = static_cast<double>(s.seg_calculations) / static_cast<double>(s.n_calculations);
  return s;
}

std::string targets_to_json(std::uint64_t seed, const CoordTarget& coords, const ClassTarget& classes) {
  ordered_json j;
  j["seed"] = seed;
  j["coords"] = {{"rows", grid_json(coords.rows)}, {"cols", grid_json(coords.cols)}};
  j["classes"] = {{"rows", grid_json(classes.cls_rows)}, {"cols", grid_json(classes.cls_cols)}};
  j["exist"] = {{"rows", grid_json(classes.ext_rows)}, {"cols", grid_json(classes.ext_cols)}};
  return j.dump();
}

}  // namespace hald
