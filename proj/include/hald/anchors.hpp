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

#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "hald/bundle.hpp"
#include "hald/grid.hpp"
#include "hald/scene.hpp"

namespace hald {

enum class AnchorKind { row, column };

/// Fixed row anchors (normalized y) and column anchors (normalized x).
/// With no column anchors this is the plain row-anchor formulation.
struct AnchorSystem {
  std::vector<double> row_anchors;
  std::vector<double> col_anchors;
  int n_row_lanes = 0;
  int n_col_lanes = 0;
  int row_dim = 2;
  int col_dim = 2;

  int n_row() const { return static_cast<int>(row_anchors.size()); }
  int n_col() const { return static_cast<int>(col_anchors.size()); }
  bool hybrid() const { return n_row_lanes > 0 && n_col_lanes > 0; }

  /// Throws std::invalid_argument on unsorted/duplicate anchors or bad dims.
  void validate() const;

  /// "tusimple-rows", "culane-like", "desk", plus the ablation systems
  /// "desk-rows" (4 row lanes) and "desk-cols" (4 column lanes).
  static AnchorSystem preset(std::string_view name);

  friend bool operator==(const AnchorSystem&, const AnchorSystem&) = default;
};

std::vector<double> linspace(double lo, double hi, int n);

nlohmann::ordered_json anchor_system_to_json(const AnchorSystem& system);
AnchorSystem anchor_system_from_json(const nlohmann::ordered_json& j);

enum class AssignMode { semantics, geometry, rows_only, columns_only };

AssignMode parse_assign_mode(std::string_view name);
std::string_view assign_mode_name(AssignMode mode);

struct LaneAssignment {
  int lane = 0;  // index into Scene::lanes
  AnchorKind kind = AnchorKind::row;
  int slot = 0;
  friend bool operator==(const LaneAssignment&, const LaneAssignment&) = default;
};

struct AnchorAssignment {
  std::vector<LaneAssignment> entries;
  friend bool operator==(const AnchorAssignment&, const AnchorAssignment&) = default;
};

class SlotOverflow : public std::runtime_error {
 public:
  SlotOverflow(int lane, AnchorKind kind);
  int lane() const { return lane_; }

 private:
  int lane_;
};

/// rows_only for systems without column lanes, columns_only for systems
/// without row lanes, otherwise `mode`.
AssignMode effective_assign(const AnchorSystem& system, AssignMode mode);

/// Picks an anchor type per lane and orders slots left to right by mean x.
AnchorAssignment assign_lanes(const Scene& scene, const AnchorSystem& system, AssignMode mode,
                              double aspect = kDefaultAspect);

/// Coordinate where the lane first crosses the anchor, walking from the
/// bottom endpoint; x for a row anchor, y for a column anchor.
std::optional<double> intersect_lane_anchor(const Lane& lane, AnchorKind kind, double position);

/// Continuous targets; -1 marks anchors the lane does not cross.
struct CoordTarget {
  Grid<double> rows;  // N^r_lane x N_row
  Grid<double> cols;  // N^c_lane x N_col
  friend bool operator==(const CoordTarget&, const CoordTarget&) = default;
};

struct ClassTarget {
  Grid<int> cls_rows;
  Grid<int> cls_cols;
  Grid<int> ext_rows;
  Grid<int> ext_cols;
  friend bool operator==(const ClassTarget&, const ClassTarget&) = default;
};

CoordTarget encode_targets(const Scene& scene, const AnchorSystem& system, const AnchorAssignment& assignment);

int quantize(double t, int dim);
ClassTarget quantize_targets(const CoordTarget& coords, const AnchorSystem& system);

/// Cell-centre coordinate of a (possibly fractional) class location.
inline double class_to_coord(double loc, int dim) { return (loc + 0.5) / dim; }

/// Logits with `margin` at the target class and 0 elsewhere; existence
/// logits likewise. Used for oracle decoding.
PredictionBundle onehot_bundle(const ClassTarget& target, const AnchorSystem& system, double margin = 50.0);

struct DecodedLane {
  AnchorKind kind = AnchorKind::row;
  int slot = 0;
  std::vector<Point2> points;  // present anchors only, bottom first for rows
};

struct DecodedLanes {
  Grid<double> rows;  // decoded coordinate or -1
  Grid<double> cols;
  std::vector<DecodedLane> lanes;

  /// Lanes with at least two points as polylines.
  std::vector<Lane> polylines() const;
};

enum class DecodeMode { expectation, argmax };

DecodeMode parse_decode_mode(std::string_view name);
std::string_view decode_mode_name(DecodeMode mode);

DecodedLanes decode_predictions(const PredictionBundle& bundle, const AnchorSystem& system);
DecodedLanes argmax_decode(const PredictionBundle& bundle, const AnchorSystem& system);
DecodedLanes decode(const PredictionBundle& bundle, const AnchorSystem& system, DecodeMode mode);
DecodedLanes decode_regression(const RegressionBundle& bundle, const AnchorSystem& system);

/// Row-only systems keep lanes with >= 2 points, hybrid systems >= 4.
int default_min_points(const AnchorSystem& system);
DecodedLanes postprocess(DecodedLanes decoded, int min_points);

struct ComplexityDims {
  long long n_row = 0;
  long long n_col = 0;
  long long n_row_lanes = 0;
  long long n_col_lanes = 0;
  long long row_dim = 0;
  long long col_dim = 0;

  static ComplexityDims from(const AnchorSystem& system);
};

struct ComplexityStats {
  long long n_classifications = 0;
  long long n_calculations = 0;
  long long seg_classifications = 0;
  long long seg_calculations = 0;
  double ratio = 0.0;
};

ComplexityStats complexity_report(long long image_h, long long image_w, const ComplexityDims& dims,
                                  long long seg_classes);

// JSONL records of per-scene targets.
std::string targets_to_json(std::uint64_t seed, const CoordTarget& coords, const ClassTarget& classes);

}  // namespace hald
