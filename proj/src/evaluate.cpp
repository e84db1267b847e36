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

#include "hald/evaluate.hpp"

#include <cmath>
#include <cstdio>
#include <numbers>
#include <stdexcept>

#include "hald/rng.hpp"
#include "hald/svg.hpp"

namespace hald {

namespace {

std::vector<Lane> clip_lanes(std::span<const Lane> lanes, double top) {
  std::vector<Lane> out;
  for (const Lane& lane : lanes) {
    Lane c = clip_lane_below(lane, top);
    if (c.points.size() >= 2) out.push_back(std::move(c));
  }
  return out;
}

struct SceneResult {
  F1Report f1;
  AccuracyReport accuracy;
  double loc_sum = 0.0;
  long loc_points = 0;
  std::vector<Lane> predictions;
};

void accumulate_loc(const Grid<double>& pred, const Grid<double>& target, SceneResult& r) {
  for (int l = 0; l < target.rows; ++l) {
    for (int a = 0; a < target.cols; ++a) {
      if (target(l, a) < 0.0 || pred(l, a) < 0.0) continue;
      r.loc_sum += std::abs(pred(l, a) - target(l, a));
      ++r.loc_points;
    }
  }
}

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.9g", v);
  return buf;
}

}  // namespace

std::vector<double> default_accuracy_rows() {
  std::vector<double> rows;
  for (int k = 15; k <= 50; ++k) rows.push_back(k / 50.0);
  return rows;
}

ImageGrid eval_image(const Scene& scene, int height, int width, const DataConfig& data, std::uint64_t image_seed) {
  return rasterize_scene(scene, height, width, data.stroke, data.noise_sigma, data.occlusions,
                         mix_seed(image_seed, scene.seed));
}

Predictor model_predictor(const Model& model, const EvalOptions& options) {
  const bool fltta = options.fltta;
  const int shift = options.fltta_shift;
  const DecodeMode mode = options.decode;
  return [&model, fltta, shift, mode](const Scene&, const ImageGrid& image) {
    if (model.config().head == HeadKind::regression) return decode_regression(model.regression_forward(image), model.system());
    const PredictionBundle bundle = fltta ? fltta_forward(model, image, shift) : model.forward(image);
    return decode(bundle, model.system(), mode);
  };
}

Predictor oracle_predictor(const AnchorSystem& system, AssignMode assign) {
  return [system, assign](const Scene& scene, const ImageGrid&) {
    const CoordTarget coords = encode_targets(scene, system, assign_lanes(scene, system, effective_assign(system, assign)));
    return decode(onehot_bundle(quantize_targets(coords, system), system), system, DecodeMode::expectation);
  };
}

EvalReport evaluate(const Predictor& predictor, std::span<const Scene> scenes, const AnchorSystem& system,
                    int image_height, int image_width, const EvalOptions& options) {
  const std::vector<double> rows = options.accuracy_rows.empty() ? default_accuracy_rows() : options.accuracy_rows;
  const int min_points = options.min_points < 0 ? default_min_points(system) : options.min_points;
  const double width_px = scaled_lane_width(options.eval_width, options.lane_width_px);
  const int n = static_cast<int>(scenes.size());
  std::vector<SceneResult> results(n);
  std::vector<std::string> errors(n);

#pragma omp parallel for schedule(dynamic)
  for (int i = 0; i < n; ++i) {
    try {
      const Scene& scene = scenes[i];
      const ImageGrid image = eval_image(scene, image_height, image_width, options.data, options.image_seed);
      const DecodedLanes raw = predictor(scene, image);
      const CoordTarget target = encode_targets(scene, system, assign_lanes(scene, system, effective_assign(system, options.data.assign)));
      SceneResult& r = results[i];
      accumulate_loc(raw.rows, target.rows, r);
      accumulate_loc(raw.cols, target.cols, r);
      const std::vector<Lane> preds = clip_lanes(postprocess(raw, min_points).polylines(), options.roi_top);
      const std::vector<Lane> gts = clip_lanes(scene.lanes, options.roi_top);
      r.f1 = culane_f1(preds, gts, options.iou_threshold, width_px, options.eval_height, options.eval_width,
                       options.match);
      r.accuracy = tusimple_accuracy(preds, gts, rows, options.tol_px, 800.0);
      if (options.keep_predictions) r.predictions = preds;
    } catch (const std::exception& e) {
      errors[i] = e.what();
    }
  }

  EvalReport report;
  double loc_sum = 0.0;
  for (int i = 0; i < n; ++i) {
    if (!errors[i].empty())
      throw std::runtime_error("scene " + std::to_string(scenes[i].seed) + ": " + errors[i]);
    report.f1 += results[i].f1;
    report.accuracy += results[i].accuracy;
    loc_sum += results[i].loc_sum;
    report.loc_points += results[i].loc_points;
    if (options.keep_predictions) report.predictions.push_back(std::move(results[i].predictions));
  }
  report.mean_loc_error = report.loc_points == 0 ? 0.0 : loc_sum / static_cast<double>(report.loc_points);
  return report;
}

EvalReport evaluate(const Model& model, std::span<const Scene> scenes, const EvalOptions& options) {
  return evaluate(model_predictor(model, options), scenes, model.system(), model.config().input_height,
                  model.config().input_width, options);
}

std::string AngleErrorTable::to_csv() const {
  std::string s = "bin_lo_deg,bin_hi_deg,count,mean_horizontal,mean_perpendicular\n";
  for (const AngleBin& b : bins)
    s += fmt(b.lo) + "," + fmt(b.hi) + "," + std::to_string(b.count) + "," + fmt(b.mean_horizontal) + "," +
         fmt(b.mean_perpendicular) + "\n";
  return s;
}

std::string AngleErrorTable::to_svg() const {
  double perp_sum = 0.0;
  long total = 0;
  LineSeries horizontal{"horizontal", {}, {}, true};
  LineSeries perpendicular{"perpendicular", {}, {}, true};
  for (const AngleBin& b : bins) {
    perp_sum += b.mean_perpendicular * static_cast<double>(b.count);
    total += b.count;
    if (b.count == 0) continue;
    const double centre = 0.5 * (b.lo + b.hi);
    horizontal.xs.push_back(centre);
    horizontal.ys.push_back(b.mean_horizontal);
    perpendicular.xs.push_back(centre);
    perpendicular.ys.push_back(b.mean_perpendicular);
  }
  const double eps = total == 0 ? 0.0 : perp_sum / static_cast<double>(total);
  LineSeries band{"eps / sin(theta)", {}, {}, false};
  const double lo = bins.empty() ? 0.0 : bins.front().lo;
  const double hi = bins.empty() ? 90.0 : bins.back().hi;
  for (int k = 0; k <= 60; ++k) {
    const double deg = lo + (hi - lo) * k / 60.0;
    const double s = std::sin(deg * std::numbers::pi / 180.0);
    if (s < 0.2) continue;
    band.xs.push_back(deg);
    band.ys.push_back(eps / s);
  }
  const std::vector<LineSeries> series{horizontal, perpendicular, band};
  return svg_line_chart("localization error vs lane angle", "lane angle (deg)", "mean error (normalized)", series);
}

AngleErrorTable angle_error_stats(const Predictor& predictor, std::span<const Scene> scenes,
                                  const AnchorSystem& system, AssignMode assign, int image_height, int image_width,
                                  const EvalOptions& options, std::vector<double> edges_deg) {
  if (edges_deg.size() < 2) throw std::invalid_argument("angle bins need at least two edges");
  for (std::size_t i = 1; i < edges_deg.size(); ++i)
    if (!(edges_deg[i] > edges_deg[i - 1])) throw std::invalid_argument("angle bin edges must increase strictly");

  struct Entry {
    double angle;
    double horizontal;
    double perpendicular;
  };
  const int n = static_cast<int>(scenes.size());
  std::vector<std::vector<Entry>> per_scene(n);
  std::vector<std::string> errors(n);

#pragma omp parallel for schedule(dynamic)
  for (int i = 0; i < n; ++i) {
    try {
      const Scene& scene = scenes[i];
      const ImageGrid image = eval_image(scene, image_height, image_width, options.data, options.image_seed);
      const DecodedLanes raw = predictor(scene, image);
      const AnchorAssignment assignment = assign_lanes(scene, system, effective_assign(system, assign));
      const CoordTarget target = encode_targets(scene, system, assignment);
      for (const LaneAssignment& e : assignment.entries) {
        if (e.kind != AnchorKind::row) continue;
        const Lane& lane = scene.lanes[e.lane];
        const double angle = lane_angle(lane) * 180.0 / std::numbers::pi;
        for (int a = 0; a < system.n_row(); ++a) {
          const double t = target.rows(e.slot, a);
          const double p = raw.rows(e.slot, a);
          if (t < 0.0 || p < 0.0) continue;
          per_scene[i].push_back({angle, std::abs(p - t), perpendicular_error(lane, p, system.row_anchors[a])});
        }
      }
    } catch (const std::exception& e) {
      errors[i] = e.what();
    }
  }

  AngleErrorTable table;
  for (std::size_t b = 0; b + 1 < edges_deg.size(); ++b) table.bins.push_back({edges_deg[b], edges_deg[b + 1]});
  for (int i = 0; i < n; ++i) {
    if (!errors[i].empty())
      throw std::runtime_error("scene " + std::to_string(scenes[i].seed) + ": " + errors[i]);
    for (const Entry& e : per_scene[i]) {
      for (AngleBin& b : table.bins) {
        if (e.angle > b.lo && e.angle <= b.hi) {
          ++b.count;
          b.mean_horizontal += e.horizontal;
          b.mean_perpendicular += e.perpendicular;
          break;
        }
      }
    }
  }
  for (AngleBin& b : table.bins) {
    if (b.count == 0) continue;
    b.mean_horizontal /= static_cast<double>(b.count);
    b.mean_perpendicular /= static_cast<double>(b.count);
  }
  return table;
}

}  // namespace hald
