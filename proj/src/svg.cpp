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

#include "hald/svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>

namespace hald {

namespace {

constexpr int kWidth = 640;
constexpr int kHeight = 400;
constexpr int kLeft = 70;
constexpr int kRight = 150;
constexpr int kTop = 40;
constexpr int kBottom = 60;
constexpr const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b"};

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

std::string header(std::string_view title) {
  std::string s = "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + std::to_string(kWidth) + "\" height=\"" +
                  std::to_string(kHeight) + "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  s += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  s += "<text x=\"" + std::to_string(kWidth / 2) + "\" y=\"22\" text-anchor=\"middle\" font-size=\"15\">" +
       xml_escape(title) + "</text>\n";
  return s;
}

struct Axis {
  double lo = 0.0;
  double hi = 1.0;
  double to_px(double v, double px_lo, double px_hi) const { return px_lo + (v - lo) / (hi - lo) * (px_hi - px_lo); }
};

Axis make_axis(double lo, double hi) {
  if (!std::isfinite(lo) || !std::isfinite(hi)) return {0.0, 1.0};
  if (hi <= lo) return {lo - 0.5, lo + 0.5};
  return {lo, hi};
}

std::string y_ticks(const Axis& ay) {
  std::string s;
  const double plot_bottom = kHeight - kBottom;
  for (int i = 0; i <= 4; ++i) {
    const double v = ay.lo + (ay.hi - ay.lo) * i / 4.0;
    const double y = ay.to_px(v, plot_bottom, kTop);
    s += "<line x1=\"" + std::to_string(kLeft - 4) + "\" y1=\"" + num(y) + "\" x2=\"" +
         std::to_string(kWidth - kRight) + "\" y2=\"" + num(y) + "\" stroke=\"#ddd\"/>\n";
    s += "<text x=\"" + std::to_string(kLeft - 8) + "\" y=\"" + num(y + 4) + "\" text-anchor=\"end\">" + num(v) +
         "</text>\n";
  }
  return s;
}

std::string legend(const std::vector<std::string>& names) {
  std::string s;
  for (std::size_t i = 0; i < names.size(); ++i) {
    const int y = kTop + 10 + static_cast<int>(i) * 18;
    const int x = kWidth - kRight + 12;
    s += "<rect x=\"" + std::to_string(x) + "\" y=\"" + std::to_string(y - 9) + "\" width=\"10\" height=\"10\" fill=\"" +
         kPalette[i % 6] + "\"/>\n";
    s += "<text x=\"" + std::to_string(x + 16) + "\" y=\"" + std::to_string(y) + "\">" + xml_escape(names[i]) +
         "</text>\n";
  }
  return s;
}

}  // namespace

std::string xml_escape(std::string_view text) {
  std::string out;
  for (char c : text) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

std::string svg_bar_chart(std::string_view title, std::span<const std::string> labels,
                          std::span<const BarSeries> series) {
  double hi = 0.0;
  for (const BarSeries& s : series)
    for (double v : s.values)
      if (std::isfinite(v)) hi = std::max(hi, v);
  const Axis ay = make_axis(0.0, hi > 0.0 ? hi * 1.1 : 1.0);
  std::string s = header(title) + y_ticks(ay);
  const double plot_w = kWidth - kLeft - kRight;
  const double plot_bottom = kHeight - kBottom;
  const double group_w = labels.empty() ? plot_w : plot_w / static_cast<double>(labels.size());
  const double bar_w = series.empty() ? 0.0 : group_w * 0.8 / static_cast<double>(series.size());
  for (std::size_t g = 0; g < labels.size(); ++g) {
    const double gx = kLeft + group_w * static_cast<double>(g) + group_w * 0.1;
    for (std::size_t k = 0; k < series.size(); ++k) {
      const double v = g < series[k].values.size() && std::isfinite(series[k].values[g]) ? series[k].values[g] : 0.0;
      const double top = ay.to_px(v, plot_bottom, kTop);
      s += "<rect x=\"" + num(gx + bar_w * static_cast<double>(k)) + "\" y=\"" + num(top) + "\" width=\"" +
           num(bar_w * 0.95) + "\" height=\"" + num(plot_bottom - top) + "\" fill=\"" + kPalette[k % 6] + "\"/>\n";
    }
    s += "<text x=\"" + num(gx + group_w * 0.4) + "\" y=\"" + num(plot_bottom + 18) + "\" text-anchor=\"middle\">" +
         xml_escape(labels[g]) + "</text>\n";
  }
  s += "<line x1=\"" + std::to_string(kLeft) + "\" y1=\"" + num(plot_bottom) + "\" x2=\"" +
       std::to_string(kWidth - kRight) + "\" y2=\"" + num(plot_bottom) + "\" stroke=\"black\"/>\n";
  std::vector<std::string> names;
  for (const BarSeries& b : series) names.push_back(b.name);
  s += legend(names) + "</svg>\n";
  return s;
}

std::string svg_line_chart(std::string_view title, std::string_view x_label, std::string_view y_label,
                           std::span<const LineSeries> series) {
  double xlo = std::numeric_limits<double>::infinity(), xhi = -xlo, yhi = 0.0;
  for (const LineSeries& l : series) {
    for (std::size_t i = 0; i < l.xs.size() && i < l.ys.size(); ++i) {
      if (!std::isfinite(l.xs[i]) || !std::isfinite(l.ys[i])) continue;
      xlo = std::min(xlo, l.xs[i]);
      xhi = std::max(xhi, l.xs[i]);
      yhi = std::max(yhi, l.ys[i]);
    }
  }
  const Axis ax = make_axis(xlo, xhi);
  const Axis ay = make_axis(0.0, yhi > 0.0 ? yhi * 1.1 : 1.0);
  const double plot_bottom = kHeight - kBottom;
  const double plot_right = kWidth - kRight;
  std::string s = header(title) + y_ticks(ay);
  for (int i = 0; i <= 4; ++i) {
    const double v = ax.lo + (ax.hi - ax.lo) * i / 4.0;
    s += "<text x=\"" + num(ax.to_px(v, kLeft, plot_right)) + "\" y=\"" + num(plot_bottom + 18) +
         "\" text-anchor=\"middle\">" + num(v) + "</text>\n";
  }
  s += "<text x=\"" + num((kLeft + plot_right) / 2) + "\" y=\"" + num(kHeight - 15) + "\" text-anchor=\"middle\">" +
       xml_escape(x_label) + "</text>\n";
  s += "<text x=\"16\" y=\"" + num((kTop + plot_bottom) / 2) + "\" transform=\"rotate(-90 16 " +
       num((kTop + plot_bottom) / 2) + ")\" text-anchor=\"middle\">" + xml_escape(y_label) + "</text>\n";
  for (std::size_t k = 0; k < series.size(); ++k) {
    const LineSeries& l = series[k];
    std::string pts;
    for (std::size_t i = 0; i < l.xs.size() && i < l.ys.size(); ++i) {
      if (!std::isfinite(l.xs[i]) || !std::isfinite(l.ys[i])) continue;
      const double x = ax.to_px(l.xs[i], kLeft, plot_right);
      const double y = ay.to_px(std::min(l.ys[i], ay.hi), plot_bottom, kTop);
      pts += num(x) + "," + num(y) + " ";
      if (l.markers)
        s += "<circle cx=\"" + num(x) + "\" cy=\"" + num(y) + "\" r=\"3\" fill=\"" + kPalette[k % 6] + "\"/>\n";
    }
    if (!pts.empty()) pts.pop_back();
    s += "<polyline points=\"" + pts + "\" fill=\"none\" stroke=\"" + kPalette[k % 6] + "\" stroke-width=\"1.5\"/>\n";
  }
  s += "<line x1=\"" + std::to_string(kLeft) + "\" y1=\"" + num(plot_bottom) + "\" x2=\"" + num(plot_right) +
       "\" y2=\"" + num(plot_bottom) + "\" stroke=\"black\"/>\n";
  std::vector<std::string> names;
  for (const LineSeries& l : series) names.push_back(l.name);
  s += legend(names) + "</svg>\n";
  return s;
}

std::string svg_scene_overlay(std::span<const Lane> ground_truth, std::span<const Lane> predictions, int width,
                              int height) {
  std::string s = "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + std::to_string(width) + "\" height=\"" +
                  std::to_string(height) + "\">\n<rect width=\"100%\" height=\"100%\" fill=\"#222\"/>\n";
  auto draw = [&](std::span<const Lane> lanes, const char* color, double stroke) {
    for (const Lane& lane : lanes) {
      std::string pts;
      for (const Point2& p : lane.points) pts += num(p.x * width) + "," + num(p.y * height) + " ";
      if (!pts.empty()) pts.pop_back();
      s += "<polyline points=\"" + pts + "\" fill=\"none\" stroke=\"" + color + "\" stroke-width=\"" + num(stroke) +
           "\"/>\n";
    }
  };
  draw(ground_truth, "#2ca02c", 6.0);
  draw(predictions, "#d62728", 2.0);
  s += "</svg>\n";
  return s;
}

}  // namespace hald
