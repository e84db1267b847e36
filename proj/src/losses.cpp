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
#include <stdexcept>

#include "hald/losses.hpp"

namespace hald {

namespace {

void check_mask(const LogitBlock& b, const Grid<int>& g, const char* what) {
  if (g.rows != b.lanes || g.cols != b.anchors) throw std::invalid_argument(std::string(what) + ": shape mismatch");
}

template <class T>
void check_grid(const LogitBlock& b, const Grid<T>& g, const char* what) {
  if (g.rows != b.lanes || g.cols != b.anchors) throw std::invalid_argument(std::string(what) + ": shape mismatch");
}

int count_present(const Grid<int>& mask) {
  return static_cast<int>(std::count_if(mask.data.begin(), mask.data.end(), [](int m) { return m != 0; }));
}

// log(sum(exp(x))) - x[label]
double cross_entropy(std::span<const double> x, int label) {
  const double m = *std::max_element(x.begin(), x.end());
  double s = 0.0;
  for (double v : x) s += std::exp(v - m);
  return m + std::log(s) - x[label];
}

double sign(double v) { return v > 0.0 ? 1.0 : (v < 0.0 ? -1.0 : 0.0); }

void axpy(double a, const std::vector<double>& x, std::vector<double>& y) {
  if (x.empty() || a == 0.0) return;
  for (std::size_t k = 0; k < y.size(); ++k) y[k] += a * x[k];
}

}  // namespace

std::vector<double> softmax(std::span<const double> logits) {
  if (logits.empty()) throw std::invalid_argument("softmax of an empty vector");
  for (double v : logits)
    if (!std::isfinite(v)) throw std::invalid_argument("softmax input is not finite");
  const double m = *std::max_element(logits.begin(), logits.end());
  std::vector<double> p(logits.size());
  double s = 0.0;
  for (std::size_t k = 0; k < logits.size(); ++k) s += (p[k] = std::exp(logits[k] - m));
  for (double& v : p) v /= s;
  return p;
}

double expectation(std::span<const double> logits) {
  const auto p = softmax(logits);
  double e = 0.0;
  for (std::size_t k = 0; k < p.size(); ++k) e += p[k] * static_cast<double>(k);
  return e;
}

double smooth_l1(double x) {
  const double a = std::abs(x);
  return a < 1.0 ? 0.5 * x * x : a - 0.5;
}

double smooth_l1_grad(double x) { return std::abs(x) < 1.0 ? x : sign(x); }

void LossWeights::validate() const {
  if (alpha < 0.0 || beta < 0.0 || w_sim < 0.0 || w_shp < 0.0)
    throw std::invalid_argument("loss weights must be non-negative");
}

LossValue cls_loss(const LogitBlock& logits, const Grid<int>& cls, const Grid<int>& mask) {
  check_mask(logits, cls, "cls_loss");
  check_mask(logits, mask, "cls_loss");
  LossValue out{0.0, std::vector<double>(logits.size(), 0.0)};
  const int count = count_present(mask);
  if (count == 0) return out;
  const double inv = 1.0 / count;
  for (int l = 0; l < logits.lanes; ++l)
    for (int j = 0; j < logits.anchors; ++j) {
      if (mask(l, j) == 0) continue;
      const int label = cls(l, j);
      if (label < 0 || label >= logits.width) throw std::invalid_argument("class label out of range at a present anchor");
      const auto x = logits.at(l, j);
      const auto p = softmax(x);
      out.value += cross_entropy(x, label) * inv;
      double* g = out.grad.data() + logits.offset(l, j);
      for (int k = 0; k < logits.width; ++k) g[k] = (p[k] - (k == label ? 1.0 : 0.0)) * inv;
    }
  return out;
}

LossValue exp_loss(const LogitBlock& logits, const Grid<int>& cls, const Grid<int>& mask) {
  check_mask(logits, cls, "exp_loss");
  check_mask(logits, mask, "exp_loss");
  LossValue out{0.0, std::vector<double>(logits.size(), 0.0)};
  const int count = count_present(mask);
  if (count == 0) return out;
  const double inv = 1.0 / count;
  for (int l = 0; l < logits.lanes; ++l)
    for (int j = 0; j < logits.anchors; ++j) {
      if (mask(l, j) == 0) continue;
      const int label = cls(l, j);
      if (label < 0 || label >= logits.width) throw std::invalid_argument("class label out of range at a present anchor");
      const auto p = softmax(logits.at(l, j));
      double e = 0.0;
      for (int k = 0; k < logits.width; ++k) e += p[k] * k;
      const double d = e - label;
      out.value += smooth_l1(d) * inv;
      const double dl = smooth_l1_grad(d) * inv;
      double* g = out.grad.data() + logits.offset(l, j);
      for (int k = 0; k < logits.width; ++k) g[k] = dl * p[k] * (k - e);
    }
  return out;
}

LossValue ext_loss(const LogitBlock& logits, const Grid<int>& ext) {
  check_mask(logits, ext, "ext_loss");
  if (logits.width != 2) throw std::invalid_argument("ext_loss expects two-way logits");
  LossValue out{0.0, std::vector<double>(logits.size(), 0.0)};
  const int n = logits.lanes * logits.anchors;
  if (n == 0) return out;
  const double inv = 1.0 / n;
  for (int l = 0; l < logits.lanes; ++l)
    for (int j = 0; j < logits.anchors; ++j) {
      const int label = ext(l, j) != 0 ? kPresent : kAbsent;
      const auto x = logits.at(l, j);
      const auto p = softmax(x);
      out.value += cross_entropy(x, label) * inv;
      double* g = out.grad.data() + logits.offset(l, j);
      for (int k = 0; k < 2; ++k) g[k] = (p[k] - (k == label ? 1.0 : 0.0)) * inv;
    }
  return out;
}

LossValue sim_loss(const LogitBlock& logits) {
  LossValue out{0.0, std::vector<double>(logits.size(), 0.0)};
  if (logits.lanes == 0) return out;
  if (logits.anchors < 2) throw std::invalid_argument("sim_loss needs at least two anchors");
  const double inv = 1.0 / (logits.lanes * (logits.anchors - 1));
  for (int l = 0; l < logits.lanes; ++l)
    for (int j = 0; j + 1 < logits.anchors; ++j) {
      const auto a = logits.at(l, j);
      const auto b = logits.at(l, j + 1);
      double* ga = out.grad.data() + logits.offset(l, j);
      double* gb = out.grad.data() + logits.offset(l, j + 1);
      for (int k = 0; k < logits.width; ++k) {
        const double d = a[k] - b[k];
        out.value += std::abs(d) * inv;
        ga[k] += sign(d) * inv;
        gb[k] -= sign(d) * inv;
      }
    }
  return out;
}

LossValue shp_loss(const LogitBlock& logits) {
  LossValue out{0.0, std::vector<double>(logits.size(), 0.0)};
  if (logits.lanes == 0) return out;
  if (logits.anchors < 3) throw std::invalid_argument("shp_loss needs at least three anchors");
  const double inv = 1.0 / (logits.lanes * (logits.anchors - 2));
  std::vector<std::vector<double>> probs(logits.anchors);
  std::vector<double> loc(logits.anchors);
  for (int l = 0; l < logits.lanes; ++l) {
    for (int j = 0; j < logits.anchors; ++j) {
      probs[j] = softmax(logits.at(l, j));
      double e = 0.0;
      for (int k = 0; k < logits.width; ++k) e += probs[j][k] * k;
      loc[j] = e;
    }
    for (int j = 0; j + 2 < logits.anchors; ++j) {
      const double s = (loc[j] - loc[j + 1]) - (loc[j + 1] - loc[j + 2]);
      out.value += std::abs(s) * inv;
      const double sg = sign(s) * inv;
      const double coeff[3] = {sg, -2.0 * sg, sg};
      for (int t = 0; t < 3; ++t) {
        double* g = out.grad.data() + logits.offset(l, j + t);
        const auto& p = probs[j + t];
        for (int k = 0; k < logits.width; ++k) g[k] += coeff[t] * p[k] * (k - loc[j + t]);
      }
    }
  }
  return out;
}

LossValue coord_loss(const LogitBlock& coords, const Grid<double>& target, const Grid<int>& mask, int dim) {
  check_grid(coords, target, "coord_loss");
  check_mask(coords, mask, "coord_loss");
  if (coords.width != 1) throw std::invalid_argument("coord_loss expects one value per anchor");
  LossValue out{0.0, std::vector<double>(coords.size(), 0.0)};
  const int count = count_present(mask);
  if (count == 0) return out;
  const double inv = 1.0 / count;
  for (int l = 0; l < coords.lanes; ++l)
    for (int j = 0; j < coords.anchors; ++j) {
      if (mask(l, j) == 0) continue;
      const double d = coords.at(l, j)[0] - (target(l, j) * dim - 0.5);
      out.value += smooth_l1(d) * inv;
      out.grad[coords.offset(l, j)] = smooth_l1_grad(d) * inv;
    }
  return out;
}

LossBreakdown& LossBreakdown::operator+=(const LossBreakdown& o) {
  total += o.total;
  cls += o.cls;
  exp += o.exp;
  ext += o.ext;
  sim += o.sim;
  shp += o.shp;
  coord += o.coord;
  return *this;
}

LossBreakdown LossBreakdown::scaled(double s) const {
  return {total * s, cls * s, exp * s, ext * s, sim * s, shp * s, coord * s};
}

TotalLoss total_loss(const PredictionBundle& bundle, const ClassTarget& target, const LossWeights& w) {
  w.validate();
  TotalLoss out;
  out.grad = bundle;
  auto half = [&](const LogitBlock& loc, const LogitBlock& exist, const Grid<int>& cls, const Grid<int>& ext,
                  LogitBlock& gloc, LogitBlock& gexist) {
    const LossValue c = cls_loss(loc, cls, ext);
    const LossValue e = exp_loss(loc, cls, ext);
    const LossValue x = ext_loss(exist, ext);
    std::fill(gloc.values.begin(), gloc.values.end(), 0.0);
    std::fill(gexist.values.begin(), gexist.values.end(), 0.0);
    axpy(1.0, c.grad, gloc.values);
    axpy(w.alpha, e.grad, gloc.values);
    axpy(w.beta, x.grad, gexist.values);
    out.parts.cls += c.value;
    out.parts.exp += e.value;
    out.parts.ext += x.value;
    if (w.w_sim > 0.0 || (loc.lanes > 0 && loc.anchors >= 2)) {
      const LossValue s = sim_loss(loc);
      out.parts.sim += s.value;
      axpy(w.w_sim, s.grad, gloc.values);
    }
    if (w.w_shp > 0.0 || (loc.lanes > 0 && loc.anchors >= 3)) {
      const LossValue s = shp_loss(loc);
      out.parts.shp += s.value;
      axpy(w.w_shp, s.grad, gloc.values);
    }
  };
  half(bundle.loc_rows, bundle.exist_rows, target.cls_rows, target.ext_rows, out.grad.loc_rows, out.grad.exist_rows);
  half(bundle.loc_cols, bundle.exist_cols, target.cls_cols, target.ext_cols, out.grad.loc_cols, out.grad.exist_cols);
  const LossBreakdown& p = out.parts;
  out.parts.total = p.cls + w.alpha * p.exp + w.beta * p.ext + w.w_sim * p.sim + w.w_shp * p.shp;
  return out;
}

RegressionLoss regression_loss(const RegressionBundle& bundle, const CoordTarget& coords, const ClassTarget& target,
                               const AnchorSystem& system, const LossWeights& w) {
  w.validate();
  RegressionLoss out;
  out.grad = bundle;
  auto half = [&](const LogitBlock& pred, const LogitBlock& exist, const Grid<double>& t, const Grid<int>& ext,
                  int dim, LogitBlock& gpred, LogitBlock& gexist) {
    const LossValue c = coord_loss(pred, t, ext, dim);
    const LossValue x = ext_loss(exist, ext);
    gpred.values = c.grad;
    gexist.values.assign(exist.size(), 0.0);
    axpy(w.beta, x.grad, gexist.values);
    out.parts.coord += c.value;
    out.parts.ext += x.value;
  };
  half(bundle.coord_rows, bundle.exist_rows, coords.rows, target.ext_rows, system.row_dim, out.grad.coord_rows,
       out.grad.exist_rows);
  half(bundle.coord_cols, bundle.exist_cols, coords.cols, target.ext_cols, system.col_dim, out.grad.coord_cols,
       out.grad.exist_cols);
  out.parts.total = out.parts.coord + w.beta * out.parts.ext;
  return out;
}

}  // namespace hald
