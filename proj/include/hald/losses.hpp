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

#include <span>
#include <vector>

#include "hald/anchors.hpp"
#include "hald/bundle.hpp"
#include "hald/grid.hpp"

namespace hald {

/// Max-subtracted softmax. Throws std::invalid_argument on non-finite input.
std::vector<double> softmax(std::span<const double> logits);

/// Sum_k softmax(logits)[k] * k with 0-indexed classes.
double expectation(std::span<const double> logits);

double smooth_l1(double x);
double smooth_l1_grad(double x);

struct LossValue {
  double value = 0.0;
  std::vector<double> grad;  // same layout as the differentiated block
};

struct LossWeights {
  double alpha = 0.05;  // expectation loss
  double beta = 1.0;    // existence loss
  double w_sim = 0.0;
  double w_shp = 0.0;
  void validate() const;
};

// Localization losses are averaged over present positions (mask = 1);
// absent positions contribute neither value nor gradient.
LossValue cls_loss(const LogitBlock& logits, const Grid<int>& cls, const Grid<int>& mask);
LossValue exp_loss(const LogitBlock& logits, const Grid<int>& cls, const Grid<int>& mask);
/// Two-way cross entropy averaged over every anchor position.
LossValue ext_loss(const LogitBlock& logits, const Grid<int>& ext);
/// L1 between logit vectors of adjacent anchors, averaged over pairs.
LossValue sim_loss(const LogitBlock& logits);
/// L1 of the second difference of per-anchor expectations, averaged over triples.
LossValue shp_loss(const LogitBlock& logits);

/// Smooth-L1 between regressed class-unit coordinates and t * dim - 0.5,
/// averaged over present positions.
LossValue coord_loss(const LogitBlock& coords, const Grid<double>& target, const Grid<int>& mask, int dim);

struct LossBreakdown {
  double total = 0.0;
  double cls = 0.0;
  double exp = 0.0;
  double ext = 0.0;
  double sim = 0.0;
  double shp = 0.0;
  double coord = 0.0;

  LossBreakdown& operator+=(const LossBreakdown& o);
  LossBreakdown scaled(double s) const;
};

struct TotalLoss {
  LossBreakdown parts;
  PredictionBundle grad;
};

/// L_cls + alpha L_exp + beta L_ext + w_sim L_sim + w_shp L_shp, each term
/// summed over the row and column halves of the bundle.
TotalLoss total_loss(const PredictionBundle& bundle, const ClassTarget& target, const LossWeights& weights);

struct RegressionLoss {
  LossBreakdown parts;
  RegressionBundle grad;
};

/// Smooth-L1 coordinate loss + beta L_ext for the regression head.
RegressionLoss regression_loss(const RegressionBundle& bundle, const CoordTarget& coords, const ClassTarget& target,
                               const AnchorSystem& system, const LossWeights& weights);

}  // namespace hald
