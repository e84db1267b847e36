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

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "hald/evaluate.hpp"
#include "hald/model.hpp"
#include "hald/scene.hpp"
#include "hald/train.hpp"

namespace hald {

enum class AblationKind { anchors, decode, head, dims, pool };

AblationKind parse_ablation_kind(std::string_view name);
std::string_view ablation_kind_name(AblationKind kind);

struct AblationConfig {
  int train_scenes = 600;
  std::uint64_t train_seed = 1000;
  int test_scenes = 200;
  std::uint64_t test_seed = 500000;
  GeneratorConfig generator = GeneratorConfig::desk();
  ModelConfig model;
  TrainConfig train;
  EvalOptions eval;
  std::vector<int> dims{25, 50, 100, 200};
  AnchorKind dims_axis = AnchorKind::row;
};

struct AblationRow {
  std::string variant;
  F1Report f1;
  double accuracy = 0.0;
  double loc_error = 0.0;
  long loc_points = 0;
};

struct AblationReport {
  AblationKind kind = AblationKind::anchors;
  std::vector<AblationRow> rows;

  const AblationRow& row(std::string_view variant) const;
  std::string to_csv() const;
  std::string to_svg() const;
};

/// Variants per kind:
///   anchors: rows, columns, hybrid
///   decode:  expectation, argmax (one trained model)
///   head:    classification, regression
///   dims:    one row per value on the chosen axis
///   pool:    flatten, gap
AblationReport run_ablation(AblationKind kind, const AblationConfig& config);

}  // namespace hald
