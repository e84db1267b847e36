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

#include <utility>
#include <vector>

#include "hald/grid.hpp"

namespace hald {

struct Matching {
  std::vector<std::pair<int, int>> pairs;  // (row, col), sorted by row
  std::vector<int> unmatched_rows;
  std::vector<int> unmatched_cols;
  double total = 0.0;
};

/// Maximum-total-score one-to-one assignment (Kuhn-Munkres with
/// potentials). Every row or every column is matched, whichever is fewer.
Matching hungarian_max(const Grid<double>& score);

/// Repeatedly takes the best remaining pair; ties go to the lowest (row, col).
Matching greedy_max(const Grid<double>& score);

}  // namespace hald
