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
#include <limits>

#include "hald/hungarian.hpp"

namespace hald {

namespace {

void fill_unmatched(Matching& m, int rows, int cols) {
  std::vector<bool> row_used(rows, false), col_used(cols, false);
  for (auto [r, c] : m.pairs) {
    row_used[r] = true;
    col_used[c] = true;
  }
  for (int r = 0; r < rows; ++r)
    if (!row_used[r]) m.unmatched_rows.push_back(r);
  for (int c = 0; c < cols; ++c)
    if (!col_used[c]) m.unmatched_cols.push_back(c);
}

}  // namespace

Matching hungarian_max(const Grid<double>& score) {
  Matching m;
  const bool transpose = score.rows > score.cols;
  const int n = transpose ? score.cols : score.rows;
  const int k = transpose ? score.rows : score.cols;
  if (n == 0) {
    fill_unmatched(m, score.rows, score.cols);
    return m;
  }
  auto cost = [&](int i, int j) { return transpose ? -score(j, i) : -score(i, j); };

  constexpr double kInf = std::numeric_limits<double>::infinity();
  std::vector<double> u(n + 1, 0.0), v(k + 1, 0.0);
  std::vector<int> p(k + 1, 0), way(k + 1, 0);
  for (int i = 1; i <= n; ++i) {
    p[0] = i;
    int j0 = 0;
    std::vector<double> minv(k + 1, kInf);
    std::vector<bool> used(k + 1, false);
    do {
      used[j0] = true;
      const int i0 = p[j0];
      double delta = kInf;
      int j1 = 0;
      for (int j = 1; j <= k; ++j) {
        if (used[j]) continue;
        const double cur = cost(i0 - 1, j - 1) - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (int j = 0; j <= k; ++j) {
        if (used[j]) {
          u[p[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (p[j0] != 0);
    do {
      const int j1 = way[j0];
      p[j0] = p[j1];
      j0 = j1;
    } while (j0 != 0);
  }

  for (int j = 1; j <= k; ++j) {
    if (p[j] == 0) continue;
    const int r = transpose ? j - 1 : p[j] - 1;
    const int c = transpose ? p[j] - 1 : j - 1;
    m.pairs.emplace_back(r, c);
  }
  std::sort(m.pairs.begin(), m.pairs.end());
  for (auto [r, c] : m.pairs) m.total += score(r, c);
  fill_unmatched(m, score.rows, score.cols);
  return m;
}

Matching greedy_max(const Grid<double>& score) {
  Matching m;
  std::vector<bool> row_used(score.rows, false), col_used(score.cols, false);
  const int n = std::min(score.rows, score.cols);
  for (int step = 0; step < n; ++step) {
    int br = -1, bc = -1;
    for (int r = 0; r < score.rows; ++r) {
      if (row_used[r]) continue;
      for (int c = 0; c < score.cols; ++c) {
        if (col_used[c]) continue;
        if (br < 0 || score(r, c) > score(br, bc)) {
          br = r;
          bc = c;
        }
      }
    }
    row_used[br] = col_used[bc] = true;
    m.pairs.emplace_back(br, bc);
    m.total += score(br, bc);
  }
  std::sort(m.pairs.begin(), m.pairs.end());
  fill_unmatched(m, score.rows, score.cols);
  return m;
}

}  // namespace hald
