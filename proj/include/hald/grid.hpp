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

#include <cassert>
#include <span>
#include <vector>

namespace hald {

/// Dense row-major matrix.
template <class T>
struct Grid {
  int rows = 0;
  int cols = 0;
  std::vector<T> data;

  Grid() = default;
  Grid(int r, int c, T fill = T{}) : rows(r), cols(c), data(static_cast<std::size_t>(r) * c, fill) {}

  T& operator()(int r, int c) {
    assert(r >= 0 && r < rows && c >= 0 && c < cols);
    return data[static_cast<std::size_t>(r) * cols + c];
  }
  const T& operator()(int r, int c) const {
    assert(r >= 0 && r < rows && c >= 0 && c < cols);
    return data[static_cast<std::size_t>(r) * cols + c];
  }

  std::span<T> row(int r) { return {data.data() + static_cast<std::size_t>(r) * cols, static_cast<std::size_t>(cols)}; }
  std::span<const T> row(int r) const {
    return {data.data() + static_cast<std::size_t>(r) * cols, static_cast<std::size_t>(cols)};
  }

  bool empty() const { return data.empty(); }

  friend bool operator==(const Grid&, const Grid&) = default;
};

}  // namespace hald
