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

#include <cstddef>
#include <functional>
#include <numeric>
#include <vector>

namespace hald {

/// Row-major float64 values with a gradient buffer of the same length.
struct Tensor {
  std::vector<int> shape;
  std::vector<double> values;
  std::vector<double> grad;

  Tensor() = default;
  explicit Tensor(std::vector<int> s)
      : shape(std::move(s)), values(element_count(shape), 0.0), grad(values.size(), 0.0) {}

  std::size_t size() const { return values.size(); }
  void zero_grad() { std::fill(grad.begin(), grad.end(), 0.0); }

  static std::size_t element_count(const std::vector<int>& s) {
    return std::accumulate(s.begin(), s.end(), std::size_t{1}, std::multiplies<>());
  }
};

}  // namespace hald
