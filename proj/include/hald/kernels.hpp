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
#include <span>

namespace hald {

/// Geometry of a 2-D convolution over a (channels x height x width) map.
/// Weights are laid out [out_c][in_c][kernel][kernel].
struct ConvShape {
  int in_c = 0, in_h = 0, in_w = 0;
  int out_c = 0, out_h = 0, out_w = 0;
  int kernel = 3;
  int stride = 1;
  int pad_top = 0, pad_left = 0;

  /// 'same' padding: out = ceil(in / stride), the extra pad going to the bottom/right.
  static ConvShape same(int in_c, int in_h, int in_w, int out_c, int kernel, int stride);

  std::size_t in_size() const { return static_cast<std::size_t>(in_c) * in_h * in_w; }
  std::size_t out_size() const { return static_cast<std::size_t>(out_c) * out_h * out_w; }
  std::size_t weight_size() const { return static_cast<std::size_t>(out_c) * in_c * kernel * kernel; }
};

// Dense kernels. The serial versions are the reference; the OpenMP versions
// partition work so that every output element accumulates its terms in the
// same order, which keeps the two bit-identical at any thread count.
namespace kernels {

namespace serial {
void conv2d_forward(const ConvShape& s, std::span<const double> in, std::span<const double> weight,
                    std::span<const double> bias, std::span<double> out);
/// Overwrites grad_in.
void conv2d_backward_input(const ConvShape& s, std::span<const double> weight, std::span<const double> grad_out,
                           std::span<double> grad_in);
/// Accumulates into grad_weight and grad_bias.
void conv2d_backward_params(const ConvShape& s, std::span<const double> in, std::span<const double> grad_out,
                            std::span<double> grad_weight, std::span<double> grad_bias);

/// y = W x + b with W laid out [out][in].
void linear_forward(int n_in, int n_out, std::span<const double> x, std::span<const double> weight,
                    std::span<const double> bias, std::span<double> y);
void linear_backward_input(int n_in, int n_out, std::span<const double> weight, std::span<const double> grad_y,
                           std::span<double> grad_x);
void linear_backward_params(int n_in, int n_out, std::span<const double> x, std::span<const double> grad_y,
                            std::span<double> grad_weight, std::span<double> grad_bias);
}  // namespace serial

namespace omp {
void conv2d_forward(const ConvShape& s, std::span<const double> in, std::span<const double> weight,
                    std::span<const double> bias, std::span<double> out);
void conv2d_backward_input(const ConvShape& s, std::span<const double> weight, std::span<const double> grad_out,
                           std::span<double> grad_in);
void conv2d_backward_params(const ConvShape& s, std::span<const double> in, std::span<const double> grad_out,
                            std::span<double> grad_weight, std::span<double> grad_bias);
void linear_forward(int n_in, int n_out, std::span<const double> x, std::span<const double> weight,
                    std::span<const double> bias, std::span<double> y);
void linear_backward_input(int n_in, int n_out, std::span<const double> weight, std::span<const double> grad_y,
                           std::span<double> grad_x);
void linear_backward_params(int n_in, int n_out, std::span<const double> x, std::span<const double> grad_y,
                            std::span<double> grad_weight, std::span<double> grad_bias);
}  // namespace omp

using omp::conv2d_backward_input;
using omp::conv2d_backward_params;
using omp::conv2d_forward;
using omp::linear_backward_input;
using omp::linear_backward_params;
using omp::linear_forward;

/// Caps OpenMP worker threads; 1 runs everything serially.
void set_threads(int n);
int max_threads();

}  // namespace kernels

}  // namespace hald
