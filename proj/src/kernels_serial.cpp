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

#include "hald/kernels.hpp"

namespace hald {

ConvShape ConvShape::same(int in_c, int in_h, int in_w, int out_c, int kernel, int stride) {
  ConvShape s;
  s.in_c = in_c;
  s.in_h = in_h;
  s.in_w = in_w;
  s.out_c = out_c;
  s.kernel = kernel;
  s.stride = stride;
  s.out_h = (in_h + stride - 1) / stride;
  s.out_w = (in_w + stride - 1) / stride;
  s.pad_top = std::max((s.out_h - 1) * stride + kernel - in_h, 0) / 2;
  s.pad_left = std::max((s.out_w - 1) * stride + kernel - in_w, 0) / 2;
  return s;
}

namespace kernels::serial {

void conv2d_forward(const ConvShape& s, std::span<const double> in, std::span<const double> weight,
                    std::span<const double> bias, std::span<double> out) {
  const int k = s.kernel;
  for (int oc = 0; oc < s.out_c; ++oc)
    for (int oy = 0; oy < s.out_h; ++oy)
      for (int ox = 0; ox < s.out_w; ++ox) {
        double acc = bias[oc];
        for (int ic = 0; ic < s.in_c; ++ic)
          for (int ky = 0; ky < k; ++ky) {
            const int iy = oy * s.stride + ky - s.pad_top;
            if (iy < 0 || iy >= s.in_h) continue;
            for (int kx = 0; kx < k; ++kx) {
              const int ix = ox * s.stride + kx - s.pad_left;
              if (ix < 0 || ix >= s.in_w) continue;
              acc += weight[((oc * s.in_c + ic) * k + ky) * k + kx] * in[(ic * s.in_h + iy) * s.in_w + ix];
            }
          }
        out[(oc * s.out_h + oy) * s.out_w + ox] = acc;
      }
}

void conv2d_backward_input(const ConvShape& s, std::span<const double> weight, std::span<const double> grad_out,
                           std::span<double> grad_in) {
  const int k = s.kernel;
  std::fill(grad_in.begin(), grad_in.end(), 0.0);
  for (int oc = 0; oc < s.out_c; ++oc)
    for (int oy = 0; oy < s.out_h; ++oy)
      for (int ox = 0; ox < s.out_w; ++ox) {
        const double g = grad_out[(oc * s.out_h + oy) * s.out_w + ox];
        for (int ic = 0; ic < s.in_c; ++ic)
          for (int ky = 0; ky < k; ++ky) {
            const int iy = oy * s.stride + ky - s.pad_top;
            if (iy < 0 || iy >= s.in_h) continue;
            for (int kx = 0; kx < k; ++kx) {
              const int ix = ox * s.stride + kx - s.pad_left;
              if (ix < 0 || ix >= s.in_w) continue;
              grad_in[(ic * s.in_h + iy) * s.in_w + ix] += weight[((oc * s.in_c + ic) * k + ky) * k + kx] * g;
            }
          }
      }
}

void conv2d_backward_params(const ConvShape& s, std::span<const double> in, std::span<const double> grad_out,
                            std::span<double> grad_weight, std::span<double> grad_bias) {
  const int k = s.kernel;
  for (int oc = 0; oc < s.out_c; ++oc) {
    double gb = 0.0;
    for (int i = 0; i < s.out_h * s.out_w; ++i) gb += grad_out[oc * s.out_h * s.out_w + i];
    grad_bias[oc] += gb;
    for (int ic = 0; ic < s.in_c; ++ic)
      for (int ky = 0; ky < k; ++ky)
        for (int kx = 0; kx < k; ++kx) {
          double acc = 0.0;
          for (int oy = 0; oy < s.out_h; ++oy) {
            const int iy = oy * s.stride + ky - s.pad_top;
            if (iy < 0 || iy >= s.in_h) continue;
            for (int ox = 0; ox < s.out_w; ++ox) {
              const int ix = ox * s.stride + kx - s.pad_left;
              if (ix < 0 || ix >= s.in_w) continue;
              acc += grad_out[(oc * s.out_h + oy) * s.out_w + ox] * in[(ic * s.in_h + iy) * s.in_w + ix];
            }
          }
          grad_weight[((oc * s.in_c + ic) * k + ky) * k + kx] += acc;
        }
  }
}

void linear_forward(int n_in, int n_out, std::span<const double> x, std::span<const double> weight,
                    std::span<const double> bias, std::span<double> y) {
  for (int o = 0; o < n_out; ++o) {
    const double* w = weight.data() + static_cast<std::size_t>(o) * n_in;
    double acc = bias[o];
    for (int i = 0; i < n_in; ++i) acc += w[i] * x[i];
    y[o] = acc;
  }
}

void linear_backward_input(int n_in, int n_out, std::span<const double> weight, std::span<const double> grad_y,
                           std::span<double> grad_x) {
  std::fill(grad_x.begin(), grad_x.end(), 0.0);
  for (int o = 0; o < n_out; ++o) {
    const double g = grad_y[o];
    const double* w = weight.data() + static_cast<std::size_t>(o) * n_in;
    for (int i = 0; i < n_in; ++i) grad_x[i] += w[i] * g;
  }
}

void linear_backward_params(int n_in, int n_out, std::span<const double> x, std::span<const double> grad_y,
                            std::span<double> grad_weight, std::span<double> grad_bias) {
  for (int o = 0; o < n_out; ++o) {
    const double g = grad_y[o];
    grad_bias[o] += g;
    double* w = grad_weight.data() + static_cast<std::size_t>(o) * n_in;
    for (int i = 0; i < n_in; ++i) w[i] += g * x[i];
  }
}

}  // namespace kernels::serial

}  // namespace hald
