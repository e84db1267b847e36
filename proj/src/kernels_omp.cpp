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

#include <omp.h>

#include "hald/kernels.hpp"

namespace hald::kernels {

namespace omp {

void conv2d_forward(const ConvShape& s, std::span<const double> in, std::span<const double> weight,
                    std::span<const double> bias, std::span<double> out) {
  const int k = s.kernel;
#pragma omp parallel for collapse(2) schedule(static)
  for (int oc = 0; oc < s.out_c; ++oc)
    for (int oy = 0; oy < s.out_h; ++oy)
      for (int ox = 0; ox < s.out_w; ++ox) {
        double acc = bias[oc];
        for (int ic = 0; ic < s.in_c; ++ic)
          for (int ky = 0; ky < k; ++ky) {
            const int iy = oy * s.stride + ky - s.pad_top;
            if (iy < 0 || iy >= s.in_h) continue;
            const double* w = weight.data() + ((oc * s.in_c + ic) * k + ky) * k;
            const double* row = in.data() + (ic * s.in_h + iy) * s.in_w;
            for (int kx = 0; kx < k; ++kx) {
              const int ix = ox * s.stride + kx - s.pad_left;
              if (ix < 0 || ix >= s.in_w) continue;
              acc += w[kx] * row[ix];
            }
          }
        out[(oc * s.out_h + oy) * s.out_w + ox] = acc;
      }
}

// Each thread owns a set of input channels, so grad_in elements never race and
// keep the (oc, oy, ox, ky, kx) accumulation order of the serial scatter.
void conv2d_backward_input(const ConvShape& s, std::span<const double> weight, std::span<const double> grad_out,
                           std::span<double> grad_in) {
  const int k = s.kernel;
#pragma omp parallel for schedule(static)
  for (int ic = 0; ic < s.in_c; ++ic) {
    double* gin = grad_in.data() + static_cast<std::size_t>(ic) * s.in_h * s.in_w;
    std::fill(gin, gin + s.in_h * s.in_w, 0.0);
    for (int oc = 0; oc < s.out_c; ++oc) {
      const double* w = weight.data() + (oc * s.in_c + ic) * k * k;
      for (int oy = 0; oy < s.out_h; ++oy)
        for (int ox = 0; ox < s.out_w; ++ox) {
          const double g = grad_out[(oc * s.out_h + oy) * s.out_w + ox];
          for (int ky = 0; ky < k; ++ky) {
            const int iy = oy * s.stride + ky - s.pad_top;
            if (iy < 0 || iy >= s.in_h) continue;
            for (int kx = 0; kx < k; ++kx) {
              const int ix = ox * s.stride + kx - s.pad_left;
              if (ix < 0 || ix >= s.in_w) continue;
              gin[iy * s.in_w + ix] += w[ky * k + kx] * g;
            }
          }
        }
    }
  }
}

void conv2d_backward_params(const ConvShape& s, std::span<const double> in, std::span<const double> grad_out,
                            std::span<double> grad_weight, std::span<double> grad_bias) {
  const int k = s.kernel;
#pragma omp parallel for schedule(static)
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
            const double* g = grad_out.data() + (oc * s.out_h + oy) * s.out_w;
            const double* row = in.data() + (ic * s.in_h + iy) * s.in_w;
            for (int ox = 0; ox < s.out_w; ++ox) {
              const int ix = ox * s.stride + kx - s.pad_left;
              if (ix < 0 || ix >= s.in_w) continue;
              acc += g[ox] * row[ix];
            }
          }
          grad_weight[((oc * s.in_c + ic) * k + ky) * k + kx] += acc;
        }
  }
}

void linear_forward(int n_in, int n_out, std::span<const double> x, std::span<const double> weight,
                    std::span<const double> bias, std::span<double> y) {
#pragma omp parallel for schedule(static)
  for (int o = 0; o < n_out; ++o) {
    const double* w = weight.data() + static_cast<std::size_t>(o) * n_in;
    double acc = bias[o];
    for (int i = 0; i < n_in; ++i) acc += w[i] * x[i];
    y[o] = acc;
  }
}

void linear_backward_input(int n_in, int n_out, std::span<const double> weight, std::span<const double> grad_y,
                           std::span<double> grad_x) {
  constexpr int kBlock = 512;
  const int blocks = (n_in + kBlock - 1) / kBlock;
#pragma omp parallel for schedule(static)
  for (int b = 0; b < blocks; ++b) {
    const int lo = b * kBlock;
    const int hi = std::min(n_in, lo + kBlock);
    std::fill(grad_x.begin() + lo, grad_x.begin() + hi, 0.0);
    for (int o = 0; o < n_out; ++o) {
      const double g = grad_y[o];
      const double* w = weight.data() + static_cast<std::size_t>(o) * n_in;
      for (int i = lo; i < hi; ++i) grad_x[i] += w[i] * g;
    }
  }
}

void linear_backward_params(int n_in, int n_out, std::span<const double> x, std::span<const double> grad_y,
                            std::span<double> grad_weight, std::span<double> grad_bias) {
#pragma omp parallel for schedule(static)
  for (int o = 0; o < n_out; ++o) {
    const double g = grad_y[o];
    grad_bias[o] += g;
    double* w = grad_weight.data() + static_cast<std::size_t>(o) * n_in;
    for (int i = 0; i < n_in; ++i) w[i] += g * x[i];
  }
}

}  // namespace omp

void set_threads(int n) { omp_set_num_threads(std::max(1, n)); }

int max_threads() { return omp_get_max_threads(); }

}  // namespace hald::kernels
