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

#include <doctest.h>

#include <omp.h>

#include "hald/kernels.hpp"
#include "test_util.hpp"

using namespace hald;

namespace {

/// Direct nested-loop convolution with explicit zero padding.
std::vector<double> conv_oracle(const ConvShape& s, const std::vector<double>& in, const std::vector<double>& w,
                                const std::vector<double>& b) {
  std::vector<double> out(s.out_size());
  for (int o = 0; o < s.out_c; ++o)
    for (int y = 0; y < s.out_h; ++y)
      for (int x = 0; x < s.out_w; ++x) {
        double acc = b[o];
        for (int c = 0; c < s.in_c; ++c)
          for (int ky = 0; ky < s.kernel; ++ky)
            for (int kx = 0; kx < s.kernel; ++kx) {
              const int iy = y * s.stride + ky - s.pad_top, ix = x * s.stride + kx - s.pad_left;
              if (iy < 0 || iy >= s.in_h || ix < 0 || ix >= s.in_w) continue;
              acc += w[((o * s.in_c + c) * s.kernel + ky) * s.kernel + kx] * in[(c * s.in_h + iy) * s.in_w + ix];
            }
        out[(o * s.out_h + y) * s.out_w + x] = acc;
      }
  return out;
}

ConvShape random_shape(Rng& rng) {
  const int in_c = 1 + static_cast<int>(rng.below(4));
  const int h = 3 + static_cast<int>(rng.below(12)), w = 3 + static_cast<int>(rng.below(12));
  const int out_c = 1 + static_cast<int>(rng.below(5));
  const int k = rng.bernoulli(0.5) ? 3 : 1 + 2 * static_cast<int>(rng.below(3));
  const int stride = 1 + static_cast<int>(rng.below(3));
  return ConvShape::same(in_c, h, w, out_c, k, stride);
}

double dot(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

}  // namespace

TEST_SUITE("kernels") {
  TEST_CASE("'same' geometry") {
    const ConvShape s = ConvShape::same(1, 64, 160, 8, 3, 2);
    CHECK(s.out_h == 32);
    CHECK(s.out_w == 80);
    CHECK(s.pad_top == 0);
    const ConvShape t = ConvShape::same(1, 7, 7, 1, 3, 1);
    CHECK(t.out_h == 7);
    CHECK(t.pad_top == 1);
    const ConvShape u = ConvShape::same(1, 7, 7, 1, 3, 2);
    CHECK(u.out_h == 4);
    CHECK(u.pad_top == 1);
  }

  TEST_CASE("convolution matches the direct oracle") {
    Rng rng(1);
    for (int i = 0; i < 60; ++i) {
      const ConvShape s = random_shape(rng);
      const auto in = test::random_vector(rng, s.in_size());
      const auto w = test::random_vector(rng, s.weight_size());
      const auto b = test::random_vector(rng, s.out_c);
      std::vector<double> out(s.out_size());
      kernels::serial::conv2d_forward(s, in, w, b, out);
      const auto want = conv_oracle(s, in, w, b);
      for (std::size_t k = 0; k < out.size(); ++k) CHECK(out[k] == doctest::Approx(want[k]).epsilon(1e-13));
    }
  }

  TEST_CASE("backward kernels are the adjoints of forward") {
    Rng rng(2);
    for (int i = 0; i < 60; ++i) {
      const ConvShape s = random_shape(rng);
      const auto in = test::random_vector(rng, s.in_size());
      const auto w = test::random_vector(rng, s.weight_size());
      const std::vector<double> zero_b(s.out_c, 0.0);
      const auto g = test::random_vector(rng, s.out_size());
      std::vector<double> out(s.out_size()), gin(s.in_size()), gw(s.weight_size(), 0.0), gb(s.out_c, 0.0);
      kernels::serial::conv2d_forward(s, in, w, zero_b, out);
      kernels::serial::conv2d_backward_input(s, w, g, gin);
      kernels::serial::conv2d_backward_params(s, in, g, gw, gb);
      CHECK(dot(g, out) == doctest::Approx(dot(gin, in)).epsilon(1e-12));
      CHECK(dot(g, out) == doctest::Approx(dot(gw, w)).epsilon(1e-12));
      double gsum = 0.0;
      for (double v : g) gsum += v;
      double bsum = 0.0;
      for (double v : gb) bsum += v;
      CHECK(bsum == doctest::Approx(gsum).epsilon(1e-12));
    }
  }

  TEST_CASE("linear layer closed forms") {
    Rng rng(3);
    const int n_in = 7, n_out = 5;
    const auto x = test::random_vector(rng, n_in);
    const auto w = test::random_vector(rng, n_in * n_out);
    const auto b = test::random_vector(rng, n_out);
    const auto g = test::random_vector(rng, n_out);
    std::vector<double> y(n_out), gx(n_in), gw(n_in * n_out, 0.0), gb(n_out, 0.0);
    kernels::serial::linear_forward(n_in, n_out, x, w, b, y);
    for (int o = 0; o < n_out; ++o) {
      double acc = b[o];
      for (int i = 0; i < n_in; ++i) acc += w[o * n_in + i] * x[i];
      CHECK(y[o] == doctest::Approx(acc).epsilon(1e-14));
    }
    kernels::serial::linear_backward_params(n_in, n_out, x, g, gw, gb);
    kernels::serial::linear_backward_input(n_in, n_out, w, g, gx);
    for (int o = 0; o < n_out; ++o) {
      CHECK(gb[o] == g[o]);
      for (int i = 0; i < n_in; ++i) CHECK(gw[o * n_in + i] == g[o] * x[i]);
    }
    for (int i = 0; i < n_in; ++i) {
      double acc = 0.0;
      for (int o = 0; o < n_out; ++o) acc += w[o * n_in + i] * g[o];
      CHECK(gx[i] == doctest::Approx(acc).epsilon(1e-14));
    }
  }

  TEST_CASE("OpenMP kernels are bit-identical to the serial reference at any thread count") {
    Rng rng(4);
    const int saved = omp_get_max_threads();
    for (int threads : {1, 2, 3, 4}) {
      kernels::set_threads(threads);
      for (int i = 0; i < 20; ++i) {
        const ConvShape s = random_shape(rng);
        const auto in = test::random_vector(rng, s.in_size());
        const auto w = test::random_vector(rng, s.weight_size());
        const auto b = test::random_vector(rng, s.out_c);
        const auto g = test::random_vector(rng, s.out_size());
        std::vector<double> o1(s.out_size()), o2(s.out_size());
        kernels::serial::conv2d_forward(s, in, w, b, o1);
        kernels::omp::conv2d_forward(s, in, w, b, o2);
        CHECK(o1 == o2);
        std::vector<double> i1(s.in_size(), 7.0), i2(s.in_size(), -3.0);
        kernels::serial::conv2d_backward_input(s, w, g, i1);
        kernels::omp::conv2d_backward_input(s, w, g, i2);
        CHECK(i1 == i2);
        auto w1 = test::random_vector(rng, s.weight_size()), b1 = test::random_vector(rng, s.out_c);
        auto w2 = w1, b2 = b1;
        kernels::serial::conv2d_backward_params(s, in, g, w1, b1);
        kernels::omp::conv2d_backward_params(s, in, g, w2, b2);
        CHECK(w1 == w2);
        CHECK(b1 == b2);

        const int n_in = 1 + static_cast<int>(rng.below(1500)), n_out = 1 + static_cast<int>(rng.below(40));
        const auto x = test::random_vector(rng, n_in);
        const auto lw = test::random_vector(rng, static_cast<std::size_t>(n_in) * n_out);
        const auto lb = test::random_vector(rng, n_out);
        const auto gy = test::random_vector(rng, n_out);
        std::vector<double> y1(n_out), y2(n_out);
        kernels::serial::linear_forward(n_in, n_out, x, lw, lb, y1);
        kernels::omp::linear_forward(n_in, n_out, x, lw, lb, y2);
        CHECK(y1 == y2);
        std::vector<double> gx1(n_in), gx2(n_in);
        kernels::serial::linear_backward_input(n_in, n_out, lw, gy, gx1);
        kernels::omp::linear_backward_input(n_in, n_out, lw, gy, gx2);
        CHECK(gx1 == gx2);
        auto gw1 = test::random_vector(rng, lw.size()), gb1 = test::random_vector(rng, n_out);
        auto gw2 = gw1, gb2 = gb1;
        kernels::serial::linear_backward_params(n_in, n_out, x, gy, gw1, gb1);
        kernels::omp::linear_backward_params(n_in, n_out, x, gy, gw2, gb2);
        CHECK(gw1 == gw2);
        CHECK(gb1 == gb2);
      }
    }
    kernels::set_threads(saved);
  }
}
