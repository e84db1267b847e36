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

#include <benchmark/benchmark.h>

#include <vector>

#include "hald/kernels.hpp"
#include "hald/rng.hpp"

namespace {

using namespace hald;

// Desk backbone stages: (in_c, h, w, out_c). Arguments are (stage, threads).
constexpr int kStages[3][4] = {{1, 64, 160, 8}, {8, 32, 80, 16}, {16, 16, 40, 32}};

std::vector<double> filled(std::size_t n, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<double> v(n);
  for (double& x : v) x = rng.uniform(-1.0, 1.0);
  return v;
}

struct ConvData {
  ConvShape shape;
  std::vector<double> in, weight, bias, out, grad_in, grad_w, grad_b;

  explicit ConvData(int stage) {
    const auto& s = kStages[stage];
    shape = ConvShape::same(s[0], s[1], s[2], s[3], 3, 2);
    in = filled(shape.in_size(), 1);
    weight = filled(shape.weight_size(), 2);
    bias = filled(static_cast<std::size_t>(shape.out_c), 3);
    out = filled(shape.out_size(), 4);
    grad_in.resize(shape.in_size());
    grad_w.resize(shape.weight_size());
    grad_b.resize(static_cast<std::size_t>(shape.out_c));
  }
};

template <bool Omp>
void BM_ConvForward(benchmark::State& state) {
  ConvData d(static_cast<int>(state.range(0)));
  kernels::set_threads(static_cast<int>(state.range(1)));
  for (auto _ : state) {
    if constexpr (Omp)
      kernels::omp::conv2d_forward(d.shape, d.in, d.weight, d.bias, d.out);
    else
      kernels::serial::conv2d_forward(d.shape, d.in, d.weight, d.bias, d.out);
    benchmark::DoNotOptimize(d.out.data());
  }
}

template <bool Omp>
void BM_ConvBackward(benchmark::State& state) {
  ConvData d(static_cast<int>(state.range(0)));
  kernels::set_threads(static_cast<int>(state.range(1)));
  for (auto _ : state) {
    if constexpr (Omp) {
      kernels::omp::conv2d_backward_input(d.shape, d.weight, d.out, d.grad_in);
      kernels::omp::conv2d_backward_params(d.shape, d.in, d.out, d.grad_w, d.grad_b);
    } else {
      kernels::serial::conv2d_backward_input(d.shape, d.weight, d.out, d.grad_in);
      kernels::serial::conv2d_backward_params(d.shape, d.in, d.out, d.grad_w, d.grad_b);
    }
    benchmark::DoNotOptimize(d.grad_w.data());
  }
}

template <bool Omp>
void BM_Linear(benchmark::State& state) {
  const int n_in = 5120, n_out = static_cast<int>(state.range(0));
  kernels::set_threads(static_cast<int>(state.range(1)));
  const auto x = filled(n_in, 5), w = filled(static_cast<std::size_t>(n_in) * n_out, 6),
             b = filled(n_out, 7), gy = filled(n_out, 8);
  std::vector<double> y(n_out), gx(n_in), gw(w.size()), gb(n_out);
  for (auto _ : state) {
    if constexpr (Omp) {
      kernels::omp::linear_forward(n_in, n_out, x, w, b, y);
      kernels::omp::linear_backward_input(n_in, n_out, w, gy, gx);
      kernels::omp::linear_backward_params(n_in, n_out, x, gy, gw, gb);
    } else {
      kernels::serial::linear_forward(n_in, n_out, x, w, b, y);
      kernels::serial::linear_backward_input(n_in, n_out, w, gy, gx);
      kernels::serial::linear_backward_params(n_in, n_out, x, gy, gw, gb);
    }
    benchmark::DoNotOptimize(gw.data());
  }
}

void conv_serial_args(benchmark::internal::Benchmark* b) {
  for (int stage = 0; stage < 3; ++stage) b->Args({stage, 1});
}

void conv_omp_args(benchmark::internal::Benchmark* b) {
  for (int stage = 0; stage < 3; ++stage)
    for (int t : {1, 2, 4}) b->Args({stage, t});
}

void linear_serial_args(benchmark::internal::Benchmark* b) { b->Args({256, 1}); }

void linear_omp_args(benchmark::internal::Benchmark* b) {
  for (int t : {1, 2, 4}) b->Args({256, t});
}

}  // namespace

BENCHMARK(BM_ConvForward<false>)->Name("conv_forward/serial")->Apply(conv_serial_args);
BENCHMARK(BM_ConvForward<true>)->Name("conv_forward/omp")->Apply(conv_omp_args);
BENCHMARK(BM_ConvBackward<false>)->Name("conv_backward/serial")->Apply(conv_serial_args);
BENCHMARK(BM_ConvBackward<true>)->Name("conv_backward/omp")->Apply(conv_omp_args);
BENCHMARK(BM_Linear<false>)->Name("linear/serial")->Apply(linear_serial_args);
BENCHMARK(BM_Linear<true>)->Name("linear/omp")->Apply(linear_omp_args);

BENCHMARK_MAIN();
