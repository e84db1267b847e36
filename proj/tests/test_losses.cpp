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

#include <cmath>
#include <functional>

#include "hald/losses.hpp"
#include "gradcheck.hpp"

using namespace hald;
using namespace hald::test;

TEST_SUITE("losses") {
  TEST_CASE("softmax") {
    const std::vector<double> z{0.0, 0.0};
    CHECK(softmax(z) == std::vector<double>{0.5, 0.5});
    const std::vector<double> a{1.0, -2.0, 0.5}, b{101.0, 98.0, 100.5};
    const auto pa = softmax(a), pb = softmax(b);
    for (int k = 0; k < 3; ++k) CHECK(pa[k] == doctest::Approx(pb[k]).epsilon(1e-14));
    const std::vector<double> big{1000.0, 0.0};
    const auto p = softmax(big);
    CHECK(p[0] == 1.0);
    CHECK(std::isfinite(p[1]));
    const std::vector<double> bad{std::nan(""), 0.0};
    CHECK_THROWS_AS(softmax(bad), std::invalid_argument);
    Rng rng(1);
    for (int i = 0; i < 100; ++i) {
      const auto v = softmax(test::random_vector(rng, 1 + rng.below(20), 30.0));
      double s = 0.0;
      for (double x : v) s += x;
      CHECK(std::abs(s - 1.0) < 1e-12);
    }
  }

  TEST_CASE("expectation") {
    std::vector<double> onehot(6, 0.0);
    onehot[3] = 50.0;
    CHECK(expectation(onehot) == doctest::Approx(3.0).epsilon(1e-6));
    CHECK(expectation(std::vector<double>(4, 0.0)) == doctest::Approx(1.5));
    std::vector<double> bimodal(7, -50.0);
    bimodal[1] = bimodal[5] = 0.0;
    CHECK(expectation(bimodal) == doctest::Approx(3.0).epsilon(1e-12));
  }

  TEST_CASE("smooth L1") {
    CHECK(smooth_l1(0.5) == 0.125);
    CHECK(smooth_l1(-2.0) == 1.5);
    CHECK(smooth_l1_grad(0.5) == 0.5);
    CHECK(smooth_l1_grad(-3.0) == -1.0);
  }

  TEST_CASE("cls_loss examples") {
    LogitBlock b(1, 2, 5);
    Grid<int> cls(1, 2, 2), mask(1, 2, 1);
    b.at(0, 0)[2] = 100.0;
    b.at(0, 1)[2] = 100.0;
    CHECK(cls_loss(b, cls, mask).value < 1e-30);
    const LogitBlock u(1, 2, 5);
    CHECK(cls_loss(u, cls, mask).value == doctest::Approx(std::log(5.0)).epsilon(1e-14));
    Grid<int> bad(1, 2, 7);
    CHECK_THROWS(cls_loss(u, bad, mask));
  }

  TEST_CASE("exp_loss examples") {
    LogitBlock b(1, 1, 2);
    Grid<int> cls(1, 1, 0), mask(1, 1, 1);
    CHECK(exp_loss(b, cls, mask).value == doctest::Approx(0.125).epsilon(1e-14));
    LogitBlock c(1, 1, 5);
    CHECK(exp_loss(c, cls, mask).value == doctest::Approx(1.5).epsilon(1e-14));
    LogitBlock d(1, 1, 3);
    Grid<int> one(1, 1, 1);
    CHECK(exp_loss(d, one, mask).value == doctest::Approx(0.0).epsilon(1e-14));
  }

  TEST_CASE("ext_loss examples") {
    LogitBlock b(1, 3, 2);
    Grid<int> ext(1, 3, 0);
    ext(0, 1) = 1;
    CHECK(ext_loss(b, ext).value == doctest::Approx(std::log(2.0)).epsilon(1e-14));
    for (int a = 0; a < 3; ++a) b.at(0, a)[ext(0, a) == 1 ? kPresent : kAbsent] = 100.0;
    CHECK(ext_loss(b, ext).value < 1e-30);
  }

  TEST_CASE("sim_loss and shp_loss examples") {
    LogitBlock s(1, 3, 4);
    CHECK(sim_loss(s).value == 0.0);
    LogitBlock t(1, 2, 4);
    t.at(0, 1)[2] = 1.0;
    CHECK(sim_loss(t).value == doctest::Approx(1.0));
    LogitBlock p(1, 3, 4, -60.0);
    p.at(0, 0)[0] = p.at(0, 1)[0] = p.at(0, 2)[1] = 0.0;
    CHECK(shp_loss(p).value == doctest::Approx(1.0).epsilon(1e-12));
    LogitBlock line(1, 4, 5, -60.0);
    for (int a = 0; a < 4; ++a) line.at(0, a)[a] = 0.0;
    CHECK(shp_loss(line).value < 1e-12);
    CHECK_THROWS(sim_loss(LogitBlock(1, 1, 3)));
    CHECK_THROWS(shp_loss(LogitBlock(1, 2, 3)));
  }

  TEST_CASE("gradients match central differences") {
    Rng rng(2024);
    double worst_cls = 0, worst_exp = 0, worst_ext = 0, worst_sim = 0, worst_shp = 0;
    int done = 0;
    while (done < 120) {
      Instance in = random_instance(rng, 3);
      if (near_exp_kink(in) || near_sim_kink(in.logits) || near_shp_kink(in.logits)) continue;
      ++done;
      auto x = in.logits.values;
      worst_cls = std::max(worst_cls, fd_max_rel_error(x, cls_loss(in.logits, in.cls, in.ext).grad, [&](const auto& v) {
        return cls_loss(with_values(in.logits, v), in.cls, in.ext).value;
      }));
      worst_exp = std::max(worst_exp, fd_max_rel_error(x, exp_loss(in.logits, in.cls, in.ext).grad, [&](const auto& v) {
        return exp_loss(with_values(in.logits, v), in.cls, in.ext).value;
      }));
      worst_sim = std::max(worst_sim, fd_max_rel_error(x, sim_loss(in.logits).grad, [&](const auto& v) {
        return sim_loss(with_values(in.logits, v)).value;
      }));
      worst_shp = std::max(worst_shp, fd_max_rel_error(x, shp_loss(in.logits).grad, [&](const auto& v) {
        return shp_loss(with_values(in.logits, v)).value;
      }));
      auto e = in.exist.values;
      worst_ext = std::max(worst_ext, fd_max_rel_error(e, ext_loss(in.exist, in.ext).grad, [&](const auto& v) {
        return ext_loss(with_values(in.exist, v), in.ext).value;
      }));
    }
    CHECK(worst_cls < 1e-6);
    CHECK(worst_exp < 1e-6);
    CHECK(worst_ext < 1e-6);
    CHECK(worst_sim < 1e-6);
    CHECK(worst_shp < 1e-6);
  }

  TEST_CASE("total loss is the weighted sum and its gradient checks out") {
    Rng rng(77);
    int done = 0;
    double worst = 0.0;
    while (done < 100) {
      Instance r = random_instance(rng, 3), c = random_instance(rng, 3);
      if (near_exp_kink(r) || near_exp_kink(c) || near_sim_kink(r.logits) || near_sim_kink(c.logits) ||
          near_shp_kink(r.logits) || near_shp_kink(c.logits))
        continue;
      ++done;
      const PredictionBundle b{r.logits, c.logits, r.exist, c.exist};
      const ClassTarget t{r.cls, c.cls, r.ext, c.ext};
      LossWeights w;
      w.w_sim = 0.01 * static_cast<double>(done % 3);
      w.w_shp = 0.02 * static_cast<double>(done % 2);
      const TotalLoss tl = total_loss(b, t, w);
      const double cls = cls_loss(r.logits, r.cls, r.ext).value + cls_loss(c.logits, c.cls, c.ext).value;
      const double ex = exp_loss(r.logits, r.cls, r.ext).value + exp_loss(c.logits, c.cls, c.ext).value;
      const double ext = ext_loss(r.exist, r.ext).value + ext_loss(c.exist, c.ext).value;
      const double sim = sim_loss(r.logits).value + sim_loss(c.logits).value;
      const double shp = shp_loss(r.logits).value + shp_loss(c.logits).value;
      CHECK(tl.parts.cls == cls);
      CHECK(tl.parts.exp == ex);
      CHECK(tl.parts.ext == ext);
      CHECK(tl.parts.total == cls + w.alpha * ex + w.beta * ext + w.w_sim * sim + w.w_shp * shp);

      std::vector<double> flat, grad;
      for (const LogitBlock* blk : {&b.loc_rows, &b.loc_cols, &b.exist_rows, &b.exist_cols})
        flat.insert(flat.end(), blk->values.begin(), blk->values.end());
      for (const LogitBlock* blk : {&tl.grad.loc_rows, &tl.grad.loc_cols, &tl.grad.exist_rows, &tl.grad.exist_cols})
        grad.insert(grad.end(), blk->values.begin(), blk->values.end());
      worst = std::max(worst, fd_max_rel_error(flat, grad, [&](const std::vector<double>& v) {
        PredictionBundle p = b;
        std::size_t off = 0;
        for (LogitBlock* blk : {&p.loc_rows, &p.loc_cols, &p.exist_rows, &p.exist_cols}) {
          std::copy(v.begin() + off, v.begin() + off + blk->size(), blk->values.begin());
          off += blk->size();
        }
        return total_loss(p, t, w).parts.total;
      }));
    }
    CHECK(worst < 1e-6);
  }

  TEST_CASE("alpha = beta = 0 leaves only the classification loss") {
    Rng rng(4);
    const Instance r = random_instance(rng, 3);
    const PredictionBundle b{r.logits, LogitBlock(0, 0, 2), r.exist, LogitBlock(0, 0, 2)};
    const ClassTarget t{r.cls, Grid<int>(0, 0), r.ext, Grid<int>(0, 0)};
    LossWeights w{0.0, 0.0, 0.0, 0.0};
    CHECK(total_loss(b, t, w).parts.total == cls_loss(r.logits, r.cls, r.ext).value);
  }

  TEST_CASE("shift invariance and masking") {
    Rng rng(8);
    for (int i = 0; i < 50; ++i) {
      Instance in = random_instance(rng, 3);
      LogitBlock shifted = in.logits;
      const double c = rng.uniform(-5.0, 5.0);
      for (double& v : shifted.at(0, 0)) v += c;
      CHECK(cls_loss(shifted, in.cls, in.ext).value == doctest::Approx(cls_loss(in.logits, in.cls, in.ext).value));
      CHECK(exp_loss(shifted, in.cls, in.ext).value == doctest::Approx(exp_loss(in.logits, in.cls, in.ext).value));
      CHECK(shp_loss(shifted).value == doctest::Approx(shp_loss(in.logits).value));

      const double full = cls_loss(in.logits, in.cls, in.ext).value;
      long present = 0;
      for (int v : in.ext.data) present += v;
      Grid<int> fewer = in.ext;
      for (std::size_t k = 1; k < fewer.data.size(); ++k)
        if (rng.bernoulli(0.5)) fewer.data[k] = 0;
      long kept = 0;
      for (int v : fewer.data) kept += v;
      const double part = cls_loss(in.logits, in.cls, fewer).value;
      CHECK(part * static_cast<double>(kept) <= full * static_cast<double>(present) + 1e-12);
    }
  }

  TEST_CASE("exp_loss descends along its negative gradient") {
    Rng rng(9);
    for (int i = 0; i < 100; ++i) {
      Instance in = random_instance(rng, 1);
      const LossValue l = exp_loss(in.logits, in.cls, in.ext);
      double norm = 0.0;
      for (double g : l.grad) norm += g * g;
      if (norm < 1e-20) continue;
      LogitBlock step = in.logits;
      for (std::size_t k = 0; k < step.values.size(); ++k) step.values[k] -= 1e-4 * l.grad[k];
      CHECK(exp_loss(step, in.cls, in.ext).value < l.value);
    }
  }

  TEST_CASE("losses are non-negative and finite") {
    Rng rng(10);
    for (int i = 0; i < 100; ++i) {
      Instance in = random_instance(rng, 3);
      for (double v : {cls_loss(in.logits, in.cls, in.ext).value, exp_loss(in.logits, in.cls, in.ext).value,
                       ext_loss(in.exist, in.ext).value, sim_loss(in.logits).value, shp_loss(in.logits).value}) {
        CHECK(v >= 0.0);
        CHECK(std::isfinite(v));
      }
    }
  }

  TEST_CASE("coordinate loss gradient") {
    Rng rng(12);
    double worst = 0.0;
    for (int i = 0; i < 100; ++i) {
      const int lanes = 1 + static_cast<int>(rng.below(3)), anchors = 1 + static_cast<int>(rng.below(6));
      const int dim = 2 + static_cast<int>(rng.below(60));
      LogitBlock c(lanes, anchors, 1);
      c.values = test::random_vector(rng, c.size(), dim);
      Grid<double> t(lanes, anchors, -1.0);
      Grid<int> m(lanes, anchors, 0);
      bool kink = false;
      for (std::size_t k = 0; k < t.data.size(); ++k) {
        if (k == 0 || rng.bernoulli(0.6)) {
          t.data[k] = rng.uniform();
          m.data[k] = 1;
          if (std::abs(std::abs(c.values[k] - (t.data[k] * dim - 0.5)) - 1.0) < 1e-3) kink = true;
        }
      }
      if (kink) continue;
      auto x = c.values;
      worst = std::max(worst, fd_max_rel_error(x, coord_loss(c, t, m, dim).grad, [&](const auto& v) {
        return coord_loss(with_values(c, v), t, m, dim).value;
      }));
    }
    CHECK(worst < 1e-6);
  }
}
