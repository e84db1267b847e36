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

#include "hald/ablation.hpp"

#include <cstdio>
#include <stdexcept>

#include "hald/svg.hpp"

namespace hald {

namespace {

struct Variant {
  std::string name;
  ModelConfig model;
  AssignMode assign;
};

AblationRow to_row(std::string name, const EvalReport& r) {
  return {std::move(name), r.f1, r.accuracy.accuracy(), r.mean_loc_error, r.loc_points};
}

AblationRow run_variant(const Variant& v, const std::vector<Scene>& train_set, const std::vector<Scene>& test_set,
                        const AblationConfig& config) {
  TrainConfig tc = config.train;
  tc.data.assign = v.assign;
  EvalOptions eo = config.eval;
  eo.data.assign = v.assign;
  try {
    const TrainResult result = train(train_set, v.model, tc);
    return to_row(v.name, evaluate(result.model, test_set, eo));
  } catch (const std::exception& e) {
    throw std::runtime_error("variant '" + v.name + "': " + e.what());
  }
}

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.9g", v);
  return buf;
}

}  // namespace

AblationKind parse_ablation_kind(std::string_view name) {
  if (name == "anchors") return AblationKind::anchors;
  if (name == "decode") return AblationKind::decode;
  if (name == "head") return AblationKind::head;
  if (name == "dims") return AblationKind::dims;
  if (name == "pool") return AblationKind::pool;
  throw std::invalid_argument("unknown ablation kind '" + std::string(name) +
                              "' (expected anchors, decode, head, dims or pool)");
}

std::string_view ablation_kind_name(AblationKind kind) {
  switch (kind) {
    case AblationKind::anchors: return "anchors";
    case AblationKind::decode: return "decode";
    case AblationKind::head: return "head";
    case AblationKind::dims: return "dims";
    case AblationKind::pool: return "pool";
  }
  return "?";
}

const AblationRow& AblationReport::row(std::string_view variant) const {
  for (const AblationRow& r : rows)
    if (r.variant == variant) return r;
  throw std::out_of_range("no ablation variant '" + std::string(variant) + "'");
}

std::string AblationReport::to_csv() const {
  std::string s = "kind,variant,f1,precision,recall,tp,fp,fn,accuracy,loc_error,loc_points\n";
  for (const AblationRow& r : rows)
    s += std::string(ablation_kind_name(kind)) + "," + r.variant + "," + fmt(r.f1.f1) + "," + fmt(r.f1.precision) +
         "," + fmt(r.f1.recall) + "," + std::to_string(r.f1.tp) + "," + std::to_string(r.f1.fp) + "," +
         std::to_string(r.f1.fn) + "," + fmt(r.accuracy) + "," + fmt(r.loc_error) + "," +
         std::to_string(r.loc_points) + "\n";
  return s;
}

std::string AblationReport::to_svg() const {
  std::vector<std::string> labels;
  BarSeries f1{"F1", {}}, acc{"accuracy", {}}, loc{"loc error x10", {}};
  for (const AblationRow& r : rows) {
    labels.push_back(r.variant);
    f1.values.push_back(r.f1.f1);
    acc.values.push_back(r.accuracy);
    loc.values.push_back(r.loc_error * 10.0);
  }
  const std::vector<BarSeries> series{f1, acc, loc};
  return svg_bar_chart("ablation: " + std::string(ablation_kind_name(kind)), labels, series);
}

AblationReport run_ablation(AblationKind kind, const AblationConfig& config) {
  if (config.train_scenes <= 0 || config.test_scenes <= 0) throw std::invalid_argument("scene counts must be positive");
  config.train.validate();
  const std::vector<Scene> train_set = generate_scenes(config.train_seed, config.train_scenes, config.generator);
  const std::vector<Scene> test_set = generate_scenes(config.test_seed, config.test_scenes, config.generator);

  AblationReport report;
  report.kind = kind;
  const AssignMode assign = config.train.data.assign;
  std::vector<Variant> variants;
  switch (kind) {
    case AblationKind::anchors: {
      ModelConfig rows = config.model, cols = config.model, hybrid = config.model;
      rows.system = AnchorSystem::preset("desk-rows");
      cols.system = AnchorSystem::preset("desk-cols");
      hybrid.system = AnchorSystem::preset("desk");
      variants = {{"rows", rows, AssignMode::rows_only},
                  {"columns", cols, AssignMode::columns_only},
                  {"hybrid", hybrid, assign}};
      break;
    }
    case AblationKind::decode: {
      TrainConfig tc = config.train;
      const TrainResult result = train(train_set, config.model, tc);
      for (DecodeMode mode : {DecodeMode::expectation, DecodeMode::argmax}) {
        EvalOptions eo = config.eval;
        eo.data.assign = assign;
        eo.decode = mode;
        report.rows.push_back(to_row(std::string(decode_mode_name(mode)), evaluate(result.model, test_set, eo)));
      }
      return report;
    }
    case AblationKind::head: {
      ModelConfig cls = config.model, reg = config.model;
      cls.head = HeadKind::classification;
      reg.head = HeadKind::regression;
      variants = {{"classification", cls, assign}, {"regression", reg, assign}};
      break;
    }
    case AblationKind::dims: {
      if (config.dims.empty()) throw std::invalid_argument("dims ablation needs at least one value");
      for (int d : config.dims) {
        ModelConfig m = config.model;
        (config.dims_axis == AnchorKind::row ? m.system.row_dim : m.system.col_dim) = d;
        variants.push_back({(config.dims_axis == AnchorKind::row ? "row_dim=" : "col_dim=") + std::to_string(d), m,
                            assign});
      }
      break;
    }
    case AblationKind::pool: {
      ModelConfig flat = config.model, gap = config.model;
      flat.pooling = Pooling::flatten;
      gap.pooling = Pooling::gap;
      variants = {{"flatten", flat, assign}, {"gap", gap, assign}};
      break;
    }
  }
  for (const Variant& v : variants) report.rows.push_back(run_variant(v, train_set, test_set, config));
  return report;
}

}  // namespace hald
