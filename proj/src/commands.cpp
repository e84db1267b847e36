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

#include "hald/commands.hpp"

#include <omp.h>

#include <CLI11.hpp>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <map>
#include <numbers>

#include "hald/ablation.hpp"
#include "hald/anchors.hpp"
#include "hald/digest.hpp"
#include "hald/evaluate.hpp"
#include "hald/kernels.hpp"
#include "hald/model_io.hpp"
#include "hald/svg.hpp"
#include "hald/train.hpp"

namespace hald {

namespace fs = std::filesystem;

namespace {

/// Writes files through a temporary name and removes everything it wrote
/// unless commit() is reached.
class OutputWriter {
 public:
  explicit OutputWriter(std::ostream& log) : log_(log) {}
  OutputWriter(const OutputWriter&) = delete;
  OutputWriter& operator=(const OutputWriter&) = delete;
  ~OutputWriter() {
    if (committed_) return;
    std::error_code ec;
    for (const fs::path& p : out_.files) fs::remove(p, ec);
  }

  void write(const fs::path& path, std::string_view bytes) {
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    fs::path tmp = path;
    tmp += ".partial";
    {
      std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
      if (!f) throw std::runtime_error("cannot open '" + path.string() + "' for writing");
      f.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
      if (!f) {
        std::error_code ec;
        fs::remove(tmp, ec);
        throw std::runtime_error("write failed for '" + path.string() + "'");
      }
    }
    std::error_code ec;
    fs::rename(tmp, path, ec);
    if (ec) {
      std::error_code ignored;
      fs::remove(tmp, ignored);
      throw std::runtime_error("cannot move output into place at '" + path.string() + "': " + ec.message());
    }
    out_.files.push_back(path);
    out_.digests.push_back(digest_hex(fnv1a64(bytes)));
  }

  CommandOutput commit() {
    committed_ = true;
    for (std::size_t i = 0; i < out_.files.size(); ++i)
      log_ << "wrote " << out_.files[i].string() << " digest " << out_.digests[i] << "\n";
    return out_;
  }

 private:
  std::ostream& log_;
  CommandOutput out_;
  bool committed_ = false;
};

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.9g", v);
  return buf;
}

GeneratorConfig generator_for(const std::string& preset) {
  if (preset.empty() || preset == "desk") return GeneratorConfig::desk();
  if (preset == "straight") return GeneratorConfig::straight();
  throw ConfigError("unknown generator preset '" + preset + "' (expected desk or straight)");
}

ModelConfig model_config_of(const RunConfig& c) {
  ModelConfig m;
  m.input_height = c.get_int("input_height");
  m.input_width = c.get_int("input_width");
  m.hidden = c.get_int("hidden");
  m.pooling = parse_pooling(c.get("pooling"));
  m.head = parse_head(c.get("head"));
  m.system = AnchorSystem::preset(c.get("system"));
  m.validate();
  return m;
}

DataConfig data_config_of(const RunConfig& c) {
  DataConfig d;
  d.stroke = c.get_int("stroke");
  d.noise_sigma = c.get_double("noise");
  d.occlusions = c.get_int("occlusions");
  d.max_shift = c.get_double("max_shift");
  d.assign = parse_assign_mode(c.get("assign"));
  return d;
}

TrainConfig train_config_of(const RunConfig& c) {
  TrainConfig t;
  t.epochs = c.get_int("epochs");
  t.batch_size = c.get_int("batch_size");
  t.lr0 = c.get_double("lr0");
  t.lr_decay_factor = c.get_double("lr_decay");
  t.decay_epoch_fraction = c.get_double("decay_fraction");
  t.momentum = c.get_double("momentum");
  t.seed = c.get_u64("seed");
  t.weights.alpha = c.get_double("alpha");
  t.weights.beta = c.get_double("beta");
  t.weights.w_sim = c.get_double("w_sim");
  t.weights.w_shp = c.get_double("w_shp");
  t.data = data_config_of(c);
  t.validate();
  return t;
}

EvalOptions eval_options_of(const RunConfig& c) {
  EvalOptions e;
  e.decode = parse_decode_mode(c.get("decode"));
  e.fltta = c.get_bool("fltta");
  e.fltta_shift = c.get_int("shift");
  e.min_points = c.get_int("min_points");
  e.eval_height = c.get_int("eval_height");
  e.eval_width = c.get_int("eval_width");
  e.lane_width_px = c.get_double("lane_width");
  e.iou_threshold = c.get_double("iou");
  e.tol_px = c.get_double("tol");
  e.roi_top = c.get_double("roi_top");
  e.image_seed = c.get_u64("image_seed");
  const std::string& match = c.get("match");
  if (match == "hungarian")
    e.match = MatchMethod::hungarian;
  else if (match == "greedy")
    e.match = MatchMethod::greedy;
  else
    throw ConfigError("unknown match method '" + match + "' (expected hungarian or greedy)");
  e.data = data_config_of(c);
  if (e.fltta_shift < 0) throw ConfigError("shift must be >= 0");
  if (e.eval_height <= 0 || e.eval_width <= 0) throw ConfigError("evaluation size must be positive");
  return e;
}

std::string metrics_header() {
  return "decode,f1,precision,recall,tp,fp,fn,accuracy,correct,total,loc_error,loc_points\n";
}

std::string metrics_row(std::string_view decode, const EvalReport& r) {
  return std::string(decode) + "," + fmt(r.f1.f1) + "," + fmt(r.f1.precision) + "," + fmt(r.f1.recall) + "," +
         std::to_string(r.f1.tp) + "," + std::to_string(r.f1.fp) + "," + std::to_string(r.f1.fn) + "," +
         fmt(r.accuracy.accuracy()) + "," + std::to_string(r.accuracy.correct) + "," +
         std::to_string(r.accuracy.total) + "," + fmt(r.mean_loc_error) + "," + std::to_string(r.loc_points) + "\n";
}

const std::vector<std::string> kShared{"seed", "out", "threads"};

std::vector<std::string> with_shared(std::vector<std::string> keys) {
  keys.insert(keys.begin(), kShared.begin(), kShared.end());
  return keys;
}

}  // namespace

const std::vector<std::string>& command_keys(std::string_view command) {
  static const std::map<std::string, std::vector<std::string>, std::less<>> keys{
      {"gen", with_shared({"n", "preset"})},
      {"encode", with_shared({"scenes", "system", "assign"})},
      {"train",
       with_shared({"scenes", "system", "assign", "pooling", "head", "hidden", "input_height", "input_width", "epochs",
                    "batch_size", "lr0", "lr_decay", "decay_fraction", "momentum", "alpha", "beta", "w_sim", "w_shp",
                    "stroke", "noise", "occlusions", "max_shift", "checkpoints"})},
      {"eval",
       with_shared({"model", "scenes", "system", "assign", "decode", "fltta", "shift", "min_points", "oracle",
                    "input_height", "input_width", "eval_height", "eval_width", "lane_width", "iou", "tol", "roi_top",
                    "image_seed", "match", "overlays", "angle_bins", "stroke", "noise", "occlusions", "max_shift"})},
      {"ablate",
       with_shared({"kind", "values", "axis", "train_scenes", "test_scenes", "train_seed", "test_seed", "preset",
                    "system", "assign", "pooling", "head", "hidden", "input_height", "input_width", "epochs",
                    "batch_size", "lr0", "lr_decay", "decay_fraction", "momentum", "alpha", "beta", "w_sim", "w_shp",
                    "stroke", "noise", "occlusions", "max_shift", "decode", "fltta", "shift", "min_points",
                    "eval_height", "eval_width", "lane_width", "iou", "tol", "roi_top", "image_seed", "match"})},
      {"complexity", with_shared({"preset", "image_h", "image_w", "n_row", "n_col", "row_lanes", "col_lanes",
                                  "row_dim", "col_dim", "seg_classes"})},
  };
  const auto it = keys.find(command);
  if (it == keys.end()) throw std::invalid_argument("unknown command '" + std::string(command) + "'");
  return it->second;
}

void apply_threads(const RunConfig& config) {
  std::string value = config.get("threads");
  if (value.empty()) {
    const char* env = std::getenv("HAL_THREADS");
    if (env == nullptr || *env == '\0') return;
    value = env;
  }
  RunConfig probe;
  probe.set("threads", value);
  const int n = probe.get_int("threads");
  if (n < 1) throw ConfigError("threads must be >= 1");
  omp_set_num_threads(n);
  kernels::set_threads(n);
}

CommandOutput cmd_gen(const RunConfig& config, std::ostream& log) {
  const int n = config.get_int("n");
  if (n < 0) throw ConfigError("n must be >= 0");
  const GeneratorConfig gen = generator_for(config.get("preset"));
  const fs::path out = config.get("out");
  const fs::path path = out.extension() == ".jsonl" ? out : out / "scenes.jsonl";
  const std::vector<Scene> scenes = generate_scenes(config.get_u64("seed"), n, gen);
  std::string text;
  for (const Scene& s : scenes) text += scene_to_json(s) + "\n";
  OutputWriter writer(log);
  writer.write(path, text);
  log << "scenes " << n << "\n";
  return writer.commit();
}

CommandOutput cmd_encode(const RunConfig& config, std::ostream& log) {
  const AnchorSystem system = AnchorSystem::preset(config.get("system"));
  const AssignMode assign = effective_assign(system, parse_assign_mode(config.get("assign")));
  const std::vector<Scene> scenes = read_scenes_jsonl(config.get("scenes"));
  std::string text;
  long row_lanes = 0, col_lanes = 0, slot_violations = 0;
  for (const Scene& s : scenes) {
    for (const Lane& lane : s.lanes) {
      const double deg = lane_angle(lane) * 180.0 / std::numbers::pi;
      const bool ego = lane.slot == Slot::ego_left || lane.slot == Slot::ego_right;
      const bool side = lane.slot == Slot::side_left || lane.slot == Slot::side_right;
      if ((ego && !(deg > 45.0)) || (side && deg > 45.0)) ++slot_violations;
    }
    AnchorAssignment a;
    try {
      a = assign_lanes(s, system, assign);
    } catch (const std::exception& e) {
      throw std::runtime_error("scene " + std::to_string(s.seed) + ": " + e.what());
    }
    for (const LaneAssignment& e : a.entries) (e.kind == AnchorKind::row ? row_lanes : col_lanes)++;
    const CoordTarget coords = encode_targets(s, system, a);
    text += targets_to_json(s.seed, coords, quantize_targets(coords, system)) + "\n";
  }
  OutputWriter writer(log);
  writer.write(fs::path(config.get("out")) / "targets.jsonl", text);
  log << "scenes " << scenes.size() << " row_lanes " << row_lanes << " column_lanes " << col_lanes
      << " slot_angle_violations " << slot_violations << "\n";
  if (slot_violations > 0) throw std::runtime_error("lanes violate their slot's angle rule");
  return writer.commit();
}

CommandOutput cmd_train(const RunConfig& config, std::ostream& log) {
  const ModelConfig mc = model_config_of(config);
  TrainConfig tc = train_config_of(config);
  const fs::path out = config.get("out");
  if (config.get_bool("checkpoints")) tc.checkpoint_dir = out / "checkpoints";
  const std::vector<Scene> scenes = read_scenes_jsonl(config.get("scenes"));
  if (scenes.empty()) throw std::runtime_error("scene file '" + config.get("scenes") + "' is empty");
  if (!tc.checkpoint_dir.empty()) fs::create_directories(tc.checkpoint_dir);
  const TrainResult result = train(scenes, mc, tc);
  const std::vector<std::uint8_t> bytes = serialize_model(result.model);
  OutputWriter writer(log);
  writer.write(out / "model.hald", std::string_view(reinterpret_cast<const char*>(bytes.data()), bytes.size()));
  writer.write(out / "train_log.csv", result.log.to_csv());
  log << "epochs " << tc.epochs << " final_epoch_loss " << fmt(result.log.epoch_mean_total.back()) << "\n";
  return writer.commit();
}

CommandOutput cmd_eval(const RunConfig& config, std::ostream& log) {
  const EvalOptions options = eval_options_of(config);
  const std::vector<Scene> scenes = read_scenes_jsonl(config.get("scenes"));
  const bool oracle = config.get_bool("oracle");

  std::optional<Model> model;
  AnchorSystem system;
  int height = config.get_int("input_height");
  int width = config.get_int("input_width");
  Predictor predictor;
  if (oracle) {
    system = AnchorSystem::preset(config.get("system"));
    predictor = oracle_predictor(system, options.data.assign);
  } else {
    model.emplace(load_model(config.get("model")));
    system = model->system();
    if (config.is_set("system") && !(AnchorSystem::preset(config.get("system")) == system))
      throw std::runtime_error("anchor-system mismatch: model was trained with a different system than '" +
                               config.get("system") + "'");
    height = model->config().input_height;
    width = model->config().input_width;
    predictor = model_predictor(*model, options);
  }

  EvalOptions keep = options;
  keep.keep_predictions = true;
  const EvalReport report = evaluate(predictor, scenes, system, height, width, keep);
  const AngleErrorTable angles = angle_error_stats(predictor, scenes, system, options.data.assign, height, width,
                                                   options, config.get_double_list("angle_bins"));

  OutputWriter writer(log);
  const fs::path out = config.get("out");
  writer.write(out / "metrics.csv", metrics_header() + metrics_row(decode_mode_name(options.decode), report));
  writer.write(out / "angle_errors.csv", angles.to_csv());
  writer.write(out / "angle_errors.svg", angles.to_svg());
  const int overlays = std::min<int>(config.get_int("overlays"), static_cast<int>(scenes.size()));
  for (int i = 0; i < overlays; ++i) {
    char name[32];
    std::snprintf(name, sizeof name, "overlay_%03d.svg", i);
    writer.write(out / name, svg_scene_overlay(scenes[i].lanes, report.predictions[i], options.eval_width,
                                               options.eval_height));
  }
  log << "f1 " << fmt(report.f1.f1) << " precision " << fmt(report.f1.precision) << " recall "
      << fmt(report.f1.recall) << " accuracy " << fmt(report.accuracy.accuracy()) << " loc_error "
      << fmt(report.mean_loc_error) << "\n";
  return writer.commit();
}

CommandOutput cmd_ablate(const RunConfig& config, std::ostream& log) {
  const AblationKind kind = parse_ablation_kind(config.get("kind"));
  AblationConfig ac;
  ac.train_scenes = config.get_int("train_scenes");
  ac.test_scenes = config.get_int("test_scenes");
  ac.train_seed = config.get_u64("train_seed");
  ac.test_seed = config.get_u64("test_seed");
  ac.generator = generator_for(config.get("preset"));
  ac.model = model_config_of(config);
  ac.train = train_config_of(config);
  ac.eval = eval_options_of(config);
  ac.dims = config.get_int_list("values");
  const std::string& axis = config.get("axis");
  if (axis == "row")
    ac.dims_axis = AnchorKind::row;
  else if (axis == "column")
    ac.dims_axis = AnchorKind::column;
  else
    throw ConfigError("axis must be row or column");
  const AblationReport report = run_ablation(kind, ac);
  OutputWriter writer(log);
  const fs::path out = config.get("out");
  const std::string stem = "ablation_" + std::string(ablation_kind_name(kind));
  writer.write(out / (stem + ".csv"), report.to_csv());
  writer.write(out / (stem + ".svg"), report.to_svg());
  for (const AblationRow& r : report.rows)
    log << r.variant << " f1 " << fmt(r.f1.f1) << " accuracy " << fmt(r.accuracy) << " loc_error "
        << fmt(r.loc_error) << "\n";
  return writer.commit();
}

CommandOutput cmd_complexity(const RunConfig& config, std::ostream& log) {
  ComplexityDims dims;
  const std::string& preset = config.get("preset");
  if (!preset.empty()) {
    dims = ComplexityDims::from(AnchorSystem::preset(preset));
  } else {
    dims.n_row = config.get_int("n_row");
    dims.n_col = config.get_int("n_col");
    dims.n_row_lanes = config.get_int("row_lanes");
    dims.n_col_lanes = config.get_int("col_lanes");
    dims.row_dim = config.get_int("row_dim");
    dims.col_dim = config.get_int("col_dim");
  }
  const ComplexityStats s =
      complexity_report(config.get_int("image_h"), config.get_int("image_w"), dims, config.get_int("seg_classes"));
  log << "classifications " << s.n_classifications << "\n"
      << "calculations " << s.n_calculations << "\n"
      << "seg_classifications " << s.seg_classifications << "\n"
      << "seg_calculations " << s.seg_calculations << "\n"
      << "ratio " << fmt(s.ratio) << "\n";
  return {};
}

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Hybrid anchor lane detection toolkit", "hald"};
  app.require_subcommand(1, 1);
  struct Command {
    const char* name;
    const char* help;
    CommandOutput (*run)(const RunConfig&, std::ostream&);
  };
  const std::vector<Command> commands{
      {"gen", "generate synthetic scenes", cmd_gen},
      {"encode", "encode scenes into anchor targets", cmd_encode},
      {"train", "train a model", cmd_train},
      {"eval", "evaluate a model or the ground-truth oracle", cmd_eval},
      {"ablate", "run an ablation study", cmd_ablate},
      {"complexity", "print classification and calculation counts", cmd_complexity},
  };
  std::map<std::string, std::map<std::string, std::string>> values;
  std::map<std::string, std::map<std::string, CLI::Option*>> options;
  std::map<std::string, std::string> config_paths;
  for (const Command& c : commands) {
    CLI::App* sub = app.add_subcommand(c.name, c.help);
    sub->add_option("--config", config_paths[c.name], "flat key = value config file");
    for (const std::string& key : command_keys(c.name)) {
      const ConfigKey* k = find_config_key(key);
      options[c.name][key] = sub->add_option(flag_name(key), values[c.name][key], k->help)->default_str(k->default_value);
    }
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e, out, err);
  }
  for (const Command& c : commands) {
    CLI::App* sub = app.get_subcommand(c.name);
    if (!sub->parsed()) continue;
    try {
      RunConfig config;
      if (!config_paths[c.name].empty()) config.merge_file(config_paths[c.name]);
      for (const auto& [key, opt] : options[c.name])
        if (opt->count() > 0) config.set(key, values[c.name][key]);
      apply_threads(config);
      c.run(config, out);
      return 0;
    } catch (const std::exception& e) {
      err << "hald " << c.name << ": error: " << e.what() << "\n";
      return 1;
    }
  }
  return 2;
}

}  // namespace hald
