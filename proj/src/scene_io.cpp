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

#include <fstream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "hald/scene.hpp"

namespace hald {

using nlohmann::ordered_json;

std::string scene_to_json(const Scene& scene) {
  ordered_json j;
  j["seed"] = scene.seed;
  ordered_json lanes = ordered_json::array();
  for (const Lane& lane : scene.lanes) {
    ordered_json pts = ordered_json::array();
    for (const Point2& p : lane.points) pts.push_back({p.x, p.y});
    lanes.push_back({{"slot", slot_name(lane.slot)}, {"points", std::move(pts)}});
  }
  j["lanes"] = std::move(lanes);
  return j.dump();
}

Scene scene_from_json(std::string_view line) {
  Scene scene;
  try {
    const auto j = ordered_json::parse(line);
    scene.seed = j.at("seed").get<std::uint64_t>();
    for (const auto& lj : j.at("lanes")) {
      Lane lane;
      lane.slot = parse_slot(lj.at("slot").get<std::string>());
      for (const auto& pj : lj.at("points")) {
        if (!pj.is_array() || pj.size() != 2) throw std::runtime_error("point must be [x, y]");
        lane.points.push_back({pj[0].get<double>(), pj[1].get<double>()});
      }
      if (lane.points.size() < 2) throw std::runtime_error("lane with fewer than two points");
      scene.lanes.push_back(std::move(lane));
    }
  } catch (const nlohmann::json::exception& e) {
    throw std::runtime_error(std::string("malformed scene record: ") + e.what());
  } catch (const std::invalid_argument& e) {
    throw std::runtime_error(std::string("malformed scene record: ") + e.what());
  }
  return scene;
}

void write_scenes_jsonl(const std::filesystem::path& path, std::span<const Scene> scenes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  for (const Scene& s : scenes) out << scene_to_json(s) << '\n';
  if (!out) throw std::runtime_error("write failed for " + path.string());
}

std::vector<Scene> read_scenes_jsonl(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open scenes file " + path.string());
  std::vector<Scene> scenes;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    try {
      scenes.push_back(scene_from_json(line));
    } catch (const std::runtime_error& e) {
      std::ostringstream msg;
      msg << path.string() << ":" << line_no << ": " << e.what();
      throw std::runtime_error(msg.str());
    }
  }
  return scenes;
}

}  // namespace hald
