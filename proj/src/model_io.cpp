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
#include <bit>
#include <fstream>
#include <iterator>
#include <optional>
#include <string>

#include "hald/model_io.hpp"

namespace hald {

using nlohmann::ordered_json;

namespace {

constexpr char kMagic[4] = {'H', 'A', 'L', 'D'};

void put_u64(std::vector<std::uint8_t>& out, std::uint64_t v) {
  for (int b = 0; b < 8; ++b) out.push_back(static_cast<std::uint8_t>(v >> (8 * b)));
}

std::uint64_t get_u64(const std::uint8_t* p) {
  std::uint64_t v = 0;
  for (int b = 0; b < 8; ++b) v |= static_cast<std::uint64_t>(p[b]) << (8 * b);
  return v;
}

}  // namespace

std::vector<std::uint8_t> serialize_model(const Model& model) {
  ordered_json header;
  header["config"] = model_config_to_json(model.config());
  ordered_json params = ordered_json::array();
  const auto names = model.parameter_names();
  const auto tensors = model.parameters();
  for (std::size_t i = 0; i < tensors.size(); ++i) params.push_back({{"name", names[i]}, {"shape", tensors[i]->shape}});
  header["parameters"] = std::move(params);
  header["parameter_count"] = model.parameter_count();
  const std::string text = header.dump();

  std::vector<std::uint8_t> out(std::begin(kMagic), std::end(kMagic));
  out.push_back(kModelFormatVersion);
  put_u64(out, text.size());
  out.insert(out.end(), text.begin(), text.end());
  out.reserve(out.size() + model.parameter_count() * 8);
  for (const Tensor* t : tensors)
    for (double v : t->values) put_u64(out, std::bit_cast<std::uint64_t>(v));
  return out;
}

Model deserialize_model(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < 13) throw FormatError("model file truncated before the header");
  if (!std::equal(std::begin(kMagic), std::end(kMagic), bytes.begin())) throw FormatError("bad magic, not a HALD model");
  if (bytes[4] != kModelFormatVersion)
    throw FormatError("unsupported model format version " + std::to_string(bytes[4]));
  const std::uint64_t header_len = get_u64(bytes.data() + 5);
  if (header_len > bytes.size() - 13) throw FormatError("model file truncated inside the header");

  ordered_json header;
  try {
    header = ordered_json::parse(bytes.begin() + 13, bytes.begin() + 13 + static_cast<std::ptrdiff_t>(header_len));
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("unreadable model header: ") + e.what());
  }

  std::optional<Model> model;
  std::uint64_t declared = 0;
  try {
    model.emplace(model_config_from_json(header.at("config")), 0);
    declared = header.at("parameter_count").get<std::uint64_t>();
    const auto& params = header.at("parameters");
    const auto names = model->parameter_names();
    const auto tensors = model->parameters();
    if (params.size() != tensors.size()) throw FormatError("header lists the wrong number of parameter tensors");
    for (std::size_t i = 0; i < tensors.size(); ++i) {
      if (params[i].at("name").get<std::string>() != names[i] ||
          params[i].at("shape").get<std::vector<int>>() != tensors[i]->shape)
        throw FormatError("parameter " + names[i] + " disagrees with the header");
    }
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("invalid model header: ") + e.what());
  } catch (const std::invalid_argument& e) {
    throw FormatError(std::string("invalid model config: ") + e.what());
  }
  if (declared != model->parameter_count())
    throw FormatError("header parameter count " + std::to_string(declared) + " does not match the model shape");

  const std::size_t blob_offset = 13 + header_len;
  const std::size_t blob_len = bytes.size() - blob_offset;
  if (blob_len != declared * 8)
    throw FormatError("parameter blob holds " + std::to_string(blob_len) + " bytes, header declares " +
                      std::to_string(declared) + " float64 values");
  const std::uint8_t* p = bytes.data() + blob_offset;
  for (Tensor* t : model->parameters())
    for (double& v : t->values) {
      v = std::bit_cast<double>(get_u64(p));
      p += 8;
    }
  return std::move(*model);
}

void save_model(const Model& model, const std::filesystem::path& path) {
  const auto bytes = serialize_model(model);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw std::runtime_error("write failed for " + path.string());
}

Model load_model(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open model file " + path.string());
  const std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return deserialize_model(bytes);
}

}  // namespace hald
