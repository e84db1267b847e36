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

#include <cstdint>
#include <filesystem>
#include <map>
#include <set>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace hald {

struct ConfigKey {
  std::string name;  // snake_case; the flag is --name with '-' for '_'
  std::string default_value;
  std::string help;
};

/// Every key any subcommand accepts.
const std::vector<ConfigKey>& config_schema();
const ConfigKey* find_config_key(std::string_view name);
std::string flag_name(std::string_view key);

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Flat key = value settings over the closed schema. Starts at the defaults.
class RunConfig {
 public:
  RunConfig();

  /// Throws ConfigError on unknown keys.
  void set(std::string_view key, std::string value);
  /// `key = value` lines, `#` starts a comment, blank lines ignored.
  void merge_text(std::string_view text, std::string_view source);
  void merge_file(const std::filesystem::path& path);

  bool is_set(std::string_view key) const;
  const std::string& get(std::string_view key) const;
  int get_int(std::string_view key) const;
  std::uint64_t get_u64(std::string_view key) const;
  double get_double(std::string_view key) const;
  bool get_bool(std::string_view key) const;
  std::vector<int> get_int_list(std::string_view key) const;
  std::vector<double> get_double_list(std::string_view key) const;

  /// Every key in schema order, `key = value` per line.
  std::string to_text() const;

 private:
  std::map<std::string, std::string, std::less<>> values_;
  std::set<std::string, std::less<>> explicit_;
};

}  // namespace hald
