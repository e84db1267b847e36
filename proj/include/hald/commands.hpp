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

#include <filesystem>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

#include "hald/config.hpp"

namespace hald {

/// Files a command wrote, with their digests, in write order.
struct CommandOutput {
  std::vector<std::filesystem::path> files;
  std::vector<std::string> digests;
};

/// Schema keys each subcommand reads.
const std::vector<std::string>& command_keys(std::string_view command);

CommandOutput cmd_gen(const RunConfig& config, std::ostream& log);
CommandOutput cmd_encode(const RunConfig& config, std::ostream& log);
CommandOutput cmd_train(const RunConfig& config, std::ostream& log);
CommandOutput cmd_eval(const RunConfig& config, std::ostream& log);
CommandOutput cmd_ablate(const RunConfig& config, std::ostream& log);
CommandOutput cmd_complexity(const RunConfig& config, std::ostream& log);

/// Applies --threads, falling back to HAL_THREADS.
void apply_threads(const RunConfig& config);

/// Parses argv and runs one subcommand. Returns the process exit code.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace hald
