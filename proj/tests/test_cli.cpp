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

#include <cstdlib>
#include <fstream>
#include <sstream>

#include "hald/commands.hpp"
#include "hald/digest.hpp"
#include "hald/model_io.hpp"
#include "hald/rng.hpp"
#include "test_util.hpp"

using namespace hald;
namespace fs = std::filesystem;

namespace {

struct CliResult {
  int code = 0;
  std::string out;
  std::string err;
};

CliResult cli(std::vector<std::string> args) {
  args.insert(args.begin(), "hald");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

std::string csv_body(const std::string& s) { return s.substr(s.find('\n') + 1); }

}  // namespace

TEST_SUITE("cli") {
  TEST_CASE("config files") {
    RunConfig c;
    CHECK(c.get_int("epochs") == 15);
    CHECK_FALSE(c.is_set("epochs"));
    c.merge_text("# comment\n\nepochs = 3  # trailing\nbatch-size=8\n", "inline");
    CHECK(c.get_int("epochs") == 3);
    CHECK(c.get_int("batch_size") == 8);
    CHECK(c.is_set("epochs"));
    CHECK_THROWS_AS(c.merge_text("no_such_key = 1\n", "inline"), ConfigError);
    CHECK_THROWS_AS(c.merge_text("just words\n", "inline"), ConfigError);
    c.set("lr0", "abc");
    CHECK_THROWS_AS(c.get_double("lr0"), ConfigError);
    CHECK(RunConfig().get_double_list("angle_bins") == std::vector<double>{0, 30, 60, 90});
    try {
      c.merge_text("epochs = 1\nbogus = 2\n", "file.cfg");
      FAIL("expected an error");
    } catch (const ConfigError& e) {
      CHECK(std::string(e.what()).find("file.cfg:2") != std::string::npos);
    }
  }

  TEST_CASE("flags override the config file, which overrides defaults") {
    const auto dir = test::temp_dir("cli_cfg");
    std::ofstream(dir / "run.cfg") << "n = 3\nseed = 9\n";
    REQUIRE(cli({"gen", "--config", (dir / "run.cfg").string(), "--out", (dir / "a.jsonl").string()}).code == 0);
    REQUIRE(cli({"gen", "--config", (dir / "run.cfg").string(), "--n", "5", "--out", (dir / "b.jsonl").string()}).code ==
            0);
    REQUIRE(cli({"gen", "--n", "3", "--seed", "9", "--out", (dir / "c.jsonl").string()}).code == 0);
    int lines_a = 0, lines_b = 0;
    for (char ch : slurp(dir / "a.jsonl")) lines_a += ch == '\n';
    for (char ch : slurp(dir / "b.jsonl")) lines_b += ch == '\n';
    CHECK(lines_a == 3);
    CHECK(lines_b == 5);
    CHECK(slurp(dir / "a.jsonl") == slurp(dir / "c.jsonl"));
    std::ofstream(dir / "bad.cfg") << "typo_key = 1\n";
    const CliResult bad = cli({"gen", "--config", (dir / "bad.cfg").string(), "--out", dir.string()});
    CHECK(bad.code == 1);
    CHECK(bad.err.find("typo_key") != std::string::npos);
    CHECK(cli({"gen", "--not-a-flag", "1"}).code != 0);
    fs::remove_all(dir);
  }

  TEST_CASE("gen is reproducible") {
    const auto dir = test::temp_dir("cli_gen");
    const CliResult a = cli({"gen", "--n", "20", "--seed", "4", "--out", (dir / "a").string()});
    const CliResult b = cli({"gen", "--n", "20", "--seed", "4", "--out", (dir / "b").string()});
    REQUIRE(a.code == 0);
    REQUIRE(b.code == 0);
    CHECK(file_digest(dir / "a" / "scenes.jsonl") == file_digest(dir / "b" / "scenes.jsonl"));
    CHECK(a.out.find("digest " + file_digest(dir / "a" / "scenes.jsonl")) != std::string::npos);
    REQUIRE(cli({"gen", "--n", "0", "--out", (dir / "empty.jsonl").string()}).code == 0);
    CHECK(fs::file_size(dir / "empty.jsonl") == 0u);
    CHECK(cli({"gen", "--n", "-1", "--out", (dir / "neg.jsonl").string()}).code == 1);
    fs::remove_all(dir);
  }

  TEST_CASE("zero learning rate training reproduces the initialization") {
    const auto dir = test::temp_dir("cli_train");
    REQUIRE(cli({"gen", "--n", "8", "--out", (dir / "s.jsonl").string()}).code == 0);
    const CliResult r = cli({"train", "--scenes", (dir / "s.jsonl").string(), "--lr0", "0", "--epochs", "1",
                             "--batch-size", "4", "--seed", "6", "--out", dir.string()});
    REQUIRE(r.code == 0);
    const std::string bytes = slurp(dir / "model.hald");
    const auto expect = serialize_model(Model(ModelConfig{}, mix_seed(6, 1)));
    CHECK(bytes == std::string(expect.begin(), expect.end()));
    CHECK(fs::exists(dir / "train_log.csv"));
    fs::remove_all(dir);
  }

  TEST_CASE("eval modes") {
    const auto dir = test::temp_dir("cli_eval");
    const std::string scenes = (dir / "s.jsonl").string();
    REQUIRE(cli({"gen", "--n", "10", "--seed", "77", "--out", scenes}).code == 0);
    REQUIRE(cli({"train", "--scenes", scenes, "--epochs", "1", "--batch-size", "5", "--out", dir.string()}).code == 0);
    const std::string model = (dir / "model.hald").string();

    REQUIRE(cli({"eval", "--scenes", scenes, "--model", model, "--fltta", "0", "--out", (dir / "e0").string()}).code ==
            0);
    REQUIRE(cli({"eval", "--scenes", scenes, "--model", model, "--fltta", "1", "--shift", "0", "--out",
                 (dir / "e1").string()})
                .code == 0);
    CHECK(slurp(dir / "e0" / "metrics.csv") == slurp(dir / "e1" / "metrics.csv"));
    REQUIRE(cli({"eval", "--scenes", scenes, "--model", model, "--fltta", "1", "--shift", "1", "--out",
                 (dir / "e2").string()})
                .code == 0);
    CHECK(fs::exists(dir / "e2" / "angle_errors.csv"));
    CHECK(fs::exists(dir / "e2" / "overlay_000.svg"));

    REQUIRE(cli({"eval", "--scenes", scenes, "--oracle", "1", "--out", (dir / "oracle").string()}).code == 0);
    const std::string row = csv_body(slurp(dir / "oracle" / "metrics.csv"));
    CHECK(row.rfind("expectation,1,1,1,", 0) == 0);

    const CliResult mismatch =
        cli({"eval", "--scenes", scenes, "--model", model, "--system", "desk-rows", "--out", (dir / "mm").string()});
    CHECK(mismatch.code == 1);
    CHECK(mismatch.err.find("anchor-system mismatch") != std::string::npos);
    CHECK_FALSE(fs::exists(dir / "mm" / "metrics.csv"));

    std::ofstream(dir / "broken.hald") << "HALDgarbage";
    const CliResult broken = cli({"eval", "--scenes", scenes, "--model", (dir / "broken.hald").string()});
    CHECK(broken.code == 1);
    fs::remove_all(dir);
  }

  TEST_CASE("failed commands leave no partial outputs") {
    const auto dir = test::temp_dir("cli_partial");
    const std::string scenes = (dir / "s.jsonl").string();
    REQUIRE(cli({"gen", "--n", "4", "--out", scenes}).code == 0);
    fs::create_directories(dir / "out" / "overlay_001.svg");
    const CliResult r = cli({"eval", "--scenes", scenes, "--oracle", "1", "--out", (dir / "out").string()});
    CHECK(r.code == 1);
    CHECK_FALSE(fs::exists(dir / "out" / "metrics.csv"));
    CHECK_FALSE(fs::exists(dir / "out" / "angle_errors.csv"));
    CHECK_FALSE(fs::exists(dir / "out" / "overlay_000.svg"));
    for (const auto& e : fs::recursive_directory_iterator(dir))
      CHECK(e.path().extension() != ".partial");
    fs::remove_all(dir);
  }

  TEST_CASE("complexity") {
    const CliResult r = cli({"complexity"});
    REQUIRE(r.code == 0);
    CHECK(r.out.find("classifications 118") != std::string::npos);
    CHECK(r.out.find("calculations 15400") != std::string::npos);
    CHECK(r.out.find("seg_classifications 512000") != std::string::npos);
    CHECK(r.out.find("seg_calculations 2560000") != std::string::npos);
    const CliResult d = cli({"complexity", "--preset", "desk"});
    REQUIRE(d.code == 0);
    CHECK(d.out.find("classifications 56") != std::string::npos);
  }

  TEST_CASE("installed binary prints help with defaults") {
    const auto dir = test::temp_dir("cli_bin");
    const std::string cmd = std::string(HALD_CLI_PATH) + " train --help > " + (dir / "help.txt").string() + " 2>&1";
    CHECK(std::system(cmd.c_str()) == 0);
    const std::string help = slurp(dir / "help.txt");
    for (const std::string& key : command_keys("train")) CHECK(help.find(flag_name(key)) != std::string::npos);
    CHECK(help.find("0.05") != std::string::npos);
    const std::string fail = std::string(HALD_CLI_PATH) + " eval --model /nonexistent/m.hald --scenes /nonexistent/s.jsonl > " +
                             (dir / "err.txt").string() + " 2>&1";
    CHECK(std::system(fail.c_str()) != 0);
    CHECK(slurp(dir / "err.txt").find("hald eval: error:") != std::string::npos);
    fs::remove_all(dir);
  }
}
