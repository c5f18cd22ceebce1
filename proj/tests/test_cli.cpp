// Copyright 2026 The suctionq Authors
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
#include <sstream>

#include <gtest/gtest.h>

#include "cli.hpp"
#include "json.hpp"
#include "suctionq/heightmap.hpp"
#include "support.hpp"

namespace suctionq::cli {
namespace {

namespace fs = std::filesystem;
using suctionq::testing::read_file;
using suctionq::testing::temp_dir;

struct Result {
  int code;
  std::string out;
  std::string err;
};

Result invoke(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = run(args, out, err);
  return {code, out.str(), err.str()};
}

// Overrides that shrink the network and maps so commands finish quickly.
std::vector<std::string> small(std::vector<std::string> args) {
  for (const char* kv : {"network.input_size=32", "perception.resolution=32",
                         "perception.shift_pixels=9", "network.channels=4,6",
                         "network.strides=2,1"}) {
    args.push_back("--set");
    args.push_back(kv);
  }
  return args;
}

TEST(Cli, HelpListsEveryFlag) {
  const Result top = invoke({"--help"});
  EXPECT_EQ(top.code, kExitOk);
  for (const char* cmd : {"train", "eval", "matrix", "render"}) {
    EXPECT_NE(top.out.find(cmd), std::string::npos) << cmd;
  }
  const Result train = invoke({"train", "--help"});
  for (const char* flag : {"--config", "--preset", "--set", "--seed", "--steps", "--env",
                           "--fidelity", "--no-height-policy", "--out"}) {
    EXPECT_NE(train.out.find(flag), std::string::npos) << flag;
  }
  const Result matrix = invoke({"matrix", "--help"});
  for (const char* flag : {"--jobs", "--dry-run", "--out", "--seed"}) {
    EXPECT_NE(matrix.out.find(flag), std::string::npos) << flag;
  }
  const Result eval = invoke({"eval", "--help"});
  for (const char* flag : {"--checkpoint", "--policy", "--episodes"}) {
    EXPECT_NE(eval.out.find(flag), std::string::npos) << flag;
  }
}

TEST(Cli, UsageErrorsExitWithOne) {
  EXPECT_EQ(invoke({}).code, kExitUsage);
  EXPECT_EQ(invoke({"train", "--bogus"}).code, kExitUsage);
  EXPECT_EQ(invoke({"fly"}).code, kExitUsage);
  EXPECT_EQ(invoke({"train", "--preset", "paper-proposed", "--config", "x.ini"}).code,
            kExitUsage);
  EXPECT_EQ(invoke({"train", "--set", "train.nope=1"}).code, kExitUsage);
}

TEST(Cli, TrainOneStep) {
  const auto dir = temp_dir("cli_train1");
  const Result r = invoke(small({"train", "--steps", "1", "--out", dir.string()}));
  ASSERT_EQ(r.code, kExitOk) << r.err;
  const std::string csv = read_file(dir / "steps.csv");
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 2);
  EXPECT_TRUE(fs::exists(dir / "checkpoint.sqnet"));
  const auto summary = nlohmann::json::parse(r.out);
  EXPECT_EQ(summary.at("steps"), 1);
  EXPECT_EQ(summary.at("config_digest"),
            nlohmann::json::parse(read_file(dir / "run.json")).at("config_digest"));
}

TEST(Cli, PresetsWriteTheirConfig) {
  const auto a = temp_dir("cli_proposed"), b = temp_dir("cli_baseline");
  ASSERT_EQ(invoke({"train", "--preset", "paper-proposed", "--steps", "1", "--out", a.string()}).code,
            kExitOk);
  ASSERT_EQ(invoke({"train", "--preset", "paper-baseline", "--steps", "1", "--out", b.string()}).code,
            kExitOk);
  const std::string pa = read_file(a / "config.ini"), pb = read_file(b / "config.ini");
  for (const char* line : {"r_p = 15\n", "delta = 1.0000000000000001e-05\n",
                           "gamma = 0.5\n", "alpha = 0.0001\n", "shift_pixels = 60\n",
                           "height_policy = true\n", "mode = shaped\n"}) {
    EXPECT_NE(pa.find(line), std::string::npos) << line;
  }
  EXPECT_NE(pb.find("mode = binary\n"), std::string::npos);
  std::string patched = pb;
  patched.replace(patched.find("mode = binary"), 13, "mode = shaped");
  EXPECT_EQ(patched, pa);
}

TEST(Cli, TrainIsBitReproducible) {
  const auto a = temp_dir("cli_repro_a"), b = temp_dir("cli_repro_b");
  ASSERT_EQ(invoke(small({"train", "--steps", "6", "--seed", "3", "--out", a.string()})).code, kExitOk);
  ASSERT_EQ(invoke(small({"train", "--steps", "6", "--seed", "3", "--out", b.string()})).code, kExitOk);
  for (const char* f : {"steps.csv", "checkpoint.sqnet", "run.json", "config.ini"}) {
    EXPECT_EQ(read_file(a / f), read_file(b / f)) << f;
  }
}

TEST(Cli, EvalCenterFixturePrintsOneJsonLine) {
  const Result r = invoke({"eval", "--policy", "center", "--env", "env1", "--episodes", "2"});
  ASSERT_EQ(r.code, kExitOk) << r.err;
  EXPECT_EQ(std::count(r.out.begin(), r.out.end(), '\n'), 1);
  const auto line = nlohmann::json::parse(r.out);
  EXPECT_EQ(line.at("S_r").get<double>(), 100.0);
  EXPECT_TRUE(line.contains("D_r"));
  EXPECT_TRUE(line.contains("collision_rate"));
}

TEST(Cli, EvalRealNeverBeatsSimOnACheckpoint) {
  const auto dir = temp_dir("cli_eval_ckpt");
  ASSERT_EQ(invoke(small({"train", "--steps", "8", "--out", dir.string()})).code, kExitOk);
  const std::string ckpt = (dir / "checkpoint.sqnet").string();
  const Result sim = invoke(small({"eval", "--checkpoint", ckpt, "--fidelity", "sim"}));
  const Result real = invoke(small({"eval", "--checkpoint", ckpt, "--fidelity", "real"}));
  ASSERT_EQ(sim.code, kExitOk) << sim.err;
  ASSERT_EQ(real.code, kExitOk) << real.err;
  EXPECT_LE(nlohmann::json::parse(real.out).at("S_r").get<double>(),
            nlohmann::json::parse(sim.out).at("S_r").get<double>());
}

TEST(Cli, EvalErrors) {
  const Result env = invoke({"eval", "--policy", "center", "--env", "env9"});
  EXPECT_EQ(env.code, kExitUsage);
  EXPECT_NE(env.err.find("env1"), std::string::npos);
  EXPECT_NE(env.err.find("env3"), std::string::npos);
  const Result missing = invoke({"eval", "--checkpoint", "/nonexistent/ckpt.sqnet"});
  EXPECT_EQ(missing.code, kExitRuntime);
  EXPECT_EQ(invoke({"eval"}).code, kExitUsage);
  const auto dir = temp_dir("cli_bad_ckpt");
  std::ofstream(dir / "bad.sqnet") << "garbage";
  EXPECT_EQ(invoke({"eval", "--checkpoint", (dir / "bad.sqnet").string()}).code, kExitRuntime);
}

TEST(Cli, MatrixDryRunListsCells) {
  const std::string table = std::string(SUCTIONQ_MATRIX_DIR) + "/table1.matrix";
  const Result all = invoke({"matrix", table, "--dry-run"});
  ASSERT_EQ(all.code, kExitOk) << all.err;
  EXPECT_EQ(std::count(all.out.begin(), all.out.end(), '\n'), 12 * 5);
  const Result one = invoke({"matrix", table, "--dry-run", "--seed", "1"});
  EXPECT_EQ(std::count(one.out.begin(), one.out.end(), '\n'), 12);
  const Result fig = invoke({"matrix", std::string(SUCTIONQ_MATRIX_DIR) + "/fig3.matrix",
                             "--dry-run", "--seed", "1"});
  EXPECT_EQ(std::count(fig.out.begin(), fig.out.end(), '\n'), 4);
  EXPECT_EQ(invoke({"matrix", "/nonexistent.matrix", "--dry-run"}).code, kExitUsage);
}

TEST(Cli, MatrixOutputsAreReproducible) {
  const auto dir = temp_dir("cli_matrix");
  std::ofstream(dir / "m.matrix") << "[matrix]\nname = m\nseeds = 1\nepisodes = 1\nsteps = 4\n"
                                     "[cell.p]\nmethod = proposed\n"
                                     "[cell.c]\nmethod = center\nenv = env2\n";
  const auto spec = (dir / "m.matrix").string();
  const Result a = invoke(small({"matrix", spec, "--out", (dir / "a").string()}));
  const Result b = invoke(small({"matrix", spec, "--out", (dir / "b").string(), "--jobs", "2"}));
  ASSERT_EQ(a.code, kExitOk) << a.err;
  ASSERT_EQ(b.code, kExitOk) << b.err;
  const fs::path da = nlohmann::json::parse(a.out).at("out").get<std::string>();
  const fs::path db = nlohmann::json::parse(b.out).at("out").get<std::string>();
  EXPECT_EQ(da.filename().string().rfind("m_", 0), 0u);
  int files = 0;
  for (const auto& e : fs::directory_iterator(da)) {
    EXPECT_EQ(read_file(e.path()), read_file(db / e.path().filename())) << e.path();
    ++files;
  }
  EXPECT_EQ(files, 2 + 2 + 1 + 1);
}

TEST(Cli, RenderEmptySceneIsFlat) {
  const auto dir = temp_dir("cli_render_empty");
  std::ofstream(dir / "empty.json") << R"({"workspace_side": 0.448, "objects": []})";
  const Result r = invoke({"render", "--scene", (dir / "empty.json").string(), "--out",
                           (dir / "out").string()});
  ASSERT_EQ(r.code, kExitOk) << r.err;
  const auto depth = heightmap::read_pnm(dir / "out" / "depth.pgm");
  EXPECT_EQ(depth.width, 224);
  EXPECT_TRUE(std::all_of(depth.samples.begin(), depth.samples.end(),
                          [](std::uint16_t v) { return v == 0; }));
  EXPECT_EQ(heightmap::read_pnm(dir / "out" / "color.ppm").format, '6');
  EXPECT_EQ(heightmap::read_pnm(dir / "out" / "clutter.pgm").max_value, 255);
}

TEST(Cli, RenderEnv1PeaksAtTenCentimeters) {
  const auto dir = temp_dir("cli_render_env1");
  const Result r = invoke({"render", "--env", "env1", "--seed", "4", "--out", dir.string()});
  ASSERT_EQ(r.code, kExitOk) << r.err;
  const auto depth = heightmap::read_pnm(dir / "depth.pgm");
  EXPECT_EQ(*std::max_element(depth.samples.begin(), depth.samples.end()), 1000);
  const auto again = temp_dir("cli_render_env1_again");
  invoke({"render", "--env", "env1", "--seed", "4", "--out", again.string()});
  for (const char* f : {"depth.pgm", "color.ppm", "clutter.pgm", "scene.json"}) {
    EXPECT_EQ(read_file(dir / f), read_file(again / f)) << f;
  }
  EXPECT_EQ(invoke({"render", "--scene", "/nonexistent.json"}).code, kExitRuntime);
}

}  // namespace
}  // namespace suctionq::cli
