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


#include <cmath>
#include <map>
#include <sstream>

#include <boost/property_tree/ptree.hpp>
#include <boost/property_tree/xml_parser.hpp>
#include <gtest/gtest.h>

#include "suctionq/evalkit.hpp"
#include "support.hpp"

namespace suctionq::evalkit {
namespace {

using suctionq::testing::read_file;
using suctionq::testing::temp_dir;

agent::StepLog log_of(const std::vector<int>& outcomes) {
  agent::StepLog log;
  int step = 0;
  for (int o : outcomes) {
    agent::StepRecord r;
    r.step = ++step;
    if (o < 0) {
      r.reposition = true;
    } else {
      r.success = o == 1;
      r.psi = o == 1 ? 0.001 : 0.03;
      r.action = heightmap::Pixel{0, 0};
    }
    log.push_back(r);
  }
  return log;
}

qnet::ArchConfig small_arch() {
  qnet::ArchConfig a;
  a.input_size = 64;
  a.channels = {4, 6};
  a.strides = {2, 1};
  return a;
}

EvalConfig small_eval(scene::EnvKind env) {
  EvalConfig ec;
  ec.env = env;
  ec.episodes = 2;
  ec.perception.resolution = 64;
  ec.perception.shift_pixels = 17;
  return ec;
}

TEST(RollingRate, AllSuccessIsConstantHundred) {
  for (int w : {1, 3, 50}) {
    for (double v : rolling_rate(log_of({1, 1, 1, 1, 1}), w, RatePredicate::success)) {
      EXPECT_EQ(v, 100.0);
    }
  }
}

TEST(RollingRate, AlternatingWindowTwoIsFifty) {
  const auto s = rolling_rate(log_of({1, 0, 1, 0, 1, 0}), 2, RatePredicate::success);
  ASSERT_EQ(s.size(), 5u);
  for (double v : s) EXPECT_EQ(v, 50.0);
}

TEST(RollingRate, WindowLargerThanLogClamps) {
  const auto s = rolling_rate(log_of({1, 0, 0, 1}), 50, RatePredicate::success);
  ASSERT_EQ(s.size(), 1u);
  EXPECT_EQ(s[0], 50.0);
}

TEST(RollingRate, SkipsRepositionSteps) {
  const auto s = rolling_rate(log_of({1, -1, 1, -1, 0}), 3, RatePredicate::distance);
  ASSERT_EQ(s.size(), 1u);
  EXPECT_NEAR(s[0], 200.0 / 3.0, 1e-12);
  EXPECT_TRUE(rolling_rate(log_of({-1, -1}), 2, RatePredicate::success).empty());
  EXPECT_THROW(rolling_rate(log_of({1}), 0, RatePredicate::success), std::invalid_argument);
}

TEST(Report, RatesFollowCounts) {
  EvalReport r;
  r.n_i = 10;
  r.n_s = 9;
  r.n_d = 4;
  r.n_collisions = 1;
  r.finalize();
  EXPECT_EQ(r.s_r, 90.0);
  EXPECT_EQ(r.d_r, 40.0);
  EXPECT_EQ(r.collision_rate, 10.0);
}

TEST(Evaluate, CenterPolicySucceedsEverywhereInEnv1Real) {
  EvalConfig ec;
  ec.env = scene::EnvKind::env1_fully_stacked;
  ec.fidelity = scene::Fidelity::real;
  ec.episodes = 3;
  const EvalReport r = evaluate(CenterPolicy{}, ec);
  EXPECT_EQ(r.n_i, 3 * 8);
  EXPECT_EQ(r.s_r, 100.0);
  EXPECT_EQ(r.collision_rate, 0.0);
  EXPECT_EQ(r.d_r, 100.0);
}

TEST(Evaluate, BottomFirstCollidesInEnv2WithoutPolicy) {
  EvalConfig ec;
  ec.env = scene::EnvKind::env2_half_stacked;
  ec.height_policy = false;
  ec.episodes = 2;
  const EvalReport r = evaluate(BottomFirstPolicy{}, ec);
  EXPECT_GT(r.collision_rate, 0.0);
  EXPECT_EQ(r.n_collisions, static_cast<int>(std::count_if(
                                r.attempts.begin(), r.attempts.end(),
                                [](const AttemptRecord& a) { return a.collision; })));
}

TEST(Evaluate, CountsAreConsistent) {
  const qnet::QNetworkParams p = qnet::init_params(small_arch(), 1);
  for (auto env : {scene::EnvKind::scattered, scene::EnvKind::env2_half_stacked}) {
    const EvalReport r = evaluate(p, small_eval(env));
    EXPECT_EQ(r.n_i, static_cast<int>(r.attempts.size()));
    int s = 0, d = 0, c = 0;
    for (const auto& a : r.attempts) {
      s += a.success;
      d += a.psi && *a.psi < kDistanceThreshold;
      c += a.collision;
      EXPECT_FALSE(a.success && a.collision);
    }
    EXPECT_EQ(r.n_s, s);
    EXPECT_EQ(r.n_d, d);
    EXPECT_EQ(r.n_collisions, c);
    EXPECT_EQ(r.s_r, 100.0 * r.n_s / r.n_i);
    EXPECT_EQ(r.d_r, 100.0 * r.n_d / r.n_i);
    for (double v : {r.s_r, r.d_r, r.collision_rate}) {
      EXPECT_GE(v, 0.0);
      EXPECT_LE(v, 100.0);
    }
  }
}

TEST(Evaluate, EpisodesStopAtTwiceTheObjectCount) {
  // Untrained parameters on a tiny map fail often; attempts stay bounded.
  const qnet::QNetworkParams p = qnet::init_params(small_arch(), 3);
  EvalConfig ec = small_eval(scene::EnvKind::scattered);
  ec.scene.object_count = 3;
  const EvalReport r = evaluate(p, ec);
  std::map<int, int> per_episode;
  for (const auto& a : r.attempts) ++per_episode[a.episode];
  for (auto [e, n] : per_episode) EXPECT_LE(n, 6) << e;
}

TEST(Evaluate, StrictDistanceRequiresSuccess) {
  EvalConfig ec;
  ec.env = scene::EnvKind::env2_half_stacked;
  ec.height_policy = false;
  ec.episodes = 2;
  const EvalReport loose = evaluate(BottomFirstPolicy{}, ec);
  ec.strict_distance = true;
  const EvalReport strict = evaluate(BottomFirstPolicy{}, ec);
  EXPECT_LE(strict.n_d, loose.n_d);
  int expected = 0;
  for (const auto& a : strict.attempts) {
    expected += a.success && a.psi && *a.psi < kDistanceThreshold;
  }
  EXPECT_EQ(strict.n_d, expected);
}

TEST(Evaluate, LeavesParametersUntouchedAndIsDeterministic) {
  qnet::QNetworkParams p = qnet::init_params(small_arch(), 4);
  p.version = 12;
  const auto before = p.tensors;
  const EvalReport a = evaluate(p, small_eval(scene::EnvKind::env3_half_stacked_novel));
  const EvalReport b = evaluate(p, small_eval(scene::EnvKind::env3_half_stacked_novel));
  EXPECT_EQ(p.version, 12);
  EXPECT_EQ(p.tensors, before);
  EXPECT_EQ(to_json(a).dump(), to_json(b).dump());
}

TEST(Evaluate, RealNeverBeatsSim) {
  for (std::uint64_t seed = 1; seed <= 3; ++seed) {
    const qnet::QNetworkParams p = qnet::init_params(small_arch(), seed);
    for (auto env : {scene::EnvKind::scattered, scene::EnvKind::env3_half_stacked_novel}) {
      EvalConfig ec = small_eval(env);
      ec.seed = seed;
      const double sim = evaluate(p, ec).s_r;
      ec.fidelity = scene::Fidelity::real;
      EXPECT_LE(evaluate(p, ec).s_r, sim);
    }
  }
}

TEST(Evaluate, RejectsZeroEpisodes) {
  EvalConfig ec;
  ec.episodes = 0;
  EXPECT_THROW(evaluate(CenterPolicy{}, ec), std::invalid_argument);
}

TEST(Fixtures, NamedLookup) {
  EXPECT_EQ(make_fixture_policy("center")->name(), "center");
  EXPECT_EQ(make_fixture_policy("bottom-first")->name(), "bottom-first");
  EXPECT_THROW(make_fixture_policy("random"), ConfigError);
}

MatrixSpec tiny_spec() {
  std::istringstream in(R"(
[matrix]
name = tiny
seeds = 1
episodes = 1
steps = 3
[cell.a]
method = proposed
env = scattered
)");
  MatrixSpec spec = parse_matrix(in);
  spec.train.arch = small_arch();
  spec.train.perception.resolution = 64;
  spec.train.perception.shift_pixels = 17;
  spec.train.scene.object_count = 3;
  return spec;
}

TEST(Matrix, OneCellOneSeedOneReport) {
  const MatrixSpec spec = tiny_spec();
  EXPECT_EQ(spec.train.steps, 3);
  const MatrixResult r = run_matrix(spec);
  ASSERT_EQ(r.reports.size(), 1u);
  ASSERT_EQ(r.aggregates.size(), 1u);
  EXPECT_EQ(r.reports[0].method, "proposed");
  EXPECT_FALSE(r.reports[0].train_success_curve.empty());
}

TEST(Matrix, RepeatedRunsAreIdenticalAndJobsDoNotMatter) {
  MatrixSpec spec = tiny_spec();
  spec.seeds = {1, 2};
  MatrixCell fixture;
  fixture.name = "f";
  fixture.method = "center";
  fixture.env = scene::EnvKind::env2_half_stacked;
  spec.cells.push_back(fixture);
  const auto dir_a = temp_dir("matrix_a"), dir_b = temp_dir("matrix_b");
  emit_report(run_matrix(spec, 1).reports, dir_a);
  emit_report(run_matrix(spec, 3).reports, dir_b);
  for (const auto& entry : std::filesystem::directory_iterator(dir_a)) {
    const auto name = entry.path().filename();
    EXPECT_EQ(read_file(entry.path()), read_file(dir_b / name)) << name;
  }
}

TEST(Matrix, BundledTableLayout) {
  const MatrixSpec spec = load_matrix(std::string(SUCTIONQ_MATRIX_DIR) + "/table1.matrix");
  EXPECT_EQ(spec.cells.size(), 12u);
  std::vector<EvalReport> fake;
  for (const auto& cell : spec.cells) {
    for (auto seed : spec.seeds) {
      EvalReport r;
      r.method = method_label(cell);
      r.env = cell.env;
      r.seed = seed;
      fake.push_back(r);
    }
  }
  EXPECT_EQ(aggregate(fake).size(), 12u);
  const MatrixSpec fig = load_matrix(std::string(SUCTIONQ_MATRIX_DIR) + "/fig3.matrix");
  EXPECT_EQ(fig.cells.size(), 4u);
}

TEST(Matrix, ParserRejectsUnknownKeys) {
  std::istringstream bad_key("[matrix]\nseeds = 1\n[cell.a]\nmethod = proposed\ncolour = red\n");
  EXPECT_THROW(parse_matrix(bad_key), ConfigError);
  std::istringstream bad_method("[cell.a]\nmethod = magic\n");
  EXPECT_THROW(parse_matrix(bad_method), ConfigError);
  std::istringstream bad_env("[cell.a]\nenv = env7\n");
  EXPECT_THROW(parse_matrix(bad_env), ConfigError);
  std::istringstream no_cells("[matrix]\nname = x\n");
  EXPECT_THROW(parse_matrix(no_cells), ConfigError);
}

TEST(Aggregate, MeansLieWithinSeedRange) {
  std::vector<EvalReport> reports;
  const double rates[] = {10.0, 40.0, 25.0, 90.0};
  for (int i = 0; i < 4; ++i) {
    EvalReport r;
    r.method = "m";
    r.seed = i;
    r.s_r = rates[i];
    r.d_r = 100.0 - rates[i];
    r.collision_rate = rates[i] / 2;
    reports.push_back(r);
  }
  const auto a = aggregate(reports);
  ASSERT_EQ(a.size(), 1u);
  EXPECT_EQ(a[0].seeds, 4);
  EXPECT_DOUBLE_EQ(a[0].s_r_mean, 41.25);
  EXPECT_GE(a[0].s_r_mean, 10.0);
  EXPECT_LE(a[0].s_r_mean, 90.0);
  // Sample deviation: squared deviations sum to 3618.75 over n - 1 = 3.
  EXPECT_DOUBLE_EQ(a[0].s_r_std, std::sqrt(3618.75 / 3.0));
  EXPECT_DOUBLE_EQ(a[0].collision_rate_mean, 20.625);
}

TEST(Emit, EmptyReportListWritesHeaders) {
  const auto dir = temp_dir("emit_empty");
  emit_report({}, dir);
  EXPECT_EQ(read_file(dir / "collision.csv"),
            "method,env,collision_rate_mean,collision_rate_std\n");
  const std::string aggregate_csv = read_file(dir / "aggregate.csv");
  EXPECT_EQ(std::count(aggregate_csv.begin(), aggregate_csv.end(), '\n'), 1);
}

TEST(Emit, FilesAreNamedAndWellFormed) {
  const auto dir = temp_dir("emit_full");
  MatrixSpec spec = tiny_spec();
  spec.seeds = {4};
  emit_report(run_matrix(spec).reports, dir);
  const auto json_path = dir / "proposed_scattered_sim_4.json";
  ASSERT_TRUE(std::filesystem::exists(json_path));
  const auto doc = nlohmann::json::parse(read_file(json_path));
  EXPECT_EQ(doc.at("N_i").get<int>(), static_cast<int>(doc.at("attempts").size()));
  EXPECT_FALSE(doc.contains("wall_seconds"));
  boost::property_tree::ptree svg;
  std::istringstream in(read_file(dir / "curves.svg"));
  EXPECT_NO_THROW(boost::property_tree::read_xml(in, svg));
  EXPECT_EQ(svg.count("svg"), 1u);
}

TEST(Emit, UnwritablePathRaises) {
  const auto dir = temp_dir("emit_blocked");
  std::ofstream(dir / "file") << "x";
  EXPECT_THROW(emit_report({}, dir / "file" / "sub"), std::runtime_error);
}

}  // namespace
}  // namespace suctionq::evalkit
