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


// Acceptance gate: prints one PASS/FAIL line per criterion and exits nonzero
// if any criterion fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <map>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"
#include "reference_net.hpp"
#include "suctionq/agent.hpp"
#include "suctionq/evalkit.hpp"
#include "suctionq/heightmap.hpp"
#include "suctionq/qnet.hpp"
#include "support.hpp"

namespace {

using namespace suctionq;
using heightmap::Pixel;
using scene::EnvKind;
using scene::Fidelity;

constexpr int kSeeds = 5;

// Lines are printed in criterion order once everything has run.
std::map<int, std::pair<bool, std::string>> results;

void report(int criterion, bool pass, const std::string& detail) {
  std::fprintf(stderr, "criterion %d done\n", criterion);
  results[criterion] = {pass, detail};
}

std::string fmt(const char* f, double a) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), f, a);
  return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

double mean(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return v.empty() ? 0.0 : s / static_cast<double>(v.size());
}

std::string join(const std::vector<double>& v) {
  std::string out;
  for (double x : v) out += (out.empty() ? "" : ",") + fmt("%.0f", x);
  return "[" + out + "]";
}

// 1. Central differences of 0.5 * (Q - y)^2 on the full-size network.
void criterion_gradient() {
  const auto t0 = std::chrono::steady_clock::now();
  const qnet::ArchConfig arch;
  std::mt19937_64 rng(4242);
  int checked = 0;
  double worst = 0.0;
  for (int k = 0; k < 5; ++k) {
    qnet::QNetworkParams p = qnet::init_params(arch, 10 + k);
    testing::randomize_norms(p, 20 + k);
    const scene::Scene world = scene::spawn_scattered(8, 0.05, 30 + k, scene::SceneConfig{});
    const auto s = heightmap::render_heightmaps(world, arch.input_size);
    const Pixel px{static_cast<int>(rng() % 224), static_cast<int>(rng() % 224)};
    const double y = 0.3;
    const double q = qnet::q_value(p, s, px);
    const qnet::GradientSet g = qnet::backward_at_pixel(p, s, px, q - y);
    for (int n = 0; n < 60; ++n) {
      std::size_t t;
      do {
        t = rng() % p.tensors.size();
      } while (!p.tensors[t].trainable);
      const std::size_t i = rng() % p.tensors[t].value.size();
      const double h = 1e-5;
      qnet::QNetworkParams plus = p, minus = p;
      plus.tensors[t].value.data[i] += h;
      minus.tensors[t].value.data[i] -= h;
      const double lp = 0.5 * std::pow(qnet::q_value(plus, s, px) - y, 2);
      const double lm = 0.5 * std::pow(qnet::q_value(minus, s, px) - y, 2);
      const double fd = (lp - lm) / (2 * h);
      const double an = g.tensors[t].data[i];
      worst = std::max(worst, std::abs(an - fd) / std::max({std::abs(an), std::abs(fd), 1e-8}));
      ++checked;
    }
  }
  const double elapsed = seconds_since(t0);
  report(1, worst < 1e-4 && checked >= 200 && elapsed < 60.0,
         std::to_string(checked) + " parameters over 5 states, worst rel err " +
             fmt("%.3g", worst) + ", " + fmt("%.1f", elapsed) + " s");
}

// 2. Reward, TD target and SGD arithmetic.
void criterion_oracles() {
  std::string failed;
  auto expect = [&](bool ok, const char* what) {
    if (!ok) failed += std::string(" ") + what;
  };
  const agent::RewardConfig shaped;
  const double psi = 0.015, delta = 0.00001;
  expect(agent::reward(shaped, 0.0, true) == 15.0 / delta, "reward(0)");
  expect(std::abs(agent::reward(shaped, 0.0, true) - 1.5e6) < 1e-6, "reward(0)~1.5e6");
  expect(agent::reward(shaped, psi, true) == 15.0 / (psi + delta), "reward(0.015)");
  expect(std::abs(agent::reward(shaped, psi, true) - 999.33) < 0.01, "reward(0.015)~999.33");

  qnet::ArchConfig arch;
  arch.input_size = 32;
  arch.channels = {4};
  arch.strides = {2};
  qnet::QNetworkParams target = qnet::init_params(arch, 1);
  auto& head_w = target.tensors[target.tensors.size() - 2].value;
  std::fill(head_w.data.begin(), head_w.data.end(), 0.0);
  target.tensors.back().value[0] = 4.0;
  const auto state = heightmap::render_heightmaps(scene::Scene{}, 32);
  expect(agent::td_target(10.0, 0.5, target, state,
                          heightmap::ClutterMap::all_ones(32, 32)) == 12.0,
         "td_target");

  qnet::QNetworkParams scalar;
  scalar.tensors.push_back({"w", qnet::Tensor({1}, 1.0), true});
  qnet::GradientSet g;
  g.tensors.push_back(qnet::Tensor({1}, 2.0));
  expect(qnet::apply_update(scalar, g, 1e-4).tensors[0].value[0] == 0.9998, "sgd");
  report(2, failed.empty(),
         "reward 1.5e6 / 999.33, TD target 12, SGD step 0.9998" +
             (failed.empty() ? std::string() : "; mismatched:" + failed));
}

// 3. Clutter map against a direct double loop.
std::vector<std::uint8_t> clutter_oracle(const heightmap::Heightmap& m, int shift,
                                         double threshold) {
  std::vector<std::uint8_t> out(m.pixel_count());
  for (int r = 0; r < m.height; ++r) {
    for (int c = 0; c < m.width; ++c) {
      const double here = m.depth[r * m.width + c];
      const double there = c - shift >= 0 ? m.depth[r * m.width + c - shift] : 0.0;
      out[r * m.width + c] = std::abs(here - there) >= threshold ? 1 : 0;
    }
  }
  return out;
}

heightmap::Heightmap depth_map(int rows, int cols, std::vector<double> depth) {
  heightmap::Heightmap m;
  m.height = rows;
  m.width = cols;
  m.meters_per_pixel = 0.002;
  m.depth = std::move(depth);
  m.color.assign(m.pixel_count() * 3, 0.0);
  return m;
}

void criterion_clutter() {
  const auto line = depth_map(1, 8, {0, 0, 0, 0.05, 0.05, 0.05, 0, 0});
  bool ok = heightmap::clutter_map(line, 2, heightmap::Axis::x, 0.02).mask ==
            std::vector<std::uint8_t>{0, 0, 0, 1, 1, 0, 1, 1};
  std::mt19937_64 rng(777);
  std::uniform_real_distribution<double> h(0.0, 0.15);
  int agree = 0;
  for (int trial = 0; trial < 100; ++trial) {
    const int rows = 10 + static_cast<int>(rng() % 60), cols = 70 + static_cast<int>(rng() % 160);
    std::vector<double> d(static_cast<std::size_t>(rows) * cols);
    for (auto& v : d) v = rng() % 4 == 0 ? 0.0 : h(rng);
    const auto m = depth_map(rows, cols, d);
    const int shift = trial % 2 ? 60 : 1 + static_cast<int>(rng() % (cols - 1));
    agree += heightmap::clutter_map(m, shift, heightmap::Axis::x, 0.02).mask ==
             clutter_oracle(m, shift, 0.02);
  }
  ok &= agree == 100;
  report(3, ok, "1-D example and " + std::to_string(agree) + "/100 random maps bit-exact");
}

struct Agents {
  std::vector<agent::TrainResult> shaped, binary, shaped_no_policy;
};

agent::TrainResult train_one(agent::RewardMode mode, bool height_policy, int seed) {
  agent::TrainConfig cfg;
  cfg.seed = static_cast<std::uint64_t>(seed);
  cfg.reward.mode = mode;
  cfg.height_policy = height_policy;
  return agent::train(cfg);
}

evalkit::EvalReport eval(const qnet::QNetworkParams& p, EnvKind env, Fidelity f,
                         bool height_policy, int seed) {
  evalkit::EvalConfig cfg;
  cfg.env = env;
  cfg.fidelity = f;
  cfg.height_policy = height_policy;
  cfg.seed = static_cast<std::uint64_t>(seed);
  return evalkit::evaluate(p, cfg);
}

// 4. Final 50-attempt rolling rates of 400-step scattered-cube training.
void criterion_reward_shaping(const Agents& a) {
  std::vector<double> s_sh, s_bi, d_sh, d_bi;
  for (int i = 0; i < kSeeds; ++i) {
    s_sh.push_back(evalkit::rolling_rate(a.shaped[i].log, 50, evalkit::RatePredicate::success).back());
    s_bi.push_back(evalkit::rolling_rate(a.binary[i].log, 50, evalkit::RatePredicate::success).back());
    d_sh.push_back(evalkit::rolling_rate(a.shaped[i].log, 50, evalkit::RatePredicate::distance).back());
    d_bi.push_back(evalkit::rolling_rate(a.binary[i].log, 50, evalkit::RatePredicate::distance).back());
  }
  const double s_gap = mean(s_sh) - mean(s_bi), d_gap = mean(d_sh) - mean(d_bi);
  report(4, s_gap >= 10.0 && d_gap >= 10.0,
         "S_r shaped " + join(s_sh) + " binary " + join(s_bi) + " gap " + fmt("%.1f", s_gap) +
             "; D_r shaped " + join(d_sh) + " binary " + join(d_bi) + " gap " +
             fmt("%.1f", d_gap) + " (need both >= 10)");
}

struct FidelityPair {
  std::string what;
  double sim;
  double real;
};

// 5. Sim-to-real gap on scattered cubes.
void criterion_sim_to_real(const Agents& a, std::vector<FidelityPair>& pairs) {
  std::vector<double> gap_sh, gap_bi;
  for (int i = 0; i < kSeeds; ++i) {
    const int seed = i + 1;
    for (auto [runs, gaps, name] : {std::tuple{&a.shaped, &gap_sh, "shaped"},
                                    std::tuple{&a.binary, &gap_bi, "binary"}}) {
      const double sim = eval((*runs)[i].params, EnvKind::scattered, Fidelity::sim, true, seed).s_r;
      const double real = eval((*runs)[i].params, EnvKind::scattered, Fidelity::real, true, seed).s_r;
      gaps->push_back(sim - real);
      pairs.push_back({std::string(name) + " seed " + std::to_string(seed) + " scattered", sim, real});
    }
  }
  const double sh = mean(gap_sh), bi = mean(gap_bi);
  report(5, sh < bi && sh <= 15.0,
         "mean sim-real gap shaped " + fmt("%.1f", sh) + " " + join(gap_sh) + ", binary " +
             fmt("%.1f", bi) + " " + join(gap_bi) + " (need shaped < binary, shaped <= 15)");
}

// 6. Collision rate with the height policy against the agent trained and
// evaluated without it.
void criterion_height_policy(const Agents& a, std::vector<FidelityPair>& pairs) {
  bool ok = true;
  std::string detail;
  for (int i = 0; i < kSeeds; ++i) {
    const int seed = i + 1;
    const auto env1 = eval(a.shaped[i].params, EnvKind::env1_fully_stacked, Fidelity::sim, true, seed);
    const auto env1_real = eval(a.shaped[i].params, EnvKind::env1_fully_stacked, Fidelity::real, true, seed);
    pairs.push_back({"shaped seed " + std::to_string(seed) + " env1", env1.s_r, env1_real.s_r});
    ok &= env1.collision_rate == 0.0;
    detail += "seed " + std::to_string(seed) + " env1 " + fmt("%.0f", env1.collision_rate);
    for (EnvKind env : {EnvKind::env2_half_stacked, EnvKind::env3_half_stacked_novel}) {
      const auto with = eval(a.shaped[i].params, env, Fidelity::sim, true, seed);
      const auto without = eval(a.shaped_no_policy[i].params, env, Fidelity::sim, false, seed);
      const std::string tag = std::string(scene::to_string(env));
      pairs.push_back({"shaped seed " + std::to_string(seed) + " " + tag, with.s_r,
                       eval(a.shaped[i].params, env, Fidelity::real, true, seed).s_r});
      pairs.push_back({"no-policy seed " + std::to_string(seed) + " " + tag, without.s_r,
                       eval(a.shaped_no_policy[i].params, env, Fidelity::real, false, seed).s_r});
      ok &= without.collision_rate >= with.collision_rate + 20.0;
      detail += " " + tag + " " + fmt("%.0f", with.collision_rate) + "/" +
                fmt("%.0f", without.collision_rate);
    }
    detail += "; ";
  }
  report(6, ok, "collision % with/without height policy: " + detail +
                    "need without >= with + 20 per seed, env1 = 0");
}

// 7. Real fidelity never beats sim fidelity.
void criterion_monotone(const std::vector<FidelityPair>& pairs) {
  int violations = 0;
  std::string first;
  for (const auto& p : pairs) {
    if (p.real > p.sim) {
      if (violations++ == 0) first = " first: " + p.what;
    }
  }
  report(7, violations == 0,
         std::to_string(pairs.size()) + " checkpoint/environment pairs, " +
             std::to_string(violations) + " with real S_r > sim S_r" + first);
}

std::string csv_of(const agent::StepLog& log) {
  std::ostringstream out;
  agent::write_step_log_csv(log, out);
  return out.str();
}

// 8. Repeated invocations give identical bytes.
void criterion_determinism(const Agents& a) {
  bool ok = true;
  const auto again = train_one(agent::RewardMode::shaped, true, 1);
  ok &= csv_of(again.log) == csv_of(a.shaped[0].log);
  ok &= again.params.tensors == a.shaped[0].params.tensors;

  const auto e1 = eval(a.shaped[0].params, EnvKind::env2_half_stacked, Fidelity::real, true, 3);
  const auto e2 = eval(a.shaped[0].params, EnvKind::env2_half_stacked, Fidelity::real, true, 3);
  ok &= evalkit::to_json(e1).dump() == evalkit::to_json(e2).dump();

  std::istringstream spec(
      "[matrix]\nname = det\nseeds = 1,2\nepisodes = 2\nsteps = 30\n"
      "[cell.a]\nmethod = proposed\n[cell.b]\nmethod = visual-grasping\nenv = env2\n"
      "[cell.c]\nmethod = bottom-first\nenv = env3\nfidelity = real\n");
  const auto m = evalkit::parse_matrix(spec);
  const auto dir_a = testing::temp_dir("acceptance_matrix_a");
  const auto dir_b = testing::temp_dir("acceptance_matrix_b");
  evalkit::emit_report(evalkit::run_matrix(m, 1).reports, dir_a);
  evalkit::emit_report(evalkit::run_matrix(m, 2).reports, dir_b);
  int files = 0;
  for (const auto& entry : std::filesystem::directory_iterator(dir_a)) {
    ok &= testing::read_file(entry.path()) ==
          testing::read_file(dir_b / entry.path().filename());
    ++files;
  }
  ok &= files == 3 + 6;
  report(8, ok, "train log and weights, eval JSON, " + std::to_string(files) +
                    " matrix report files compared byte for byte");
}

// 9. Cube-trained agents on cylinders and L-blocks under real fidelity.
void criterion_novel(const Agents& a, std::vector<FidelityPair>& pairs) {
  std::vector<double> rates;
  for (int i = 0; i < kSeeds; ++i) {
    const int seed = i + 1;
    const double real = eval(a.shaped[i].params, EnvKind::novel, Fidelity::real, true, seed).s_r;
    const double sim = eval(a.shaped[i].params, EnvKind::novel, Fidelity::sim, true, seed).s_r;
    rates.push_back(real);
    pairs.push_back({"shaped seed " + std::to_string(seed) + " novel", sim, real});
  }
  report(9, mean(rates) >= 60.0,
         "real-fidelity S_r on cylinders/L-blocks " + join(rates) + " mean " +
             fmt("%.1f", mean(rates)) + " (need >= 60)");
}

// 10. Replay, argmax and mask invariants on random inputs.
qnet::QMap random_q(std::mt19937_64& rng, int w, int h) {
  qnet::QMap q;
  q.width = w;
  q.height = h;
  std::normal_distribution<double> n(0.0, 1.0);
  for (int i = 0; i < w * h; ++i) q.values.push_back(n(rng));
  return q;
}

void criterion_invariants() {
  std::mt19937_64 rng(1010);
  int cases = 0, passed = 0;
  auto check = [&](bool ok) {
    ++cases;
    passed += ok;
  };
  for (int trial = 0; trial < 200; ++trial) {
    const int w = 1 + static_cast<int>(rng() % 40), h = 1 + static_cast<int>(rng() % 40);
    const qnet::QMap q = random_q(rng, w, h);
    heightmap::ClutterMap mask = heightmap::ClutterMap::all_ones(w, h);
    for (auto& m : mask.mask) m = rng() % 3 == 0;

    qnet::QMap scaled = q;
    const double c = std::exp(std::uniform_real_distribution<double>(-8.0, 8.0)(rng));
    for (auto& v : scaled.values) v *= c;
    const Pixel a = agent::masked_argmax(q, mask), b = agent::masked_argmax(scaled, mask);
    check(a.row == b.row && a.col == b.col);

    if (mask.any()) {
      check(mask.mask[static_cast<std::size_t>(a.row) * w + a.col] == 1);
      Rng explore(rng());
      bool inside = true;
      for (int k = 0; k < 20; ++k) {
        const Pixel e = agent::select_action(q, mask, 1.0, explore);
        inside &= mask.mask[static_cast<std::size_t>(e.row) * w + e.col] == 1;
      }
      check(inside);
    }

    heightmap::ClutterMap zero = mask;
    std::fill(zero.mask.begin(), zero.mask.end(), 0);
    const Pixel z = agent::masked_argmax(q, zero);
    const auto best = std::max_element(q.values.begin(), q.values.end()) - q.values.begin();
    check(static_cast<std::ptrdiff_t>(z.row) * w + z.col == best);

    const std::size_t cap = 1 + rng() % 12;
    agent::ReplayBuffer buffer(cap);
    const int pushes = static_cast<int>(rng() % 40);
    for (int i = 0; i < pushes; ++i) {
      agent::Transition t;
      t.step = i;
      buffer.push(std::move(t));
    }
    const std::size_t kept = std::min<std::size_t>(cap, pushes);
    bool fifo = buffer.size() == kept;
    for (std::size_t k = 0; fifo && k < kept; ++k) {
      fifo = buffer[k].step == pushes - static_cast<int>(kept) + static_cast<int>(k);
    }
    check(fifo);
  }

  agent::TrainConfig cfg;
  cfg.arch.input_size = 32;
  cfg.arch.channels = {4, 6};
  cfg.arch.strides = {2, 1};
  cfg.perception.resolution = 32;
  cfg.perception.shift_pixels = 9;
  cfg.scene.object_count = 4;
  for (int seed = 1; seed <= 5; ++seed) {
    cfg.seed = static_cast<std::uint64_t>(seed);
    cfg.steps = 6;
    const auto r = agent::train(cfg);
    bool gate = !r.log[0].td_error && !r.log[1].td_error;
    gate &= r.log[0].params_version == 0 && r.log[1].params_version == 0;
    for (std::size_t t = 2; t < r.log.size(); ++t) {
      gate &= r.log[t].params_version > r.log[t - 1].params_version ||
              r.log[t - 1].reposition;
    }
    check(gate);
  }
  report(10, passed == cases,
         std::to_string(passed) + "/" + std::to_string(cases) +
             " FIFO, scale-invariance, masked-exclusion, zero-mask and t>2 gate cases");
}

}  // namespace

int main() {
  criterion_gradient();
  criterion_oracles();
  criterion_clutter();

  const auto t0 = std::chrono::steady_clock::now();
  Agents agents;
  for (int seed = 1; seed <= kSeeds; ++seed) {
    agents.shaped.push_back(train_one(agent::RewardMode::shaped, true, seed));
    agents.binary.push_back(train_one(agent::RewardMode::binary, true, seed));
    agents.shaped_no_policy.push_back(train_one(agent::RewardMode::shaped, false, seed));
  }
  std::fprintf(stderr, "trained %d agents in %.0f s\n", 3 * kSeeds, seconds_since(t0));

  std::vector<FidelityPair> pairs;
  criterion_reward_shaping(agents);
  criterion_sim_to_real(agents, pairs);
  criterion_height_policy(agents, pairs);
  criterion_novel(agents, pairs);
  criterion_monotone(pairs);
  criterion_determinism(agents);
  criterion_invariants();
  int failures = 0;
  for (const auto& [n, r] : results) {
    std::printf("%s criterion %d: %s\n", r.first ? "PASS" : "FAIL", n, r.second.c_str());
    failures += !r.first;
  }
  std::printf("%d of %zu criteria failed\n", failures, results.size());
  return failures == 0 ? 0 : 1;
}
