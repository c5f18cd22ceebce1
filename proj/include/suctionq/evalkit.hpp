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


#ifndef SUCTIONQ_EVALKIT_HPP_
#define SUCTIONQ_EVALKIT_HPP_

#include <cstdint>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "suctionq/agent.hpp"

namespace suctionq::evalkit {

using heightmap::Pixel;

inline constexpr double kDistanceThreshold = 0.015;

// Scores every pixel of the current state; the action is the masked argmax.
class Policy {
 public:
  virtual ~Policy() = default;
  virtual std::string name() const = 0;
  virtual qnet::QMap scores(const scene::Scene& scene,
                            const heightmap::Heightmap& state) const = 0;
};

class QPolicy : public Policy {
 public:
  explicit QPolicy(const qnet::QNetworkParams& params) : params_(params) {}
  std::string name() const override { return "q"; }
  qnet::QMap scores(const scene::Scene& scene,
                    const heightmap::Heightmap& state) const override;

 private:
  const qnet::QNetworkParams& params_;
};

// Fixture: picks the top-face center of the highest object.
class CenterPolicy : public Policy {
 public:
  std::string name() const override { return "center"; }
  qnet::QMap scores(const scene::Scene& scene,
                    const heightmap::Heightmap& state) const override;
};

// Fixture: picks the visible surface of the lowest object, as close to its
// center as the objects above allow.
class BottomFirstPolicy : public Policy {
 public:
  std::string name() const override { return "bottom-first"; }
  qnet::QMap scores(const scene::Scene& scene,
                    const heightmap::Heightmap& state) const override;
};

std::unique_ptr<Policy> make_fixture_policy(std::string_view name);

struct EvalConfig {
  scene::EnvKind env = scene::EnvKind::scattered;
  scene::Fidelity fidelity = scene::Fidelity::sim;
  bool height_policy = true;
  int episodes = 5;
  std::uint64_t seed = 1;
  // Strict distance rate also requires the suction to succeed.
  bool strict_distance = false;
  scene::SceneConfig scene;
  scene::SuctionParams suction;
  heightmap::PerceptionConfig perception;

  void validate() const;
};

nlohmann::json to_json(const EvalConfig& cfg);

struct AttemptRecord {
  int episode = 0;
  int attempt = 0;
  Pixel action;
  std::optional<double> psi;
  bool success = false;
  bool collision = false;
  int objects_before = 0;
};

struct EvalReport {
  std::string method;
  std::string config_digest;
  scene::EnvKind env = scene::EnvKind::scattered;
  scene::Fidelity fidelity = scene::Fidelity::sim;
  bool height_policy = true;
  std::uint64_t seed = 0;
  int n_i = 0;
  int n_s = 0;
  int n_d = 0;
  int n_collisions = 0;
  double s_r = 0.0;
  double d_r = 0.0;
  double collision_rate = 0.0;
  std::vector<AttemptRecord> attempts;
  // Rolling training curves, empty for fixture policies.
  std::vector<double> train_success_curve;
  std::vector<double> train_distance_curve;
  // Not serialized, so outputs stay reproducible.
  double wall_seconds = 0.0;

  // Recomputes the rates from the counts.
  void finalize();
};

nlohmann::json to_json(const EvalReport& report);

// Greedy rollouts with frozen parameters.
EvalReport evaluate(const qnet::QNetworkParams& params, const EvalConfig& cfg);
EvalReport evaluate(const Policy& policy, const EvalConfig& cfg);

enum class RatePredicate { success, distance };

// Windowed percentages over suction attempts; repositioning steps are skipped.
// A window larger than the number of attempts yields one value over all.
std::vector<double> rolling_rate(const agent::StepLog& log, int window,
                                 RatePredicate predicate);

// One evaluation cell. `method` is proposed, visual-grasping (binary reward)
// or the name of a fixture policy.
struct MatrixCell {
  std::string name;
  std::string method = "proposed";
  bool height_policy = true;
  scene::EnvKind env = scene::EnvKind::scattered;
  scene::Fidelity fidelity = scene::Fidelity::sim;
};

struct MatrixSpec {
  std::string name = "matrix";
  std::vector<MatrixCell> cells;
  std::vector<std::uint64_t> seeds{1};
  int episodes = 5;
  int curve_window = 50;
  // Base training configuration; method and height policy come from the cell.
  agent::TrainConfig train;
  bool strict_distance = false;
  // Digest of the run configuration, folded into every report's digest.
  std::string config_digest;
};

MatrixSpec parse_matrix(std::istream& in);
MatrixSpec load_matrix(const std::filesystem::path& path);
std::string method_label(const MatrixCell& cell);

struct Aggregate {
  std::string method;
  std::string env;
  std::string fidelity;
  int seeds = 0;
  double s_r_mean = 0.0, s_r_std = 0.0;
  double d_r_mean = 0.0, d_r_std = 0.0;
  double collision_rate_mean = 0.0, collision_rate_std = 0.0;
};

struct MatrixResult {
  std::vector<EvalReport> reports;
  std::vector<Aggregate> aggregates;
};

// Agents are trained once per (method, height policy, seed) and shared by
// the cells that evaluate them. `jobs` bounds concurrent training/evaluation.
MatrixResult run_matrix(const MatrixSpec& spec, int jobs = 1);

std::vector<Aggregate> aggregate(const std::vector<EvalReport>& reports);

// Writes aggregate.csv, collision.csv, one JSON per report and curves.svg.
void emit_report(const std::vector<EvalReport>& reports,
                 const std::filesystem::path& dir);

}  // namespace suctionq::evalkit

#endif  // SUCTIONQ_EVALKIT_HPP_
