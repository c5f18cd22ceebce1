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

#ifndef SUCTIONQ_AGENT_HPP_
#define SUCTIONQ_AGENT_HPP_

#include <cstdint>
#include <deque>
#include <functional>
#include <iosfwd>
#include <memory>
#include <optional>
#include <vector>

#include "suctionq/heightmap.hpp"
#include "suctionq/qnet.hpp"
#include "suctionq/scene.hpp"

namespace suctionq::agent {

using heightmap::ClutterMap;
using heightmap::Heightmap;
using heightmap::Pixel;

enum class RewardMode { shaped, binary };

std::string_view to_string(RewardMode mode);
RewardMode parse_reward_mode(std::string_view text);

struct RewardConfig {
  double r_p = 15.0;
  double delta = 0.00001;
  // `binary` is the visual-grasping baseline: 1 on success, 0 otherwise.
  RewardMode mode = RewardMode::shaped;

  void validate() const;
};

// psi: metric distance between the suction point and the object center.
double center_distance(scene::Vec2 action_world, scene::Vec2 object_center);

// shaped: r_p / (psi + delta) on success, 0 otherwise.
double reward(const RewardConfig& cfg, double psi, bool success);

// Action mask used by the policy: the clutter map when the height-sensitive
// policy is on, all ones otherwise.
ClutterMap policy_mask(const Heightmap& depth,
                       const heightmap::PerceptionConfig& perception,
                       bool height_policy);

// Greedy pixel of q * l over the mask (all pixels if the mask is empty);
// ties go to the lowest row-major index.
Pixel masked_argmax(const qnet::QMap& q, const ClutterMap& mask);
double masked_max(const qnet::QMap& q, const ClutterMap& mask);

// Epsilon-greedy over masked pixels.
Pixel select_action(const qnet::QMap& q, const ClutterMap& mask, double epsilon,
                    Rng& rng);

// y = r + gamma * max_a Q_target(next, a) over the masked map; y = r for
// terminal transitions.
double td_target(double reward_t, double gamma, const qnet::QNetworkParams& target,
                 const Heightmap& next_state, const ClutterMap& next_clutter,
                 bool terminal = false);

inline double td_error(double q_value, double target) { return q_value - target; }

struct Transition {
  std::shared_ptr<const Heightmap> state;
  Pixel action;
  double world_x = 0.0;
  double world_y = 0.0;
  double world_z = 0.0;
  scene::SuctionOutcome outcome;
  double reward = 0.0;
  std::shared_ptr<const Heightmap> next_state;
  bool terminal = false;
  // TD target computed when the transition was first learned from; replay
  // regresses towards it.
  double target = 0.0;
  int step = 0;
};

// R_p: bounded FIFO.
class ReplayBuffer {
 public:
  explicit ReplayBuffer(std::size_t capacity);

  void push(Transition transition);
  std::size_t size() const { return entries_.size(); }
  std::size_t capacity() const { return capacity_; }
  bool empty() const { return entries_.empty(); }
  const Transition& operator[](std::size_t i) const { return entries_[i]; }

  // k uniform indices, with replacement.
  std::vector<std::size_t> sample_indices(std::size_t k, Rng& rng) const;
  std::vector<Transition> sample(std::size_t k, Rng& rng) const;

 private:
  std::size_t capacity_;
  std::deque<Transition> entries_;
};

std::vector<Transition> replay_sample(const ReplayBuffer& buffer, std::size_t k,
                                      Rng& rng);

// Linear decay from `start` at step 1 to `end` at step decay_steps + 1.
struct EpsilonSchedule {
  double start = 0.5;
  double end = 0.1;
  int decay_steps = 200;

  double at(int step) const;
};

struct TrainConfig {
  double alpha = 0.0001;
  double gamma = 0.5;
  int steps = 400;
  int empty_threshold = 1;
  EpsilonSchedule epsilon;
  int target_sync_interval = 10;
  int replay_minibatch = 4;
  int buffer_capacity = 400;
  // Global gradient-norm clip of each update; 0 disables. Shaped rewards
  // reach r_p / delta, and unclipped steps on such TD errors diverge.
  double max_grad_norm = 100.0;
  std::uint64_t seed = 1;

  RewardConfig reward;
  bool height_policy = true;
  scene::Fidelity fidelity = scene::Fidelity::sim;
  scene::EnvKind env = scene::EnvKind::scattered;
  scene::SceneConfig scene;
  scene::SuctionParams suction;
  heightmap::PerceptionConfig perception;
  qnet::ArchConfig arch;

  void validate() const;
};

struct StepRecord {
  int step = 0;
  bool reposition = false;
  std::optional<Pixel> action;
  std::optional<double> psi;
  bool success = false;
  bool collision = false;
  double reward = 0.0;
  std::optional<double> td_error;
  std::size_t buffer_len = 0;
  double epsilon = 0.0;
  std::int64_t params_version = 0;
};

using StepLog = std::vector<StepRecord>;

inline constexpr const char* kStepLogHeader =
    "step,action_px,action_py,psi_m,success,collision,reward,td_error,buffer_len,epsilon";

void write_step_log_csv(const StepLog& log, std::ostream& out);

struct TrainResult {
  qnet::QNetworkParams params;
  StepLog log;
};

using StepObserver = std::function<void(const StepRecord&)>;

// The full training loop; deterministic given cfg.seed.
TrainResult train(const TrainConfig& cfg, const StepObserver& observer = {});

}  // namespace suctionq::agent

#endif  // SUCTIONQ_AGENT_HPP_
