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

#include "suctionq/agent.hpp"

#include <cmath>
#include <cstdio>
#include <limits>
#include <ostream>
#include <stdexcept>

namespace suctionq::agent {
namespace {

void check_same_shape(const qnet::QMap& q, const ClutterMap& mask) {
  if (q.width != mask.width || q.height != mask.height ||
      mask.mask.size() != q.values.size()) {
    throw ShapeMismatch("shape mismatch between Q map and clutter map");
  }
}

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace

std::string_view to_string(RewardMode mode) {
  return mode == RewardMode::shaped ? "shaped" : "binary";
}

RewardMode parse_reward_mode(std::string_view text) {
  if (text == "shaped") return RewardMode::shaped;
  if (text == "binary") return RewardMode::binary;
  throw std::invalid_argument("unknown reward mode '" + std::string(text) +
                              "' (valid: shaped, binary)");
}

void RewardConfig::validate() const {
  if (!(r_p > 0.0)) throw ConfigError("reward r_p must be > 0");
  if (!(delta > 0.0)) throw ConfigError("reward delta must be > 0");
}

double center_distance(scene::Vec2 action_world, scene::Vec2 object_center) {
  return std::sqrt((action_world.x - object_center.x) * (action_world.x - object_center.x) +
                   (action_world.y - object_center.y) * (action_world.y - object_center.y));
}

double reward(const RewardConfig& cfg, double psi, bool success) {
  if (psi < 0.0) throw std::invalid_argument("psi must be >= 0");
  const double r_g = success ? 1.0 : 0.0;
  if (cfg.mode == RewardMode::binary) return r_g;
  return cfg.r_p / (psi + cfg.delta) * r_g;
}

ClutterMap policy_mask(const Heightmap& depth,
                       const heightmap::PerceptionConfig& perception,
                       bool height_policy) {
  if (!height_policy) return ClutterMap::all_ones(depth.width, depth.height);
  return heightmap::clutter_map(depth, perception);
}

Pixel masked_argmax(const qnet::QMap& q, const ClutterMap& mask) {
  check_same_shape(q, mask);
  const bool fallback = !mask.any();
  std::size_t best = 0;
  double best_value = -std::numeric_limits<double>::infinity();
  bool found = false;
  for (std::size_t i = 0; i < q.values.size(); ++i) {
    if (!fallback && !mask.mask[i]) continue;
    if (!found || q.values[i] > best_value) {
      best = i;
      best_value = q.values[i];
      found = true;
    }
  }
  return {static_cast<int>(best / q.width), static_cast<int>(best % q.width)};
}

double masked_max(const qnet::QMap& q, const ClutterMap& mask) {
  const Pixel p = masked_argmax(q, mask);
  return q.at(p.row, p.col);
}

Pixel select_action(const qnet::QMap& q, const ClutterMap& mask, double epsilon,
                    Rng& rng) {
  check_same_shape(q, mask);
  if (epsilon > 0.0 && std::bernoulli_distribution(epsilon)(rng)) {
    const bool fallback = !mask.any();
    const std::size_t candidates = fallback ? q.values.size() : mask.count();
    std::size_t pick =
        std::uniform_int_distribution<std::size_t>(0, candidates - 1)(rng);
    for (std::size_t i = 0; i < q.values.size(); ++i) {
      if (!fallback && !mask.mask[i]) continue;
      if (pick-- == 0) {
        return {static_cast<int>(i / q.width), static_cast<int>(i % q.width)};
      }
    }
  }
  return masked_argmax(q, mask);
}

double td_target(double reward_t, double gamma, const qnet::QNetworkParams& target,
                 const Heightmap& next_state, const ClutterMap& next_clutter,
                 bool terminal) {
  if (!(gamma >= 0.0 && gamma <= 1.0)) throw std::invalid_argument("gamma must be in [0, 1]");
  if (terminal || gamma == 0.0) return reward_t;
  const qnet::QMap q = qnet::forward(target, next_state);
  return reward_t + gamma * masked_max(q, next_clutter);
}

ReplayBuffer::ReplayBuffer(std::size_t capacity) : capacity_(capacity) {
  if (capacity == 0) throw std::invalid_argument("replay capacity must be > 0");
}

void ReplayBuffer::push(Transition transition) {
  if (entries_.size() == capacity_) entries_.pop_front();
  entries_.push_back(std::move(transition));
}

std::vector<std::size_t> ReplayBuffer::sample_indices(std::size_t k, Rng& rng) const {
  if (entries_.empty()) throw EmptyBuffer("empty buffer");
  std::uniform_int_distribution<std::size_t> pick(0, entries_.size() - 1);
  std::vector<std::size_t> out(k);
  for (auto& i : out) i = pick(rng);
  return out;
}

std::vector<Transition> ReplayBuffer::sample(std::size_t k, Rng& rng) const {
  std::vector<Transition> out;
  for (std::size_t i : sample_indices(k, rng)) out.push_back(entries_[i]);
  return out;
}

std::vector<Transition> replay_sample(const ReplayBuffer& buffer, std::size_t k,
                                      Rng& rng) {
  return buffer.sample(k, rng);
}

double EpsilonSchedule::at(int step) const {
  if (decay_steps <= 0) return end;
  const double frac = std::min(1.0, static_cast<double>(step - 1) / decay_steps);
  return start + (end - start) * std::max(frac, 0.0);
}

void TrainConfig::validate() const {
  if (!(alpha > 0.0)) throw ConfigError("alpha must be > 0");
  if (!(gamma >= 0.0 && gamma <= 1.0)) throw ConfigError("gamma must be in [0, 1]");
  if (steps <= 0) throw ConfigError("steps must be > 0");
  if (empty_threshold < 0) throw ConfigError("empty_threshold must be >= 0");
  if (target_sync_interval <= 0) throw ConfigError("target_sync_interval must be > 0");
  if (replay_minibatch < 0) throw ConfigError("replay_minibatch must be >= 0");
  if (buffer_capacity <= 0) throw ConfigError("buffer_capacity must be > 0");
  if (max_grad_norm < 0.0) throw ConfigError("max_grad_norm must be >= 0");
  if (!(epsilon.start >= 0.0 && epsilon.start <= 1.0 && epsilon.end >= 0.0 &&
        epsilon.end <= 1.0)) {
    throw ConfigError("epsilon values must be in [0, 1]");
  }
  if (scene.object_count < empty_threshold) {
    throw ConfigError("object_count must be >= empty_threshold");
  }
  if (perception.resolution != arch.input_size) {
    throw ConfigError("heightmap resolution must equal the network input size");
  }
  reward.validate();
  arch.validate();
}

void write_step_log_csv(const StepLog& log, std::ostream& out) {
  out << kStepLogHeader << '\n';
  for (const auto& r : log) {
    out << r.step << ',';
    if (r.action) out << r.action->col << ',' << r.action->row << ',';
    else out << ",,";
    if (r.psi) out << format_double(*r.psi);
    out << ',' << (r.success ? 1 : 0) << ',' << (r.collision ? 1 : 0) << ','
        << format_double(r.reward) << ',';
    if (r.td_error) out << format_double(*r.td_error);
    out << ',' << r.buffer_len << ',' << format_double(r.epsilon) << '\n';
  }
}

TrainResult train(const TrainConfig& cfg, const StepObserver& observer) {
  cfg.validate();
  Rng scene_rng = make_rng(cfg.seed, "scene");
  Rng explore_rng = make_rng(cfg.seed, "exploration");
  Rng replay_rng = make_rng(cfg.seed, "replay");

  qnet::QNetworkParams params = qnet::init_params(cfg.arch, derive_seed(cfg.seed, "init"));
  qnet::QNetworkParams target = qnet::snapshot_target(params);
  const int n_objects = cfg.scene.object_count;
  scene::Scene world = scene::reposition(scene::Scene{{}, cfg.scene.workspace_side, 0},
                                         n_objects, scene_rng(), cfg.env, cfg.scene);
  ReplayBuffer buffer(static_cast<std::size_t>(cfg.buffer_capacity));
  std::optional<Transition> pending;
  TrainResult result;

  for (int t = 1; t <= cfg.steps; ++t) {
    auto state = std::make_shared<const Heightmap>(
        heightmap::render_heightmaps(world, cfg.perception.resolution));
    const ClutterMap mask = policy_mask(*state, cfg.perception, cfg.height_policy);
    StepRecord rec;
    rec.step = t;
    rec.epsilon = cfg.epsilon.at(t);
    const bool act = static_cast<int>(world.object_count()) >= cfg.empty_threshold;

    std::optional<qnet::QMap> q;
    if (act) q = qnet::forward(params, *state);

    if (pending) {
      pending->next_state = state;
      pending->target =
          td_target(pending->reward, cfg.gamma, target, *state, mask, pending->terminal);
      if (t > 2) {
        qnet::PixelGradient pg = qnet::pixel_gradient(params, *pending->state, pending->action);
        const double xi = td_error(pg.q, pending->target);
        qnet::GradientSet grads = std::move(pg.grad);
        grads *= xi;
        if (cfg.replay_minibatch > 0 && !buffer.empty()) {
          for (std::size_t i : buffer.sample_indices(cfg.replay_minibatch, replay_rng)) {
            const Transition& tr = buffer[i];
            qnet::PixelGradient rg = qnet::pixel_gradient(params, *tr.state, tr.action);
            rg.grad *= td_error(rg.q, tr.target);
            grads += rg.grad;
          }
        }
        if (cfg.max_grad_norm > 0.0) qnet::clip_gradient_norm(grads, cfg.max_grad_norm);
        params = qnet::apply_update(params, grads, cfg.alpha);
        rec.td_error = xi;
      }
      buffer.push(std::move(*pending));
      pending.reset();
    }

    if (!act) {
      world = scene::reposition(world, n_objects, scene_rng(), cfg.env, cfg.scene);
      rec.reposition = true;
    } else {
      const Pixel pixel = select_action(*q, mask, rec.epsilon, explore_rng);
      const scene::Vec2 w =
          heightmap::pixel_to_world(pixel.col, pixel.row, state->meters_per_pixel);
      const double z = heightmap::suction_height(*state, pixel.col, pixel.row);
      auto [outcome, next_world] =
          scene::execute_suction(world, w.x, w.y, z, cfg.fidelity, cfg.suction);
      Transition tr;
      tr.state = state;
      tr.action = pixel;
      tr.world_x = w.x;
      tr.world_y = w.y;
      tr.world_z = z;
      tr.outcome = outcome;
      tr.reward = reward(cfg.reward, outcome.center_distance.value_or(0.0), outcome.success);
      tr.terminal = static_cast<int>(next_world.object_count()) < cfg.empty_threshold;
      tr.step = t;
      rec.action = pixel;
      rec.psi = outcome.center_distance;
      rec.success = outcome.success;
      rec.collision = outcome.collision;
      rec.reward = tr.reward;
      pending = std::move(tr);
      world = std::move(next_world);
    }

    if (t % cfg.target_sync_interval == 0) target = qnet::snapshot_target(params);
    rec.buffer_len = buffer.size();
    rec.params_version = params.version;
    if (observer) observer(rec);
    result.log.push_back(rec);
  }
  result.params = std::move(params);
  return result;
}

}  // namespace suctionq::agent
