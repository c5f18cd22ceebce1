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

#ifndef SUCTIONQ_SCENE_HPP_
#define SUCTIONQ_SCENE_HPP_

#include <array>
#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "json.hpp"

#include "suctionq/common.hpp"

namespace suctionq::scene {

enum class Shape { box, cylinder, l_block };

enum class Fidelity { sim, real };

// Scene families. `scattered` is the training distribution (isolated cubes on
// the table); `novel` scatters only cylinders and L-blocks.
enum class EnvKind {
  scattered,
  env1_fully_stacked,
  env2_half_stacked,
  env3_half_stacked_novel,
  novel,
};

std::string_view to_string(Shape shape);
std::string_view to_string(Fidelity fidelity);
std::string_view to_string(EnvKind kind);
Shape parse_shape(std::string_view text);
Fidelity parse_fidelity(std::string_view text);
EnvKind parse_env_kind(std::string_view text);
// Comma separated list of accepted EnvKind names, for error messages.
std::string env_kind_names();

struct Vec2 {
  double x = 0.0;
  double y = 0.0;
};

inline double distance(Vec2 a, Vec2 b) {
  const double dx = a.x - b.x;
  const double dy = a.y - b.y;
  return std::sqrt(dx * dx + dy * dy);
}

// An oriented rectangle or a circle in world coordinates. Object footprints
// are unions of these.
struct FootprintPart {
  enum class Kind { rect, circle } kind = Kind::rect;
  Vec2 center;
  double half_x = 0.0;  // circle: radius
  double half_y = 0.0;
  double yaw = 0.0;
};

struct SceneObject {
  int id = 0;
  Shape shape = Shape::box;
  // Box and L-block: half extents of the (local) bounding box.
  // Cylinder: half_x = half_y = radius.
  double half_x = 0.0;
  double half_y = 0.0;
  // L-block arm width. The L occupies the bounding box minus the notch
  // [-half_x + arm, half_x] x [-half_y + arm, half_y] in the local frame.
  double arm = 0.0;
  double height = 0.0;
  double x = 0.0;
  double y = 0.0;
  double yaw = 0.0;
  double base_z = 0.0;

  double top() const { return base_z + height; }
  Vec2 center() const { return {x, y}; }

  // Closed footprint membership.
  bool contains(double px, double py) const;
  // Euclidean distance from (px, py) to the footprint; 0 inside.
  double distance_to(double px, double py) const;
  // True iff the closed disc of radius r around (px, py) lies within the
  // footprint.
  bool disc_inside(double px, double py, double r) const;
  // Centroid of the top face.
  Vec2 centroid() const;
  std::vector<FootprintPart> parts() const;
  // Axis-aligned bounds: {min_x, min_y, max_x, max_y}.
  std::array<double, 4> bounds() const;
};

bool operator==(const SceneObject& a, const SceneObject& b);

// True iff the two parts interpenetrate by more than `tolerance` (positive
// overlap area), or, for negative tolerance, come closer than -tolerance.
bool parts_overlap(const FootprintPart& a, const FootprintPart& b,
                   double tolerance = 1e-9);
bool footprints_overlap(const SceneObject& a, const SceneObject& b,
                        double tolerance = 1e-9);

struct Scene {
  std::vector<SceneObject> objects;
  double workspace_side = 0.448;
  std::uint64_t seed = 0;

  // b_t.
  std::size_t object_count() const { return objects.size(); }
  const SceneObject* find(int id) const;
  bool inside(double x, double y) const;
};

bool operator==(const Scene& a, const Scene& b);

struct SceneConfig {
  double workspace_side = 0.448;
  double object_size = 0.05;
  int object_count = 10;
  int tower_count = 4;
  int pair_count = 4;
  // Fraction of the lower object's side covered by the upper one in env2/env3.
  double overlap_fraction = 0.5;
  int novel_count = 4;
  // Boxes are axis aligned unless this is set.
  bool random_yaw = false;
  int placement_attempts = 2000;
  // Minimum gap between separately placed objects or clusters.
  double clearance = 0.005;
};

struct SuctionParams {
  double cup_radius = 0.010;
  double body_radius = 0.025;
  double contact_tolerance = 0.005;
  double descent_clearance = 0.005;
};

struct SuctionOutcome {
  bool success = false;
  bool collision = false;
  std::optional<int> contacted_object;
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;
  // Distance to the contacted object's top-face centroid (psi).
  std::optional<double> center_distance;
};

Scene spawn_scattered(int n, double size, std::uint64_t seed,
                      const SceneConfig& config = {});
Scene spawn_environment(EnvKind kind, std::uint64_t seed,
                        const SceneConfig& config = {});
// Fresh scene of the configured kind. For `scattered`, `n` cubes; the
// structured kinds take their counts from the config.
Scene reposition(const Scene& scene, int n, std::uint64_t seed,
                 EnvKind kind = EnvKind::scattered,
                 const SceneConfig& config = {});

double top_height_at(const Scene& scene, double x, double y);
// Topmost object covering (x, y), if any.
const SceneObject* topmost_at(const Scene& scene, double x, double y);

std::pair<SuctionOutcome, Scene> execute_suction(
    const Scene& scene, double x, double y, double z, Fidelity fidelity,
    const SuctionParams& params = {});

// Removes the object and lets everything it supported drop onto the next
// support below (no toppling).
Scene remove_object(const Scene& scene, int id);

nlohmann::json to_json(const Scene& scene);
Scene scene_from_json(const nlohmann::json& doc);

}  // namespace suctionq::scene

#endif  // SUCTIONQ_SCENE_HPP_
