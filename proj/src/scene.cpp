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

#include "suctionq/scene.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace suctionq::scene {
namespace {

struct Local {
  double x;
  double y;
};

Local to_local(const SceneObject& o, double px, double py) {
  const double dx = px - o.x;
  const double dy = py - o.y;
  if (o.yaw == 0.0) return {dx, dy};
  const double c = std::cos(o.yaw);
  const double s = std::sin(o.yaw);
  return {c * dx + s * dy, -s * dx + c * dy};
}

Vec2 to_world(const SceneObject& o, double lx, double ly) {
  if (o.yaw == 0.0) return {o.x + lx, o.y + ly};
  const double c = std::cos(o.yaw);
  const double s = std::sin(o.yaw);
  return {o.x + c * lx - s * ly, o.y + s * lx + c * ly};
}

double rect_distance(double lx, double ly, double hx, double hy) {
  const double dx = std::max(std::abs(lx) - hx, 0.0);
  const double dy = std::max(std::abs(ly) - hy, 0.0);
  return std::hypot(dx, dy);
}

// Distance from a local point to the axis-aligned box [x0,x1]x[y0,y1].
double box_distance(double lx, double ly, double x0, double x1, double y0,
                    double y1) {
  const double dx = std::max({x0 - lx, 0.0, lx - x1});
  const double dy = std::max({y0 - ly, 0.0, ly - y1});
  return std::hypot(dx, dy);
}

double part_distance(const FootprintPart& p, double px, double py) {
  if (p.kind == FootprintPart::Kind::circle) {
    return std::max(std::hypot(px - p.center.x, py - p.center.y) - p.half_x,
                    0.0);
  }
  const double dx = px - p.center.x;
  const double dy = py - p.center.y;
  const double c = std::cos(p.yaw);
  const double s = std::sin(p.yaw);
  return rect_distance(c * dx + s * dy, -s * dx + c * dy, p.half_x, p.half_y);
}

std::array<Vec2, 2> rect_axes(const FootprintPart& p) {
  const double c = std::cos(p.yaw);
  const double s = std::sin(p.yaw);
  return {Vec2{c, s}, Vec2{-s, c}};
}

double rect_radius_along(const FootprintPart& p, Vec2 u) {
  const auto axes = rect_axes(p);
  return p.half_x * std::abs(u.x * axes[0].x + u.y * axes[0].y) +
         p.half_y * std::abs(u.x * axes[1].x + u.y * axes[1].y);
}

std::vector<FootprintPart> cluster_parts(const std::vector<SceneObject>& objs) {
  std::vector<FootprintPart> out;
  for (const auto& o : objs) {
    auto p = o.parts();
    out.insert(out.end(), p.begin(), p.end());
  }
  return out;
}

std::array<double, 4> part_bounds(const FootprintPart& p) {
  if (p.kind == FootprintPart::Kind::circle) {
    return {p.center.x - p.half_x, p.center.y - p.half_x,
            p.center.x + p.half_x, p.center.y + p.half_x};
  }
  const double ex = rect_radius_along(p, {1.0, 0.0});
  const double ey = rect_radius_along(p, {0.0, 1.0});
  return {p.center.x - ex, p.center.y - ey, p.center.x + ex, p.center.y + ey};
}

SceneObject make_cube(double size) {
  SceneObject o;
  o.shape = Shape::box;
  o.half_x = o.half_y = size / 2.0;
  o.height = size;
  return o;
}

double uniform(Rng& rng, double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

// Places a cluster (objects with positions relative to the cluster origin)
// at a uniformly drawn origin that keeps every part inside the workspace and
// at least `clearance` away from everything already placed.
void place_cluster(std::vector<SceneObject>& placed,
                   std::vector<SceneObject> cluster, Rng& rng,
                   const SceneConfig& config) {
  const double side = config.workspace_side;
  for (int attempt = 0; attempt < config.placement_attempts; ++attempt) {
    const double ox = uniform(rng, 0.0, side);
    const double oy = uniform(rng, 0.0, side);
    std::vector<SceneObject> moved = cluster;
    for (auto& o : moved) {
      o.x += ox;
      o.y += oy;
    }
    bool ok = true;
    for (const auto& part : cluster_parts(moved)) {
      const auto b = part_bounds(part);
      if (b[0] < 0.0 || b[1] < 0.0 || b[2] > side || b[3] > side) {
        ok = false;
        break;
      }
    }
    for (const auto& o : moved) {
      if (!ok) break;
      for (const auto& other : placed) {
        if (footprints_overlap(o, other, -config.clearance)) {
          ok = false;
          break;
        }
      }
    }
    if (!ok) continue;
    for (auto& o : moved) {
      o.id = static_cast<int>(placed.size());
      placed.push_back(o);
    }
    return;
  }
  throw PlacementError("cannot place: workspace too crowded");
}

double random_quarter_turn(Rng& rng) {
  const int k = std::uniform_int_distribution<int>(0, 3)(rng);
  return k * std::numbers::pi / 2.0;
}

SceneObject make_novel(Rng& rng, bool cylinder) {
  SceneObject o;
  if (cylinder) {
    o.shape = Shape::cylinder;
    o.half_x = o.half_y = uniform(rng, 0.02, 0.03);
    o.height = uniform(rng, 0.03, 0.08);
  } else {
    // Arm wider than the half extent keeps the centroid at least one cup
    // radius inside the L.
    o.shape = Shape::l_block;
    o.half_x = o.half_y = uniform(rng, 0.03, 0.035);
    o.arm = uniform(rng, 0.04, 0.045);
    o.height = uniform(rng, 0.04, 0.06);
    o.yaw = random_quarter_turn(rng);
  }
  return o;
}

void check_size(double size, double side) {
  if (!(size > 0.0) || size > side / 2.0) {
    throw std::invalid_argument("object size must be in (0, workspace_side/2]");
  }
}

// Cube pairs; `offset` is the horizontal displacement of the upper cube.
void place_pairs(std::vector<SceneObject>& placed, int count, double offset,
                 Rng& rng, const SceneConfig& config) {
  const double size = config.object_size;
  for (int i = 0; i < count; ++i) {
    SceneObject lower = make_cube(size);
    SceneObject upper = make_cube(size);
    upper.base_z = lower.height;
    if (offset != 0.0) {
      static constexpr Vec2 kDirs[] = {{1, 0}, {-1, 0}, {0, 1}, {0, -1}};
      const Vec2 d = kDirs[std::uniform_int_distribution<int>(0, 3)(rng)];
      upper.x = d.x * offset;
      upper.y = d.y * offset;
    }
    if (config.random_yaw) {
      const double yaw = uniform(rng, 0.0, std::numbers::pi / 2.0);
      lower.yaw = upper.yaw = yaw;
      const double c = std::cos(yaw);
      const double s = std::sin(yaw);
      const double ux = upper.x;
      const double uy = upper.y;
      upper.x = c * ux - s * uy;
      upper.y = s * ux + c * uy;
    }
    place_cluster(placed, {lower, upper}, rng, config);
  }
}

void place_novel(std::vector<SceneObject>& placed, int count, Rng& rng,
                 const SceneConfig& config) {
  for (int i = 0; i < count; ++i) {
    bool cylinder;
    if (i == 0) {
      cylinder = true;
    } else if (i == 1) {
      cylinder = false;
    } else {
      cylinder = std::bernoulli_distribution(0.5)(rng);
    }
    place_cluster(placed, {make_novel(rng, cylinder)}, rng, config);
  }
}

}  // namespace

std::string_view to_string(Shape shape) {
  switch (shape) {
    case Shape::box: return "box";
    case Shape::cylinder: return "cylinder";
    case Shape::l_block: return "l_block";
  }
  return "?";
}

std::string_view to_string(Fidelity fidelity) {
  return fidelity == Fidelity::sim ? "sim" : "real";
}

std::string_view to_string(EnvKind kind) {
  switch (kind) {
    case EnvKind::scattered: return "scattered";
    case EnvKind::env1_fully_stacked: return "env1";
    case EnvKind::env2_half_stacked: return "env2";
    case EnvKind::env3_half_stacked_novel: return "env3";
    case EnvKind::novel: return "novel";
  }
  return "?";
}

Shape parse_shape(std::string_view text) {
  for (Shape s : {Shape::box, Shape::cylinder, Shape::l_block}) {
    if (to_string(s) == text) return s;
  }
  throw std::invalid_argument("unknown shape '" + std::string(text) + "'");
}

Fidelity parse_fidelity(std::string_view text) {
  if (text == "sim") return Fidelity::sim;
  if (text == "real") return Fidelity::real;
  throw std::invalid_argument("unknown fidelity '" + std::string(text) +
                              "' (valid: sim, real)");
}

EnvKind parse_env_kind(std::string_view text) {
  for (EnvKind k : {EnvKind::scattered, EnvKind::env1_fully_stacked,
                    EnvKind::env2_half_stacked,
                    EnvKind::env3_half_stacked_novel, EnvKind::novel}) {
    if (to_string(k) == text) return k;
  }
  if (text == "env1_fully_stacked") return EnvKind::env1_fully_stacked;
  if (text == "env2_half_stacked") return EnvKind::env2_half_stacked;
  if (text == "env3_half_stacked_novel") return EnvKind::env3_half_stacked_novel;
  throw std::invalid_argument("unknown environment '" + std::string(text) +
                              "' (valid: " + env_kind_names() + ")");
}

std::string env_kind_names() { return "scattered, env1, env2, env3, novel"; }

bool SceneObject::contains(double px, double py) const {
  const Local l = to_local(*this, px, py);
  switch (shape) {
    case Shape::box:
      return std::abs(l.x) <= half_x && std::abs(l.y) <= half_y;
    case Shape::cylinder:
      return l.x * l.x + l.y * l.y <= half_x * half_x;
    case Shape::l_block: {
      if (std::abs(l.x) > half_x || std::abs(l.y) > half_y) return false;
      const bool in_notch = l.x > -half_x + arm && l.y > -half_y + arm;
      return !in_notch;
    }
  }
  return false;
}

double SceneObject::distance_to(double px, double py) const {
  const Local l = to_local(*this, px, py);
  switch (shape) {
    case Shape::box:
      return rect_distance(l.x, l.y, half_x, half_y);
    case Shape::cylinder:
      return std::max(std::hypot(l.x, l.y) - half_x, 0.0);
    case Shape::l_block:
      return std::min(
          box_distance(l.x, l.y, -half_x, half_x, -half_y, -half_y + arm),
          box_distance(l.x, l.y, -half_x, -half_x + arm, -half_y, half_y));
  }
  return 0.0;
}

bool SceneObject::disc_inside(double px, double py, double r) const {
  const Local l = to_local(*this, px, py);
  switch (shape) {
    case Shape::box:
      return std::abs(l.x) + r <= half_x && std::abs(l.y) + r <= half_y;
    case Shape::cylinder:
      return std::hypot(l.x, l.y) + r <= half_x;
    case Shape::l_block: {
      if (std::abs(l.x) + r > half_x || std::abs(l.y) + r > half_y) {
        return false;
      }
      return box_distance(l.x, l.y, -half_x + arm, half_x, -half_y + arm,
                          half_y) >= r;
    }
  }
  return false;
}

Vec2 SceneObject::centroid() const {
  if (shape != Shape::l_block) return {x, y};
  const double box_area = 4.0 * half_x * half_y;
  const double notch_w = 2.0 * half_x - arm;
  const double notch_h = 2.0 * half_y - arm;
  const double notch_area = notch_w * notch_h;
  const double area = box_area - notch_area;
  // Notch center in the local frame is (arm/2, arm/2).
  const double lx = -notch_area * (arm / 2.0) / area;
  const double ly = -notch_area * (arm / 2.0) / area;
  return to_world(*this, lx, ly);
}

std::vector<FootprintPart> SceneObject::parts() const {
  using Kind = FootprintPart::Kind;
  switch (shape) {
    case Shape::box:
      return {{Kind::rect, {x, y}, half_x, half_y, yaw}};
    case Shape::cylinder:
      return {{Kind::circle, {x, y}, half_x, half_x, 0.0}};
    case Shape::l_block:
      return {
          {Kind::rect, to_world(*this, 0.0, -half_y + arm / 2.0), half_x,
           arm / 2.0, yaw},
          {Kind::rect, to_world(*this, -half_x + arm / 2.0, 0.0), arm / 2.0,
           half_y, yaw},
      };
  }
  return {};
}

std::array<double, 4> SceneObject::bounds() const {
  std::array<double, 4> b{1e300, 1e300, -1e300, -1e300};
  for (const auto& p : parts()) {
    const auto pb = part_bounds(p);
    b[0] = std::min(b[0], pb[0]);
    b[1] = std::min(b[1], pb[1]);
    b[2] = std::max(b[2], pb[2]);
    b[3] = std::max(b[3], pb[3]);
  }
  return b;
}

bool operator==(const SceneObject& a, const SceneObject& b) {
  return a.id == b.id && a.shape == b.shape && a.half_x == b.half_x &&
         a.half_y == b.half_y && a.arm == b.arm && a.height == b.height &&
         a.x == b.x && a.y == b.y && a.yaw == b.yaw && a.base_z == b.base_z;
}

bool parts_overlap(const FootprintPart& a, const FootprintPart& b,
                   double tolerance) {
  using Kind = FootprintPart::Kind;
  if (a.kind == Kind::circle && b.kind == Kind::circle) {
    return a.half_x + b.half_x - distance(a.center, b.center) > tolerance;
  }
  if (a.kind == Kind::circle || b.kind == Kind::circle) {
    const FootprintPart& circle = a.kind == Kind::circle ? a : b;
    const FootprintPart& rect = a.kind == Kind::circle ? b : a;
    return circle.half_x - part_distance(rect, circle.center.x,
                                         circle.center.y) >
           tolerance;
  }
  // Separating axis test on the four edge normals.
  const Vec2 d{b.center.x - a.center.x, b.center.y - a.center.y};
  for (const auto& rect : {a, b}) {
    for (const Vec2 u : rect_axes(rect)) {
      const double depth = rect_radius_along(a, u) + rect_radius_along(b, u) -
                           std::abs(d.x * u.x + d.y * u.y);
      if (depth <= tolerance) return false;
    }
  }
  return true;
}

bool footprints_overlap(const SceneObject& a, const SceneObject& b,
                        double tolerance) {
  for (const auto& pa : a.parts()) {
    for (const auto& pb : b.parts()) {
      if (parts_overlap(pa, pb, tolerance)) return true;
    }
  }
  return false;
}

const SceneObject* Scene::find(int id) const {
  for (const auto& o : objects) {
    if (o.id == id) return &o;
  }
  return nullptr;
}

bool Scene::inside(double x, double y) const {
  return x >= 0.0 && y >= 0.0 && x <= workspace_side && y <= workspace_side;
}

bool operator==(const Scene& a, const Scene& b) {
  return a.objects == b.objects && a.workspace_side == b.workspace_side &&
         a.seed == b.seed;
}

Scene spawn_scattered(int n, double size, std::uint64_t seed,
                      const SceneConfig& config) {
  if (n < 0) throw std::invalid_argument("object count must be >= 0");
  check_size(size, config.workspace_side);
  Scene scene;
  scene.workspace_side = config.workspace_side;
  scene.seed = seed;
  Rng rng = make_rng(seed, "scene.scattered");
  for (int i = 0; i < n; ++i) {
    SceneObject cube = make_cube(size);
    if (config.random_yaw) cube.yaw = uniform(rng, 0.0, std::numbers::pi / 2);
    place_cluster(scene.objects, {cube}, rng, config);
  }
  return scene;
}

Scene spawn_environment(EnvKind kind, std::uint64_t seed,
                        const SceneConfig& config) {
  check_size(config.object_size, config.workspace_side);
  Scene scene;
  scene.workspace_side = config.workspace_side;
  scene.seed = seed;
  Rng rng = make_rng(seed, "scene.environment");
  const double half_offset =
      (1.0 - config.overlap_fraction) * config.object_size;
  switch (kind) {
    case EnvKind::scattered:
      return spawn_scattered(config.object_count, config.object_size, seed,
                             config);
    case EnvKind::env1_fully_stacked:
      place_pairs(scene.objects, config.tower_count, 0.0, rng, config);
      break;
    case EnvKind::env2_half_stacked:
      place_pairs(scene.objects, config.pair_count, half_offset, rng, config);
      break;
    case EnvKind::env3_half_stacked_novel:
      place_pairs(scene.objects, config.pair_count, half_offset, rng, config);
      place_novel(scene.objects, std::max(config.novel_count, 2), rng, config);
      break;
    case EnvKind::novel:
      place_novel(scene.objects, std::max(config.novel_count, 2), rng, config);
      break;
  }
  return scene;
}

Scene reposition(const Scene& scene, int n, std::uint64_t seed, EnvKind kind,
                 const SceneConfig& config) {
  SceneConfig cfg = config;
  cfg.workspace_side = scene.workspace_side;
  if (kind == EnvKind::scattered) {
    return spawn_scattered(n, cfg.object_size, seed, cfg);
  }
  return spawn_environment(kind, seed, cfg);
}

const SceneObject* topmost_at(const Scene& scene, double x, double y) {
  const SceneObject* best = nullptr;
  for (const auto& o : scene.objects) {
    if (o.contains(x, y) && (best == nullptr || o.top() > best->top())) {
      best = &o;
    }
  }
  return best;
}

double top_height_at(const Scene& scene, double x, double y) {
  if (!scene.inside(x, y)) throw OutOfBounds("point outside the workspace");
  const SceneObject* o = topmost_at(scene, x, y);
  return o ? o->top() : 0.0;
}

Scene remove_object(const Scene& scene, int id) {
  Scene out = scene;
  std::erase_if(out.objects, [id](const SceneObject& o) { return o.id == id; });
  // Settle from the bottom up so supports are final before their loads.
  std::vector<std::size_t> order(out.objects.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return out.objects[a].base_z < out.objects[b].base_z;
  });
  for (std::size_t i : order) {
    SceneObject& o = out.objects[i];
    if (o.base_z <= 0.0) continue;
    double support = 0.0;
    for (const auto& other : out.objects) {
      if (&other == &o) continue;
      if (other.top() <= o.base_z + 1e-9 && footprints_overlap(o, other)) {
        support = std::max(support, other.top());
      }
    }
    o.base_z = support;
  }
  return out;
}

std::pair<SuctionOutcome, Scene> execute_suction(const Scene& scene, double x,
                                                 double y, double z,
                                                 Fidelity fidelity,
                                                 const SuctionParams& params) {
  if (!scene.inside(x, y)) throw OutOfBounds("suction point outside workspace");
  if (z < 0.0) throw std::invalid_argument("suction height must be >= 0");
  SuctionOutcome out;
  out.x = x;
  out.y = y;
  out.z = z;
  // Descent collision: anything within the gripper body radius standing
  // higher than the clearance above the suction height.
  for (const auto& o : scene.objects) {
    if (o.top() > z + params.descent_clearance &&
        o.distance_to(x, y) <= params.body_radius) {
      out.collision = true;
      return {out, scene};
    }
  }
  const SceneObject* contacted = nullptr;
  for (const auto& o : scene.objects) {
    if (!o.contains(x, y)) continue;
    if (std::abs(o.top() - z) > params.contact_tolerance) continue;
    if (contacted == nullptr || o.top() > contacted->top()) contacted = &o;
  }
  if (contacted == nullptr) return {out, scene};
  out.contacted_object = contacted->id;
  out.center_distance = distance({x, y}, contacted->centroid());
  if (fidelity == Fidelity::sim) {
    // Any overlap of the cup with the face holds; edge suction succeeds.
    out.success = contacted->distance_to(x, y) <= params.cup_radius;
  } else {
    out.success = contacted->disc_inside(x, y, params.cup_radius);
  }
  if (!out.success) return {out, scene};
  return {out, remove_object(scene, contacted->id)};
}

nlohmann::json to_json(const Scene& scene) {
  nlohmann::json objects = nlohmann::json::array();
  for (const auto& o : scene.objects) {
    objects.push_back({{"id", o.id},
                       {"shape", std::string(to_string(o.shape))},
                       {"half_x", o.half_x},
                       {"half_y", o.half_y},
                       {"arm", o.arm},
                       {"height", o.height},
                       {"x", o.x},
                       {"y", o.y},
                       {"yaw", o.yaw},
                       {"base_z", o.base_z}});
  }
  return {{"workspace_side", scene.workspace_side},
          {"seed", scene.seed},
          {"objects", objects}};
}

Scene scene_from_json(const nlohmann::json& doc) {
  Scene scene;
  try {
    scene.workspace_side = doc.at("workspace_side").get<double>();
    scene.seed = doc.value("seed", std::uint64_t{0});
    for (const auto& j : doc.at("objects")) {
      SceneObject o;
      o.id = j.at("id").get<int>();
      o.shape = parse_shape(j.at("shape").get<std::string>());
      o.half_x = j.at("half_x").get<double>();
      o.half_y = j.value("half_y", o.half_x);
      o.arm = j.value("arm", 0.0);
      o.height = j.at("height").get<double>();
      o.x = j.at("x").get<double>();
      o.y = j.at("y").get<double>();
      o.yaw = j.value("yaw", 0.0);
      o.base_z = j.value("base_z", 0.0);
      if (!(o.half_x > 0.0 && o.half_y > 0.0 && o.height > 0.0)) {
        throw std::invalid_argument("object extents must be positive");
      }
      if (o.base_z < 0.0) throw std::invalid_argument("base_z must be >= 0");
      if (!scene.inside(o.x, o.y)) throw OutOfBounds("object outside workspace");
      scene.objects.push_back(o);
    }
  } catch (const nlohmann::json::exception& e) {
    throw std::invalid_argument(std::string("bad scene document: ") + e.what());
  }
  return scene;
}

}  // namespace suctionq::scene
