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

#ifndef SUCTIONQ_HEIGHTMAP_HPP_
#define SUCTIONQ_HEIGHTMAP_HPP_

#include <array>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "suctionq/scene.hpp"

namespace suctionq::heightmap {

// Row-major pixel index; row runs along world y, col along world x.
struct Pixel {
  int row = 0;
  int col = 0;
  friend bool operator==(const Pixel&, const Pixel&) = default;
};

// Color (c_t) and depth (d_t) heightmaps of one scene.
struct Heightmap {
  int width = 0;
  int height = 0;
  double meters_per_pixel = 0.0;
  std::vector<double> color;  // height x width x 3, in [0, 1]
  std::vector<double> depth;  // height x width, meters above the table

  std::size_t index(int row, int col) const {
    return static_cast<std::size_t>(row) * width + col;
  }
  double depth_at(int row, int col) const { return depth[index(row, col)]; }
  double color_at(int row, int col, int channel) const {
    return color[index(row, col) * 3 + channel];
  }
  bool in_bounds(int row, int col) const {
    return row >= 0 && col >= 0 && row < height && col < width;
  }
  std::size_t pixel_count() const {
    return static_cast<std::size_t>(width) * height;
  }
};

enum class Axis { x, y };

// l_t: binary mask marking height discontinuities against a shifted copy.
struct ClutterMap {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> mask;
  int shift_pixels = 60;
  Axis axis = Axis::x;
  double threshold = 0.02;

  std::uint8_t at(int row, int col) const {
    return mask[static_cast<std::size_t>(row) * width + col];
  }
  bool any() const;
  std::size_t count() const;

  // Mask of ones; what the action policy sees with the height policy off.
  static ClutterMap all_ones(int width, int height);
};

struct PerceptionConfig {
  int resolution = 224;
  int shift_pixels = 60;
  Axis axis = Axis::x;
  double threshold = 0.02;
  // Mark only pixels standing higher than their shifted source.
  bool signed_difference = false;
};

std::string_view to_string(Axis axis);
Axis parse_axis(std::string_view text);

inline constexpr std::array<double, 3> kTableColor{0.35, 0.35, 0.35};

// Deterministic albedo of an object id.
std::array<double, 3> object_color(int id);

Heightmap render_heightmaps(const scene::Scene& scene, int resolution);

ClutterMap clutter_map(const Heightmap& depth, int shift_pixels, Axis axis,
                       double threshold, bool signed_difference = false);
ClutterMap clutter_map(const Heightmap& depth, const PerceptionConfig& config);

// z_t: the depth value under pixel (px = col, py = row).
double suction_height(const Heightmap& depth, int px, int py);

// Number of 4-connected components of {depth >= min_height}.
int occupied_object_estimate(const Heightmap& depth, double min_height);

scene::Vec2 pixel_to_world(int px, int py, double meters_per_pixel);
// Pixel whose cell contains (x, y), clamped to the map.
Pixel world_to_pixel(double x, double y, double meters_per_pixel, int width,
                     int height);

// Binary image dumps: color as 8-bit P6 PPM, depth as 16-bit P5 PGM in
// 0.1 mm units, clutter mask as 8-bit P5 PGM (0 / 255), plus a JSON sidecar.
inline constexpr double kDepthUnit = 0.0001;

void write_color_ppm(const Heightmap& map, const std::filesystem::path& path);
void write_depth_pgm(const Heightmap& map, const std::filesystem::path& path);
void write_clutter_pgm(const ClutterMap& map,
                       const std::filesystem::path& path);
void write_sidecar(const Heightmap& map, const std::filesystem::path& path);

struct PnmImage {
  char format = '5';  // '5' grayscale, '6' rgb
  int width = 0;
  int height = 0;
  int max_value = 0;
  std::vector<std::uint16_t> samples;  // row-major, channel-interleaved
};

PnmImage read_pnm(const std::filesystem::path& path);

}  // namespace suctionq::heightmap

#endif  // SUCTIONQ_HEIGHTMAP_HPP_
