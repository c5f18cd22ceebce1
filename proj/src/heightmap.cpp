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

#include "suctionq/heightmap.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <fstream>
#include <stdexcept>

#include "json.hpp"

namespace suctionq::heightmap {

bool ClutterMap::any() const {
  return std::any_of(mask.begin(), mask.end(), [](std::uint8_t v) { return v; });
}

std::size_t ClutterMap::count() const {
  return static_cast<std::size_t>(std::count(mask.begin(), mask.end(), 1));
}

ClutterMap ClutterMap::all_ones(int width, int height) {
  ClutterMap m;
  m.width = width;
  m.height = height;
  m.mask.assign(static_cast<std::size_t>(width) * height, 1);
  m.shift_pixels = 0;
  m.threshold = 0.0;
  return m;
}

std::string_view to_string(Axis axis) { return axis == Axis::x ? "x" : "y"; }

Axis parse_axis(std::string_view text) {
  if (text == "x") return Axis::x;
  if (text == "y") return Axis::y;
  throw std::invalid_argument("unknown axis '" + std::string(text) + "'");
}

std::array<double, 3> object_color(int id) {
  // Golden-angle hue walk at fixed saturation/value; never gray.
  const double hue = std::fmod(0.11 + 0.618033988749895 * id, 1.0) * 6.0;
  const double s = 0.75;
  const double v = 0.9;
  const int sector = static_cast<int>(hue) % 6;
  const double f = hue - std::floor(hue);
  const double p = v * (1.0 - s);
  const double q = v * (1.0 - s * f);
  const double t = v * (1.0 - s * (1.0 - f));
  switch (sector) {
    case 0: return {v, t, p};
    case 1: return {q, v, p};
    case 2: return {p, v, t};
    case 3: return {p, q, v};
    case 4: return {t, p, v};
    default: return {v, p, q};
  }
}

Heightmap render_heightmaps(const scene::Scene& scene, int resolution) {
  if (resolution < 16) throw std::invalid_argument("resolution must be >= 16");
  Heightmap map;
  map.width = map.height = resolution;
  map.meters_per_pixel = scene.workspace_side / resolution;
  map.depth.assign(map.pixel_count(), 0.0);
  map.color.resize(map.pixel_count() * 3);
  for (std::size_t i = 0; i < map.pixel_count(); ++i) {
    for (int c = 0; c < 3; ++c) map.color[i * 3 + c] = kTableColor[c];
  }
  const double mpp = map.meters_per_pixel;
  for (const auto& o : scene.objects) {
    const auto b = o.bounds();
    const int c0 = std::max(0, static_cast<int>(std::floor(b[0] / mpp)) - 1);
    const int r0 = std::max(0, static_cast<int>(std::floor(b[1] / mpp)) - 1);
    const int c1 = std::min(resolution - 1, static_cast<int>(std::ceil(b[2] / mpp)) + 1);
    const int r1 = std::min(resolution - 1, static_cast<int>(std::ceil(b[3] / mpp)) + 1);
    const auto albedo = object_color(o.id);
    for (int r = r0; r <= r1; ++r) {
      for (int c = c0; c <= c1; ++c) {
        const scene::Vec2 w = pixel_to_world(c, r, mpp);
        if (!o.contains(w.x, w.y)) continue;
        const std::size_t i = map.index(r, c);
        // Strictly higher wins, so ties keep the earlier object like
        // scene::topmost_at.
        if (o.top() > map.depth[i]) {
          map.depth[i] = o.top();
          for (int k = 0; k < 3; ++k) map.color[i * 3 + k] = albedo[k];
        }
      }
    }
  }
  return map;
}

ClutterMap clutter_map(const Heightmap& depth, int shift_pixels, Axis axis,
                       double threshold, bool signed_difference) {
  const int extent = axis == Axis::x ? depth.width : depth.height;
  if (shift_pixels <= 0 || shift_pixels >= extent) {
    throw InvalidShift("invalid shift: must satisfy 0 < shift < map extent");
  }
  ClutterMap out;
  out.width = depth.width;
  out.height = depth.height;
  out.shift_pixels = shift_pixels;
  out.axis = axis;
  out.threshold = threshold;
  out.mask.assign(depth.pixel_count(), 0);
  for (int r = 0; r < depth.height; ++r) {
    for (int c = 0; c < depth.width; ++c) {
      const int sr = axis == Axis::y ? r - shift_pixels : r;
      const int sc = axis == Axis::x ? c - shift_pixels : c;
      const double source = depth.in_bounds(sr, sc) ? depth.depth_at(sr, sc) : 0.0;
      const double diff = depth.depth_at(r, c) - source;
      const bool hit = signed_difference ? diff >= threshold
                                         : std::abs(diff) >= threshold;
      out.mask[depth.index(r, c)] = hit ? 1 : 0;
    }
  }
  return out;
}

ClutterMap clutter_map(const Heightmap& depth, const PerceptionConfig& config) {
  return clutter_map(depth, config.shift_pixels, config.axis, config.threshold,
                     config.signed_difference);
}

double suction_height(const Heightmap& depth, int px, int py) {
  if (!depth.in_bounds(py, px)) throw OutOfBounds("pixel outside heightmap");
  return depth.depth_at(py, px);
}

int occupied_object_estimate(const Heightmap& depth, double min_height) {
  std::vector<std::uint8_t> seen(depth.pixel_count(), 0);
  int components = 0;
  std::deque<std::pair<int, int>> frontier;
  for (int r = 0; r < depth.height; ++r) {
    for (int c = 0; c < depth.width; ++c) {
      if (seen[depth.index(r, c)] || depth.depth_at(r, c) < min_height) continue;
      ++components;
      seen[depth.index(r, c)] = 1;
      frontier.emplace_back(r, c);
      while (!frontier.empty()) {
        const auto [pr, pc] = frontier.front();
        frontier.pop_front();
        static constexpr int kDr[] = {-1, 1, 0, 0};
        static constexpr int kDc[] = {0, 0, -1, 1};
        for (int k = 0; k < 4; ++k) {
          const int nr = pr + kDr[k];
          const int nc = pc + kDc[k];
          if (!depth.in_bounds(nr, nc)) continue;
          const std::size_t i = depth.index(nr, nc);
          if (seen[i] || depth.depth[i] < min_height) continue;
          seen[i] = 1;
          frontier.emplace_back(nr, nc);
        }
      }
    }
  }
  return components;
}

scene::Vec2 pixel_to_world(int px, int py, double meters_per_pixel) {
  return {(px + 0.5) * meters_per_pixel, (py + 0.5) * meters_per_pixel};
}

Pixel world_to_pixel(double x, double y, double meters_per_pixel, int width,
                     int height) {
  const int col = std::clamp(static_cast<int>(std::floor(x / meters_per_pixel)),
                             0, width - 1);
  const int row = std::clamp(static_cast<int>(std::floor(y / meters_per_pixel)),
                             0, height - 1);
  return {row, col};
}

namespace {

std::ofstream open_binary(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot open '" + path.string() + "' for writing");
  return out;
}

std::uint8_t to_byte(double v) {
  return static_cast<std::uint8_t>(std::lround(std::clamp(v, 0.0, 1.0) * 255.0));
}

}  // namespace

void write_color_ppm(const Heightmap& map, const std::filesystem::path& path) {
  auto out = open_binary(path);
  out << "P6\n" << map.width << ' ' << map.height << "\n255\n";
  std::vector<char> bytes(map.color.size());
  for (std::size_t i = 0; i < map.color.size(); ++i) {
    bytes[i] = static_cast<char>(to_byte(map.color[i]));
  }
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
}

void write_depth_pgm(const Heightmap& map, const std::filesystem::path& path) {
  auto out = open_binary(path);
  out << "P5\n" << map.width << ' ' << map.height << "\n65535\n";
  std::vector<char> bytes(map.depth.size() * 2);
  for (std::size_t i = 0; i < map.depth.size(); ++i) {
    const long v = std::clamp(std::lround(map.depth[i] / kDepthUnit), 0L, 65535L);
    // PGM samples wider than a byte are big-endian.
    bytes[2 * i] = static_cast<char>((v >> 8) & 0xff);
    bytes[2 * i + 1] = static_cast<char>(v & 0xff);
  }
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
}

void write_clutter_pgm(const ClutterMap& map, const std::filesystem::path& path) {
  auto out = open_binary(path);
  out << "P5\n" << map.width << ' ' << map.height << "\n255\n";
  std::vector<char> bytes(map.mask.size());
  for (std::size_t i = 0; i < map.mask.size(); ++i) {
    bytes[i] = static_cast<char>(map.mask[i] ? 255 : 0);
  }
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
}

void write_sidecar(const Heightmap& map, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot open '" + path.string() + "' for writing");
  nlohmann::json doc = {{"width", map.width},
                        {"height", map.height},
                        {"meters_per_pixel", map.meters_per_pixel},
                        {"depth_unit_m", kDepthUnit}};
  out << doc.dump(2) << '\n';
}

PnmImage read_pnm(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open '" + path.string() + "'");
  std::string magic;
  PnmImage img;
  in >> magic >> img.width >> img.height >> img.max_value;
  if ((magic != "P5" && magic != "P6") || !in || img.max_value <= 0 ||
      img.max_value > 65535) {
    throw Error("'" + path.string() + "' is not a binary PGM/PPM");
  }
  in.get();  // single whitespace before the raster
  img.format = magic[1];
  const int channels = img.format == '6' ? 3 : 1;
  const int bytes_per_sample = img.max_value > 255 ? 2 : 1;
  const std::size_t n = static_cast<std::size_t>(img.width) * img.height * channels;
  std::vector<unsigned char> raw(n * bytes_per_sample);
  in.read(reinterpret_cast<char*>(raw.data()), static_cast<std::streamsize>(raw.size()));
  if (static_cast<std::size_t>(in.gcount()) != raw.size()) {
    throw Error("'" + path.string() + "' is truncated");
  }
  img.samples.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    img.samples[i] = bytes_per_sample == 2
                         ? static_cast<std::uint16_t>((raw[2 * i] << 8) | raw[2 * i + 1])
                         : raw[i];
  }
  return img;
}

}  // namespace suctionq::heightmap
