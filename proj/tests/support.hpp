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


#ifndef SUCTIONQ_TESTS_SUPPORT_HPP_
#define SUCTIONQ_TESTS_SUPPORT_HPP_

#include <filesystem>
#include <fstream>
#include <iterator>
#include <string>

#include "suctionq/scene.hpp"

namespace suctionq::testing {

// Fresh, empty directory under the system temp dir.
inline std::filesystem::path temp_dir(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / ("suctionq_test_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

inline std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

inline scene::SceneObject cube(int id, double x, double y, double base_z = 0.0,
                               double size = 0.05) {
  scene::SceneObject o;
  o.id = id;
  o.shape = scene::Shape::box;
  o.half_x = o.half_y = size / 2;
  o.height = size;
  o.x = x;
  o.y = y;
  o.base_z = base_z;
  return o;
}

inline scene::Scene scene_of(std::vector<scene::SceneObject> objects) {
  scene::Scene s;
  s.objects = std::move(objects);
  return s;
}

}  // namespace suctionq::testing

#endif  // SUCTIONQ_TESTS_SUPPORT_HPP_
