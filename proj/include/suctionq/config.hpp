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


#ifndef SUCTIONQ_CONFIG_HPP_
#define SUCTIONQ_CONFIG_HPP_

#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "suctionq/agent.hpp"

namespace suctionq::config {

// Everything a run needs. Files are INI text with the sections train,
// reward, scene, suction, perception, network and eval; keys left out keep
// their defaults.
struct RunConfig {
  agent::TrainConfig train;
  int eval_episodes = 5;
  bool strict_distance = false;

  void validate() const;
};

// Parses on top of the defaults. Unknown sections or keys raise ConfigError.
RunConfig parse_config(std::istream& in);
RunConfig parse_config_text(const std::string& text);
RunConfig load_config(const std::filesystem::path& path);

// Every key, in a fixed order, with round-trip exact numbers.
std::string serialize_config(const RunConfig& cfg);

// Content hash of the serialized form.
std::string config_digest(const RunConfig& cfg);

// Sets one "section.key" value, as from a command-line override.
void set_value(RunConfig& cfg, std::string_view dotted_key, const std::string& value);
std::vector<std::string> config_keys();

// paper-proposed: shaped reward with the height policy.
// paper-baseline: the same with the binary reward.
RunConfig preset(std::string_view name);
std::vector<std::string> preset_names();

}  // namespace suctionq::config

#endif  // SUCTIONQ_CONFIG_HPP_
