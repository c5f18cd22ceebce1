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


#include "suctionq/config.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <functional>
#include <limits>
#include <sstream>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

namespace suctionq::config {
namespace {

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

double parse_double(const std::string& key, const std::string& text) {
  double v = 0.0;
  const char* end = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(text.data(), end, v);
  if (ec != std::errc() || ptr != end) {
    throw ConfigError(key + ": expected a number, got '" + text + "'");
  }
  return v;
}

long long parse_integer(const std::string& key, const std::string& text) {
  long long v = 0;
  const char* end = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(text.data(), end, v);
  if (ec != std::errc() || ptr != end) {
    throw ConfigError(key + ": expected an integer, got '" + text + "'");
  }
  return v;
}

bool parse_bool(const std::string& key, const std::string& text) {
  if (text == "true" || text == "1" || text == "yes" || text == "on") return true;
  if (text == "false" || text == "0" || text == "no" || text == "off") return false;
  throw ConfigError(key + ": expected true or false, got '" + text + "'");
}

std::vector<int> parse_int_list(const std::string& key, const std::string& text) {
  std::vector<int> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    const auto b = item.find_first_not_of(" \t");
    const auto e = item.find_last_not_of(" \t");
    if (b == std::string::npos) throw ConfigError(key + ": empty list element");
    out.push_back(static_cast<int>(parse_integer(key, item.substr(b, e - b + 1))));
  }
  return out;
}

std::string format_int_list(const std::vector<int>& v) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) out += ',';
    out += std::to_string(v[i]);
  }
  return out;
}

// Rethrows parse errors of library enums as ConfigError.
template <typename Fn>
auto enum_value(const std::string& key, Fn&& fn) {
  try {
    return fn();
  } catch (const ConfigError&) {
    throw;
  } catch (const std::exception& e) {
    throw ConfigError(key + ": " + e.what());
  }
}

struct Field {
  std::string section;
  std::string key;
  std::function<std::string(const RunConfig&)> get;
  std::function<void(RunConfig&, const std::string&, const std::string&)> set;
};

template <typename T>
Field number(std::string section, std::string key, std::function<T&(RunConfig&)> ref) {
  Field f;
  f.section = std::move(section);
  f.key = std::move(key);
  f.get = [ref](const RunConfig& c) {
    const T& v = ref(const_cast<RunConfig&>(c));
    if constexpr (std::is_same_v<T, double>) {
      return format_double(v);
    } else if constexpr (std::is_same_v<T, bool>) {
      return std::string(v ? "true" : "false");
    } else {
      return std::to_string(v);
    }
  };
  f.set = [ref](RunConfig& c, const std::string& name, const std::string& text) {
    T& v = ref(c);
    if constexpr (std::is_same_v<T, double>) {
      v = parse_double(name, text);
    } else if constexpr (std::is_same_v<T, bool>) {
      v = parse_bool(name, text);
    } else {
      const long long n = parse_integer(name, text);
      if (n < static_cast<long long>(std::numeric_limits<T>::min()) ||
          (n > 0 && static_cast<unsigned long long>(n) >
                        static_cast<unsigned long long>(std::numeric_limits<T>::max()))) {
        throw ConfigError(name + ": value out of range");
      }
      v = static_cast<T>(n);
    }
  };
  return f;
}

#define SQ_FIELD(section, key, type, expr) \
  number<type>(section, key, [](RunConfig& c) -> type& { return expr; })

Field text_field(std::string section, std::string key,
                 std::function<std::string(const RunConfig&)> get,
                 std::function<void(RunConfig&, const std::string&)> set) {
  Field f;
  f.section = std::move(section);
  f.key = std::move(key);
  f.get = std::move(get);
  f.set = [set = std::move(set), k = f.section + "." + f.key](
              RunConfig& c, const std::string&, const std::string& text) {
    enum_value(k, [&] {
      set(c, text);
      return 0;
    });
  };
  return f;
}

const std::vector<Field>& fields() {
  static const std::vector<Field> kFields = [] {
    std::vector<Field> f;
    f.push_back(SQ_FIELD("train", "alpha", double, c.train.alpha));
    f.push_back(SQ_FIELD("train", "gamma", double, c.train.gamma));
    f.push_back(SQ_FIELD("train", "steps", int, c.train.steps));
    f.push_back(SQ_FIELD("train", "empty_threshold", int, c.train.empty_threshold));
    f.push_back(SQ_FIELD("train", "epsilon_start", double, c.train.epsilon.start));
    f.push_back(SQ_FIELD("train", "epsilon_end", double, c.train.epsilon.end));
    f.push_back(SQ_FIELD("train", "epsilon_decay_steps", int, c.train.epsilon.decay_steps));
    f.push_back(SQ_FIELD("train", "target_sync_interval", int, c.train.target_sync_interval));
    f.push_back(SQ_FIELD("train", "replay_minibatch", int, c.train.replay_minibatch));
    f.push_back(SQ_FIELD("train", "buffer_capacity", int, c.train.buffer_capacity));
    f.push_back(SQ_FIELD("train", "max_grad_norm", double, c.train.max_grad_norm));
    f.push_back(SQ_FIELD("train", "seed", std::uint64_t, c.train.seed));
    f.push_back(SQ_FIELD("train", "height_policy", bool, c.train.height_policy));
    f.push_back(text_field(
        "train", "fidelity",
        [](const RunConfig& c) { return std::string(scene::to_string(c.train.fidelity)); },
        [](RunConfig& c, const std::string& t) { c.train.fidelity = scene::parse_fidelity(t); }));
    f.push_back(text_field(
        "train", "env",
        [](const RunConfig& c) { return std::string(scene::to_string(c.train.env)); },
        [](RunConfig& c, const std::string& t) { c.train.env = scene::parse_env_kind(t); }));

    f.push_back(text_field(
        "reward", "mode",
        [](const RunConfig& c) { return std::string(agent::to_string(c.train.reward.mode)); },
        [](RunConfig& c, const std::string& t) {
          c.train.reward.mode = agent::parse_reward_mode(t);
        }));
    f.push_back(SQ_FIELD("reward", "r_p", double, c.train.reward.r_p));
    f.push_back(SQ_FIELD("reward", "delta", double, c.train.reward.delta));

    f.push_back(SQ_FIELD("scene", "workspace_side", double, c.train.scene.workspace_side));
    f.push_back(SQ_FIELD("scene", "object_size", double, c.train.scene.object_size));
    f.push_back(SQ_FIELD("scene", "object_count", int, c.train.scene.object_count));
    f.push_back(SQ_FIELD("scene", "tower_count", int, c.train.scene.tower_count));
    f.push_back(SQ_FIELD("scene", "pair_count", int, c.train.scene.pair_count));
    f.push_back(SQ_FIELD("scene", "overlap_fraction", double, c.train.scene.overlap_fraction));
    f.push_back(SQ_FIELD("scene", "novel_count", int, c.train.scene.novel_count));
    f.push_back(SQ_FIELD("scene", "random_yaw", bool, c.train.scene.random_yaw));
    f.push_back(SQ_FIELD("scene", "placement_attempts", int, c.train.scene.placement_attempts));
    f.push_back(SQ_FIELD("scene", "clearance", double, c.train.scene.clearance));

    f.push_back(SQ_FIELD("suction", "cup_radius", double, c.train.suction.cup_radius));
    f.push_back(SQ_FIELD("suction", "body_radius", double, c.train.suction.body_radius));
    f.push_back(SQ_FIELD("suction", "contact_tolerance", double,
                         c.train.suction.contact_tolerance));
    f.push_back(SQ_FIELD("suction", "descent_clearance", double,
                         c.train.suction.descent_clearance));

    f.push_back(SQ_FIELD("perception", "resolution", int, c.train.perception.resolution));
    f.push_back(SQ_FIELD("perception", "shift_pixels", int, c.train.perception.shift_pixels));
    f.push_back(text_field(
        "perception", "axis",
        [](const RunConfig& c) { return std::string(heightmap::to_string(c.train.perception.axis)); },
        [](RunConfig& c, const std::string& t) {
          c.train.perception.axis = heightmap::parse_axis(t);
        }));
    f.push_back(SQ_FIELD("perception", "threshold", double, c.train.perception.threshold));
    f.push_back(SQ_FIELD("perception", "signed_difference", bool,
                         c.train.perception.signed_difference));

    f.push_back(SQ_FIELD("network", "input_size", int, c.train.arch.input_size));
    f.push_back(text_field(
        "network", "channels",
        [](const RunConfig& c) { return format_int_list(c.train.arch.channels); },
        [](RunConfig& c, const std::string& t) {
          c.train.arch.channels = parse_int_list("network.channels", t);
        }));
    f.push_back(text_field(
        "network", "strides",
        [](const RunConfig& c) { return format_int_list(c.train.arch.strides); },
        [](RunConfig& c, const std::string& t) {
          c.train.arch.strides = parse_int_list("network.strides", t);
        }));
    f.push_back(SQ_FIELD("network", "color_offset", double, c.train.arch.color_offset));
    f.push_back(SQ_FIELD("network", "depth_scale", double, c.train.arch.depth_scale));
    f.push_back(SQ_FIELD("network", "norm_momentum", double, c.train.arch.norm_momentum));
    f.push_back(SQ_FIELD("network", "norm_epsilon", double, c.train.arch.norm_epsilon));

    f.push_back(SQ_FIELD("eval", "episodes", int, c.eval_episodes));
    f.push_back(SQ_FIELD("eval", "strict_distance", bool, c.strict_distance));
    return f;
  }();
  return kFields;
}

#undef SQ_FIELD

const Field& find_field(std::string_view section, std::string_view key) {
  for (const auto& f : fields()) {
    if (f.section == section && f.key == key) return f;
  }
  throw ConfigError("unknown config key '" + std::string(section) + "." +
                    std::string(key) + "'");
}

}  // namespace

void RunConfig::validate() const {
  try {
    train.validate();
  } catch (const ConfigError&) {
    throw;
  } catch (const std::exception& e) {
    throw ConfigError(e.what());
  }
  if (eval_episodes <= 0) throw ConfigError("eval.episodes must be positive");
}

RunConfig parse_config(std::istream& in) {
  namespace pt = boost::property_tree;
  pt::ptree tree;
  try {
    pt::read_ini(in, tree);
  } catch (const pt::ini_parser_error& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  RunConfig cfg;
  for (const auto& [section, body] : tree) {
    if (body.empty() && !body.data().empty()) {
      throw ConfigError("config: key '" + section + "' outside of a section");
    }
    for (const auto& [key, value] : body) {
      find_field(section, key).set(cfg, section + "." + key, value.get_value<std::string>());
    }
  }
  cfg.validate();
  return cfg;
}

RunConfig parse_config_text(const std::string& text) {
  std::istringstream in(text);
  return parse_config(in);
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file " + path.string());
  return parse_config(in);
}

std::string serialize_config(const RunConfig& cfg) {
  std::ostringstream out;
  std::string section;
  for (const auto& f : fields()) {
    if (f.section != section) {
      if (!section.empty()) out << '\n';
      section = f.section;
      out << '[' << section << "]\n";
    }
    out << f.key << " = " << f.get(cfg) << '\n';
  }
  return out.str();
}

std::string config_digest(const RunConfig& cfg) {
  return to_hex(fnv1a(serialize_config(cfg)));
}

void set_value(RunConfig& cfg, std::string_view dotted_key, const std::string& value) {
  const auto dot = dotted_key.find('.');
  if (dot == std::string_view::npos) {
    throw ConfigError("override key must look like section.key: '" +
                      std::string(dotted_key) + "'");
  }
  find_field(dotted_key.substr(0, dot), dotted_key.substr(dot + 1))
      .set(cfg, std::string(dotted_key), value);
}

std::vector<std::string> config_keys() {
  std::vector<std::string> out;
  for (const auto& f : fields()) out.push_back(f.section + "." + f.key);
  return out;
}

RunConfig preset(std::string_view name) {
  RunConfig cfg;
  if (name == "paper-proposed") return cfg;
  if (name == "paper-baseline") {
    cfg.train.reward.mode = agent::RewardMode::binary;
    return cfg;
  }
  throw ConfigError("unknown preset '" + std::string(name) +
                    "' (valid: paper-proposed, paper-baseline)");
}

std::vector<std::string> preset_names() { return {"paper-proposed", "paper-baseline"}; }

}  // namespace suctionq::config
