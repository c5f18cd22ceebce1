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


#include "cli.hpp"

#include <chrono>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <memory>
#include <optional>
#include <ostream>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"
#include "suctionq/agent.hpp"
#include "suctionq/config.hpp"
#include "suctionq/evalkit.hpp"
#include "suctionq/heightmap.hpp"
#include "suctionq/qnet.hpp"
#include "suctionq/scene.hpp"

namespace suctionq::cli {
namespace {

namespace fs = std::filesystem;

// Flags shared by the commands that build a RunConfig.
struct ConfigFlags {
  std::string config_path;
  std::string preset;
  std::vector<std::string> overrides;
  std::optional<std::uint64_t> seed;
  std::optional<int> steps;
  std::string env;
  std::string fidelity;
  bool no_height_policy = false;
};

void add_config_flags(CLI::App* cmd, ConfigFlags& f, bool training) {
  cmd->add_option("--config", f.config_path, "INI run configuration");
  cmd->add_option("--preset", f.preset, "paper-proposed or paper-baseline");
  cmd->add_option("--set", f.overrides, "Override one key, as section.key=value");
  cmd->add_option("--seed", f.seed, "Master seed");
  if (training) cmd->add_option("--steps", f.steps, "Training steps");
  cmd->add_option("--env", f.env, "Environment: " + scene::env_kind_names());
  cmd->add_option("--fidelity", f.fidelity, "Suction fidelity: sim or real");
  cmd->add_flag("--no-height-policy", f.no_height_policy,
                "Select actions over all pixels instead of the clutter map");
}

config::RunConfig build_config(const ConfigFlags& f) {
  if (!f.config_path.empty() && !f.preset.empty()) {
    throw ConfigError("--config and --preset are mutually exclusive");
  }
  config::RunConfig cfg = !f.config_path.empty() ? config::load_config(f.config_path)
                          : !f.preset.empty()    ? config::preset(f.preset)
                                                 : config::RunConfig{};
  for (const auto& kv : f.overrides) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos) throw ConfigError("--set expects section.key=value");
    config::set_value(cfg, kv.substr(0, eq), kv.substr(eq + 1));
  }
  if (f.seed) cfg.train.seed = *f.seed;
  if (f.steps) cfg.train.steps = *f.steps;
  if (!f.env.empty()) config::set_value(cfg, "train.env", f.env);
  if (!f.fidelity.empty()) config::set_value(cfg, "train.fidelity", f.fidelity);
  if (f.no_height_policy) cfg.train.height_policy = false;
  cfg.validate();
  return cfg;
}

void write_file(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << text;
}

void ensure_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw std::runtime_error("cannot create " + dir.string() + ": " + ec.message());
}

evalkit::EvalConfig eval_config(const config::RunConfig& cfg, int episodes) {
  evalkit::EvalConfig ec;
  ec.env = cfg.train.env;
  ec.fidelity = cfg.train.fidelity;
  ec.height_policy = cfg.train.height_policy;
  ec.episodes = episodes > 0 ? episodes : cfg.eval_episodes;
  ec.seed = cfg.train.seed;
  ec.strict_distance = cfg.strict_distance;
  ec.scene = cfg.train.scene;
  ec.suction = cfg.train.suction;
  ec.perception = cfg.train.perception;
  return ec;
}

int cmd_train(const ConfigFlags& flags, const std::string& out_dir, std::ostream& out) {
  const config::RunConfig cfg = build_config(flags);
  const fs::path dir(out_dir);
  ensure_dir(dir);
  const agent::TrainResult result = agent::train(cfg.train);
  qnet::save_params(result.params, dir / "checkpoint.sqnet");
  {
    std::ofstream csv(dir / "steps.csv", std::ios::binary);
    if (!csv) throw std::runtime_error("cannot write steps.csv");
    agent::write_step_log_csv(result.log, csv);
  }
  write_file(dir / "config.ini", config::serialize_config(cfg));
  const auto s = evalkit::rolling_rate(result.log, 50, evalkit::RatePredicate::success);
  const auto d = evalkit::rolling_rate(result.log, 50, evalkit::RatePredicate::distance);
  nlohmann::json summary = {
      {"config_digest", config::config_digest(cfg)},
      {"steps", cfg.train.steps},
      {"params_version", result.params.version},
      {"final_rolling_S_r", s.empty() ? nlohmann::json(nullptr) : nlohmann::json(s.back())},
      {"final_rolling_D_r", d.empty() ? nlohmann::json(nullptr) : nlohmann::json(d.back())},
  };
  write_file(dir / "run.json", summary.dump(2) + "\n");
  out << summary.dump() << '\n';
  return kExitOk;
}

int cmd_eval(const ConfigFlags& flags, const std::string& checkpoint,
             const std::string& policy_name, int episodes, const std::string& out_dir,
             std::ostream& out) {
  if (checkpoint.empty() == policy_name.empty()) {
    throw ConfigError("eval needs exactly one of --checkpoint and --policy");
  }
  const config::RunConfig cfg = build_config(flags);
  const evalkit::EvalConfig ec = eval_config(cfg, episodes);
  evalkit::EvalReport report;
  if (!checkpoint.empty()) {
    if (!fs::exists(checkpoint)) throw BadCheckpoint("checkpoint not found: " + checkpoint);
    const qnet::QNetworkParams params = qnet::load_params(checkpoint);
    report = evalkit::evaluate(params, ec);
  } else {
    report = evalkit::evaluate(*evalkit::make_fixture_policy(policy_name), ec);
  }
  report.config_digest = to_hex(fnv1a(config::config_digest(cfg) + "|" + report.config_digest));
  if (!out_dir.empty()) evalkit::emit_report({report}, out_dir);
  nlohmann::json line = {
      {"method", report.method},
      {"env", std::string(scene::to_string(report.env))},
      {"fidelity", std::string(scene::to_string(report.fidelity))},
      {"height_policy", report.height_policy},
      {"seed", report.seed},
      {"N_i", report.n_i},
      {"S_r", report.s_r},
      {"D_r", report.d_r},
      {"collision_rate", report.collision_rate},
      {"config_digest", report.config_digest},
  };
  out << line.dump() << '\n';
  return kExitOk;
}

std::string utc_stamp() {
  const std::time_t now =
      std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y%m%dT%H%M%SZ", &tm);
  return buf;
}

int cmd_matrix(const ConfigFlags& flags, const std::string& spec_path,
               const std::string& out_dir, int jobs, bool dry_run, std::ostream& out) {
  const config::RunConfig cfg = build_config(flags);
  evalkit::MatrixSpec spec = evalkit::load_matrix(spec_path);
  const int matrix_steps = spec.train.steps;
  const bool steps_in_matrix = matrix_steps != agent::TrainConfig{}.steps;
  spec.train = cfg.train;
  if (steps_in_matrix) spec.train.steps = matrix_steps;
  if (flags.steps) spec.train.steps = *flags.steps;
  if (flags.seed) spec.seeds = {*flags.seed};
  spec.config_digest = config::config_digest(cfg);

  if (dry_run) {
    for (const auto& cell : spec.cells) {
      for (auto seed : spec.seeds) {
        out << cell.name << ' ' << evalkit::method_label(cell) << ' '
            << scene::to_string(cell.env) << ' ' << scene::to_string(cell.fidelity)
            << " seed=" << seed << '\n';
      }
    }
    return kExitOk;
  }
  const evalkit::MatrixResult result = evalkit::run_matrix(spec, jobs);
  const fs::path dir = fs::path(out_dir) / (spec.name + "_" + utc_stamp());
  evalkit::emit_report(result.reports, dir);
  write_file(dir / "config.ini", config::serialize_config(cfg));
  out << nlohmann::json{{"out", dir.string()},
                        {"reports", result.reports.size()},
                        {"aggregates", result.aggregates.size()}}
             .dump()
      << '\n';
  return kExitOk;
}

int cmd_render(const ConfigFlags& flags, const std::string& scene_path,
               const std::string& out_dir, std::ostream& out) {
  const config::RunConfig cfg = build_config(flags);
  scene::Scene world;
  if (!scene_path.empty()) {
    std::ifstream in(scene_path);
    if (!in) throw std::runtime_error("cannot read scene " + scene_path);
    nlohmann::json doc;
    try {
      doc = nlohmann::json::parse(in);
    } catch (const nlohmann::json::exception& e) {
      throw std::runtime_error("bad scene JSON: " + std::string(e.what()));
    }
    world = scene::scene_from_json(doc);
  } else {
    world = scene::reposition(scene::Scene{{}, cfg.train.scene.workspace_side, 0},
                              cfg.train.scene.object_count,
                              derive_seed(cfg.train.seed, "render"), cfg.train.env,
                              cfg.train.scene);
  }
  const fs::path dir(out_dir);
  ensure_dir(dir);
  const heightmap::Heightmap map =
      heightmap::render_heightmaps(world, cfg.train.perception.resolution);
  heightmap::write_color_ppm(map, dir / "color.ppm");
  heightmap::write_depth_pgm(map, dir / "depth.pgm");
  heightmap::write_clutter_pgm(heightmap::clutter_map(map, cfg.train.perception),
                               dir / "clutter.pgm");
  heightmap::write_sidecar(map, dir / "heightmap.json");
  write_file(dir / "scene.json", scene::to_json(world).dump(2) + "\n");
  out << nlohmann::json{{"out", dir.string()}, {"objects", world.object_count()}}.dump()
      << '\n';
  return kExitOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Pixel-wise suction Q-learning on a simulated tabletop"};
  app.name("suctionq");
  app.require_subcommand(1);

  ConfigFlags train_flags, eval_flags, matrix_flags, render_flags;
  std::string train_out = ".", eval_out, matrix_out = ".", render_out = ".";
  std::string checkpoint, policy_name, matrix_path, scene_path;
  int episodes = 0;
  int jobs = 1;
  bool dry_run = false;

  CLI::App* train = app.add_subcommand("train", "Train an agent; writes a checkpoint and step log");
  add_config_flags(train, train_flags, true);
  train->add_option("--out", train_out, "Output directory");

  CLI::App* eval = app.add_subcommand("eval", "Greedy evaluation of a checkpoint or fixture policy");
  add_config_flags(eval, eval_flags, false);
  eval->add_option("--checkpoint", checkpoint, "Checkpoint written by train");
  eval->add_option("--policy", policy_name, "Fixture policy: center or bottom-first");
  eval->add_option("--episodes", episodes, "Evaluation episodes")->check(CLI::PositiveNumber);
  eval->add_option("--out", eval_out, "Write the report files here");

  CLI::App* matrix = app.add_subcommand("matrix", "Train and evaluate an experiment matrix");
  add_config_flags(matrix, matrix_flags, true);
  matrix->add_option("spec", matrix_path, "Matrix file")->required();
  matrix->add_option("--out", matrix_out, "Parent of the timestamped report directory");
  matrix->add_option("--jobs", jobs, "Concurrent cells")->check(CLI::PositiveNumber);
  matrix->add_flag("--dry-run", dry_run, "Print the cell list and exit");

  CLI::App* render = app.add_subcommand("render", "Render heightmaps of a scene");
  add_config_flags(render, render_flags, false);
  render->add_option("--scene", scene_path, "Scene JSON; default spawns --env");
  render->add_option("--out", render_out, "Output directory");

  std::vector<std::string> argv(args.rbegin(), args.rend());
  try {
    app.parse(argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n';
    err << "run with --help for usage\n";
    return kExitUsage;
  }

  try {
    if (train->parsed()) return cmd_train(train_flags, train_out, out);
    if (eval->parsed()) {
      return cmd_eval(eval_flags, checkpoint, policy_name, episodes, eval_out, out);
    }
    if (matrix->parsed()) {
      return cmd_matrix(matrix_flags, matrix_path, matrix_out, jobs, dry_run, out);
    }
    if (render->parsed()) return cmd_render(render_flags, scene_path, render_out, out);
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitRuntime;
  }
  return kExitUsage;
}

}  // namespace suctionq::cli
