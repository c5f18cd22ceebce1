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


#include "suctionq/evalkit.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <mutex>
#include <sstream>
#include <stdexcept>
#include <thread>
#include <tuple>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

namespace suctionq::evalkit {
namespace {

using heightmap::Heightmap;

qnet::QMap empty_scores(const Heightmap& state) {
  qnet::QMap q;
  q.width = state.width;
  q.height = state.height;
  q.values.assign(state.pixel_count(), 0.0);
  return q;
}

// Score of every pixel covered by an object; table pixels stay at zero.
template <typename Fn>
qnet::QMap object_scores(const scene::Scene& scene, const Heightmap& state,
                         Fn&& score) {
  qnet::QMap q = empty_scores(state);
  for (int row = 0; row < state.height; ++row) {
    for (int col = 0; col < state.width; ++col) {
      const scene::Vec2 w =
          heightmap::pixel_to_world(col, row, state.meters_per_pixel);
      const scene::SceneObject* obj = scene::topmost_at(scene, w.x, w.y);
      if (obj == nullptr) continue;
      q.values[state.index(row, col)] = score(*obj, w);
    }
  }
  return q;
}

// Runs fn(i) for i in [0, n) on up to `jobs` threads.
void parallel_for(std::size_t n, int jobs, const std::function<void(std::size_t)>& fn) {
  const std::size_t workers =
      std::min<std::size_t>(n, static_cast<std::size_t>(std::max(jobs, 1)));
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  std::vector<std::thread> threads;
  for (std::size_t w = 0; w < workers; ++w) {
    threads.emplace_back([&] {
      for (std::size_t i = next++; i < n; i = next++) {
        try {
          fn(i);
        } catch (...) {
          std::lock_guard<std::mutex> lock(error_mutex);
          if (!error) error = std::current_exception();
        }
      }
    });
  }
  for (auto& t : threads) t.join();
  if (error) std::rethrow_exception(error);
}

double mean_of(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return v.empty() ? 0.0 : s / static_cast<double>(v.size());
}

// Sample standard deviation; 0 for fewer than two values.
double std_of(const std::vector<double>& v) {
  if (v.size() < 2) return 0.0;
  const double m = mean_of(v);
  double s = 0.0;
  for (double x : v) s += (x - m) * (x - m);
  return std::sqrt(s / static_cast<double>(v.size() - 1));
}

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

bool is_fixture(std::string_view method) {
  return method == "center" || method == "bottom-first";
}

bool parse_bool(const std::string& text) {
  if (text == "true" || text == "1" || text == "yes" || text == "on") return true;
  if (text == "false" || text == "0" || text == "no" || text == "off") return false;
  throw ConfigError("expected a boolean, got '" + text + "'");
}

template <typename T>
T parse_count(const std::string& key, const std::string& text) {
  T v{};
  const char* end = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(text.data(), end, v);
  if (ec != std::errc() || ptr != end) {
    throw ConfigError("matrix: " + key + ": expected an integer, got '" + text + "'");
  }
  return v;
}

std::vector<std::string> split_list(const std::string& text) {
  std::vector<std::string> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    const auto b = item.find_first_not_of(" \t");
    const auto e = item.find_last_not_of(" \t");
    if (b == std::string::npos) continue;
    out.push_back(item.substr(b, e - b + 1));
  }
  return out;
}

}  // namespace

qnet::QMap QPolicy::scores(const scene::Scene&, const Heightmap& state) const {
  return qnet::forward(params_, state);
}

qnet::QMap CenterPolicy::scores(const scene::Scene& scene,
                                const Heightmap& state) const {
  return object_scores(scene, state, [](const scene::SceneObject& obj, scene::Vec2 w) {
    return 1.0 + 10.0 * obj.top() - scene::distance(w, obj.centroid());
  });
}

qnet::QMap BottomFirstPolicy::scores(const scene::Scene& scene,
                                     const Heightmap& state) const {
  return object_scores(scene, state, [](const scene::SceneObject& obj, scene::Vec2 w) {
    return 2.0 - 10.0 * obj.base_z - scene::distance(w, obj.centroid());
  });
}

std::unique_ptr<Policy> make_fixture_policy(std::string_view name) {
  if (name == "center") return std::make_unique<CenterPolicy>();
  if (name == "bottom-first") return std::make_unique<BottomFirstPolicy>();
  throw ConfigError("unknown fixture policy '" + std::string(name) +
                    "' (valid: center, bottom-first)");
}

void EvalConfig::validate() const {
  if (episodes <= 0) throw std::invalid_argument("episodes must be positive");
}

nlohmann::json to_json(const EvalConfig& cfg) {
  return {
      {"env", std::string(scene::to_string(cfg.env))},
      {"fidelity", std::string(scene::to_string(cfg.fidelity))},
      {"height_policy", cfg.height_policy},
      {"episodes", cfg.episodes},
      {"seed", cfg.seed},
      {"strict_distance", cfg.strict_distance},
      {"object_count", cfg.scene.object_count},
      {"object_size", cfg.scene.object_size},
      {"resolution", cfg.perception.resolution},
      {"shift_pixels", cfg.perception.shift_pixels},
      {"axis", std::string(heightmap::to_string(cfg.perception.axis))},
      {"threshold", cfg.perception.threshold},
      {"signed_difference", cfg.perception.signed_difference},
  };
}

void EvalReport::finalize() {
  s_r = n_i > 0 ? 100.0 * n_s / n_i : 0.0;
  d_r = n_i > 0 ? 100.0 * n_d / n_i : 0.0;
  collision_rate = n_i > 0 ? 100.0 * n_collisions / n_i : 0.0;
}

nlohmann::json to_json(const EvalReport& report) {
  nlohmann::json attempts = nlohmann::json::array();
  for (const auto& a : report.attempts) {
    attempts.push_back({
        {"episode", a.episode},
        {"attempt", a.attempt},
        {"px", a.action.col},
        {"py", a.action.row},
        {"psi", a.psi ? nlohmann::json(*a.psi) : nlohmann::json(nullptr)},
        {"success", a.success},
        {"collision", a.collision},
        {"objects_before", a.objects_before},
    });
  }
  return {
      {"method", report.method},
      {"config_digest", report.config_digest},
      {"env", std::string(scene::to_string(report.env))},
      {"fidelity", std::string(scene::to_string(report.fidelity))},
      {"height_policy", report.height_policy},
      {"seed", report.seed},
      {"N_i", report.n_i},
      {"N_s", report.n_s},
      {"N_d", report.n_d},
      {"N_collisions", report.n_collisions},
      {"S_r", report.s_r},
      {"D_r", report.d_r},
      {"collision_rate", report.collision_rate},
      {"train_success_curve", report.train_success_curve},
      {"train_distance_curve", report.train_distance_curve},
      {"attempts", attempts},
  };
}

EvalReport evaluate(const qnet::QNetworkParams& params, const EvalConfig& cfg) {
  QPolicy policy(params);
  return evaluate(policy, cfg);
}

EvalReport evaluate(const Policy& policy, const EvalConfig& cfg) {
  cfg.validate();
  const auto started = std::chrono::steady_clock::now();
  EvalReport report;
  report.method = policy.name();
  report.config_digest = to_hex(fnv1a(to_json(cfg).dump()));
  report.env = cfg.env;
  report.fidelity = cfg.fidelity;
  report.height_policy = cfg.height_policy;
  report.seed = cfg.seed;

  for (int episode = 0; episode < cfg.episodes; ++episode) {
    scene::Scene world = scene::reposition(
        scene::Scene{{}, cfg.scene.workspace_side, 0}, cfg.scene.object_count,
        derive_seed(cfg.seed, "eval.scene", static_cast<std::uint64_t>(episode)),
        cfg.env, cfg.scene);
    const int limit = 2 * static_cast<int>(world.object_count());
    for (int attempt = 0; attempt < limit && world.object_count() > 0; ++attempt) {
      const Heightmap state =
          heightmap::render_heightmaps(world, cfg.perception.resolution);
      const heightmap::ClutterMap mask =
          agent::policy_mask(state, cfg.perception, cfg.height_policy);
      const qnet::QMap q = policy.scores(world, state);
      const Pixel pixel = agent::masked_argmax(q, mask);
      const scene::Vec2 w =
          heightmap::pixel_to_world(pixel.col, pixel.row, state.meters_per_pixel);
      const double z = heightmap::suction_height(state, pixel.col, pixel.row);

      AttemptRecord rec;
      rec.episode = episode;
      rec.attempt = attempt;
      rec.action = pixel;
      rec.objects_before = static_cast<int>(world.object_count());
      auto [outcome, next] =
          scene::execute_suction(world, w.x, w.y, z, cfg.fidelity, cfg.suction);
      rec.psi = outcome.center_distance;
      rec.success = outcome.success;
      rec.collision = outcome.collision;
      world = std::move(next);

      ++report.n_i;
      if (rec.success) ++report.n_s;
      if (rec.collision) ++report.n_collisions;
      if (rec.psi && *rec.psi < kDistanceThreshold &&
          (!cfg.strict_distance || rec.success)) {
        ++report.n_d;
      }
      report.attempts.push_back(rec);
    }
  }
  report.finalize();
  report.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
  return report;
}

std::vector<double> rolling_rate(const agent::StepLog& log, int window,
                                 RatePredicate predicate) {
  if (window < 1) throw std::invalid_argument("window must be >= 1");
  std::vector<int> hits;
  for (const auto& r : log) {
    if (r.reposition) continue;
    const bool hit = predicate == RatePredicate::success
                         ? r.success
                         : (r.psi && *r.psi < kDistanceThreshold);
    hits.push_back(hit ? 1 : 0);
  }
  std::vector<double> series;
  if (hits.empty()) return series;
  const std::size_t w = std::min<std::size_t>(static_cast<std::size_t>(window), hits.size());
  int sum = 0;
  for (std::size_t i = 0; i < hits.size(); ++i) {
    sum += hits[i];
    if (i >= w) sum -= hits[i - w];
    if (i + 1 >= w) series.push_back(100.0 * sum / static_cast<double>(w));
  }
  return series;
}

std::string method_label(const MatrixCell& cell) {
  return cell.height_policy ? cell.method : cell.method + "-no-policy";
}

MatrixSpec parse_matrix(std::istream& in) {
  namespace pt = boost::property_tree;
  pt::ptree tree;
  try {
    pt::read_ini(in, tree);
  } catch (const pt::ini_parser_error& e) {
    throw ConfigError(std::string("matrix: ") + e.what());
  }
  MatrixSpec spec;
  spec.cells.clear();
  for (const auto& [section, body] : tree) {
    if (section == "matrix") {
      for (const auto& [key, value] : body) {
        const std::string v = value.get_value<std::string>();
        if (key == "name") {
          spec.name = v;
        } else if (key == "seeds") {
          spec.seeds.clear();
          for (const auto& s : split_list(v)) spec.seeds.push_back(parse_count<std::uint64_t>(key, s));
        } else if (key == "episodes") {
          spec.episodes = parse_count<int>(key, v);
        } else if (key == "curve_window") {
          spec.curve_window = parse_count<int>(key, v);
        } else if (key == "steps") {
          spec.train.steps = parse_count<int>(key, v);
        } else if (key == "strict_distance") {
          spec.strict_distance = parse_bool(v);
        } else {
          throw ConfigError("matrix: unknown key '" + key + "' in [matrix]");
        }
      }
    } else if (section.rfind("cell.", 0) == 0) {
      MatrixCell cell;
      cell.name = section.substr(5);
      for (const auto& [key, value] : body) {
        const std::string v = value.get_value<std::string>();
        if (key == "method") {
          if (v != "proposed" && v != "visual-grasping" && !is_fixture(v)) {
            throw ConfigError("matrix: unknown method '" + v +
                              "' (valid: proposed, visual-grasping, center, bottom-first)");
          }
          cell.method = v;
        } else if (key == "height_policy") {
          cell.height_policy = parse_bool(v);
        } else if (key == "env") {
          try {
            cell.env = scene::parse_env_kind(v);
          } catch (const std::invalid_argument& e) {
            throw ConfigError(std::string("matrix: ") + e.what());
          }
        } else if (key == "fidelity") {
          try {
            cell.fidelity = scene::parse_fidelity(v);
          } catch (const std::invalid_argument& e) {
            throw ConfigError(std::string("matrix: ") + e.what());
          }
        } else {
          throw ConfigError("matrix: unknown key '" + key + "' in [" + section + "]");
        }
      }
      spec.cells.push_back(cell);
    } else {
      throw ConfigError("matrix: unknown section [" + section + "]");
    }
  }
  if (spec.cells.empty()) throw ConfigError("matrix: no [cell.*] sections");
  if (spec.seeds.empty()) throw ConfigError("matrix: empty seed list");
  if (spec.episodes <= 0) throw ConfigError("matrix: episodes must be positive");
  if (spec.curve_window < 1) throw ConfigError("matrix: curve_window must be >= 1");
  return spec;
}

MatrixSpec load_matrix(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read matrix file " + path.string());
  return parse_matrix(in);
}

MatrixResult run_matrix(const MatrixSpec& spec, int jobs) {
  if (spec.cells.empty()) throw std::invalid_argument("matrix has no cells");
  if (spec.seeds.empty()) throw std::invalid_argument("matrix has no seeds");

  // Distinct training runs: (reward mode, height policy, seed).
  using TrainKey = std::tuple<agent::RewardMode, bool, std::uint64_t>;
  std::map<TrainKey, std::size_t> train_index;
  std::vector<TrainKey> train_keys;
  for (const auto& cell : spec.cells) {
    if (is_fixture(cell.method)) continue;
    const auto mode = cell.method == "proposed" ? agent::RewardMode::shaped
                                                : agent::RewardMode::binary;
    for (auto seed : spec.seeds) {
      TrainKey key{mode, cell.height_policy, seed};
      if (train_index.emplace(key, train_keys.size()).second) train_keys.push_back(key);
    }
  }
  std::vector<agent::TrainResult> trained(train_keys.size());
  parallel_for(train_keys.size(), jobs, [&](std::size_t i) {
    agent::TrainConfig cfg = spec.train;
    std::tie(cfg.reward.mode, cfg.height_policy, cfg.seed) = train_keys[i];
    trained[i] = agent::train(cfg);
  });

  const std::size_t n = spec.cells.size() * spec.seeds.size();
  std::vector<EvalReport> reports(n);
  parallel_for(n, jobs, [&](std::size_t i) {
    const MatrixCell& cell = spec.cells[i / spec.seeds.size()];
    const std::uint64_t seed = spec.seeds[i % spec.seeds.size()];
    EvalConfig ec;
    ec.env = cell.env;
    ec.fidelity = cell.fidelity;
    ec.height_policy = cell.height_policy;
    ec.episodes = spec.episodes;
    ec.seed = seed;
    ec.strict_distance = spec.strict_distance;
    ec.scene = spec.train.scene;
    ec.suction = spec.train.suction;
    ec.perception = spec.train.perception;
    EvalReport report;
    if (is_fixture(cell.method)) {
      report = evaluate(*make_fixture_policy(cell.method), ec);
    } else {
      const auto mode = cell.method == "proposed" ? agent::RewardMode::shaped
                                                  : agent::RewardMode::binary;
      const auto& tr = trained[train_index.at(TrainKey{mode, cell.height_policy, seed})];
      report = evaluate(tr.params, ec);
      report.train_success_curve =
          rolling_rate(tr.log, spec.curve_window, RatePredicate::success);
      report.train_distance_curve =
          rolling_rate(tr.log, spec.curve_window, RatePredicate::distance);
    }
    report.method = method_label(cell);
    report.config_digest = to_hex(fnv1a(spec.config_digest + "|" + report.method + "|" +
                                        to_json(ec).dump()));
    reports[i] = std::move(report);
  });

  MatrixResult result;
  result.aggregates = aggregate(reports);
  result.reports = std::move(reports);
  return result;
}

std::vector<Aggregate> aggregate(const std::vector<EvalReport>& reports) {
  std::vector<Aggregate> out;
  std::vector<std::array<std::vector<double>, 3>> values;
  for (const auto& r : reports) {
    const std::string env(scene::to_string(r.env));
    const std::string fidelity(scene::to_string(r.fidelity));
    auto it = std::find_if(out.begin(), out.end(), [&](const Aggregate& a) {
      return a.method == r.method && a.env == env && a.fidelity == fidelity;
    });
    std::size_t k;
    if (it == out.end()) {
      out.push_back(Aggregate{r.method, env, fidelity});
      values.emplace_back();
      k = out.size() - 1;
    } else {
      k = static_cast<std::size_t>(it - out.begin());
    }
    values[k][0].push_back(r.s_r);
    values[k][1].push_back(r.d_r);
    values[k][2].push_back(r.collision_rate);
  }
  for (std::size_t k = 0; k < out.size(); ++k) {
    out[k].seeds = static_cast<int>(values[k][0].size());
    out[k].s_r_mean = mean_of(values[k][0]);
    out[k].s_r_std = std_of(values[k][0]);
    out[k].d_r_mean = mean_of(values[k][1]);
    out[k].d_r_std = std_of(values[k][1]);
    out[k].collision_rate_mean = mean_of(values[k][2]);
    out[k].collision_rate_std = std_of(values[k][2]);
  }
  return out;
}

namespace {

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << text;
  if (!out) throw std::runtime_error("write failed: " + path.string());
}

// Mean curve per method over the seeds that carry one.
std::vector<std::pair<std::string, std::array<std::vector<double>, 2>>> mean_curves(
    const std::vector<EvalReport>& reports) {
  std::vector<std::pair<std::string, std::array<std::vector<double>, 2>>> out;
  std::vector<std::vector<std::uint64_t>> seen;
  std::vector<int> counts;
  for (const auto& r : reports) {
    if (r.train_success_curve.empty()) continue;
    auto it = std::find_if(out.begin(), out.end(),
                           [&](const auto& p) { return p.first == r.method; });
    std::size_t k;
    if (it == out.end()) {
      out.push_back({r.method, {}});
      seen.emplace_back();
      counts.push_back(0);
      k = out.size() - 1;
    } else {
      k = static_cast<std::size_t>(it - out.begin());
    }
    // A trained agent is evaluated in several cells; count it once.
    if (std::find(seen[k].begin(), seen[k].end(), r.seed) != seen[k].end()) continue;
    seen[k].push_back(r.seed);
    ++counts[k];
    const std::vector<double>* src[2] = {&r.train_success_curve, &r.train_distance_curve};
    for (int c = 0; c < 2; ++c) {
      auto& dst = out[k].second[c];
      const std::size_t len = std::min(dst.empty() ? src[c]->size() : dst.size(),
                                       src[c]->size());
      dst.resize(len, 0.0);
      for (std::size_t i = 0; i < len; ++i) dst[i] += (*src[c])[i];
    }
  }
  for (std::size_t k = 0; k < out.size(); ++k) {
    for (auto& curve : out[k].second) {
      for (double& v : curve) v /= counts[k];
    }
  }
  return out;
}

std::string curves_svg(const std::vector<EvalReport>& reports) {
  const auto curves = mean_curves(reports);
  const double w = 640, h = 360, left = 50, right = 160, top = 20, bottom = 40;
  const double pw = w - left - right, ph = h - top - bottom;
  std::size_t longest = 1;
  for (const auto& c : curves) longest = std::max(longest, c.second[0].size());
  static const char* kColors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd",
                                  "#ff7f0e", "#8c564b", "#e377c2", "#17becf"};
  std::ostringstream svg;
  svg << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
      << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << w << "\" height=\"" << h
      << "\" viewBox=\"0 0 " << w << ' ' << h << "\">\n"
      << "<rect x=\"0\" y=\"0\" width=\"" << w << "\" height=\"" << h
      << "\" fill=\"white\"/>\n"
      << "<g stroke=\"black\" fill=\"none\">\n"
      << "<line x1=\"" << left << "\" y1=\"" << top + ph << "\" x2=\"" << left + pw
      << "\" y2=\"" << top + ph << "\"/>\n"
      << "<line x1=\"" << left << "\" y1=\"" << top << "\" x2=\"" << left << "\" y2=\""
      << top + ph << "\"/>\n</g>\n"
      << "<g font-family=\"sans-serif\" font-size=\"11\">\n";
  for (int pct = 0; pct <= 100; pct += 25) {
    svg << "<text x=\"" << left - 6 << "\" y=\"" << fmt(top + ph * (1 - pct / 100.0) + 4)
        << "\" text-anchor=\"end\">" << pct << "</text>\n";
  }
  svg << "<text x=\"" << left + pw / 2 << "\" y=\"" << h - 8
      << "\" text-anchor=\"middle\">suction attempt (window end)</text>\n</g>\n";
  for (std::size_t k = 0; k < curves.size(); ++k) {
    const char* color = kColors[k % std::size(kColors)];
    for (int c = 0; c < 2; ++c) {
      const auto& curve = curves[k].second[c];
      if (curve.empty()) continue;
      svg << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.5\"";
      if (c == 1) svg << " stroke-dasharray=\"5,3\"";
      svg << " points=\"";
      for (std::size_t i = 0; i < curve.size(); ++i) {
        const double x = left + pw * (longest > 1 ? static_cast<double>(i) / (longest - 1) : 0.0);
        const double y = top + ph * (1 - curve[i] / 100.0);
        svg << (i ? " " : "") << fmt(x) << ',' << fmt(y);
      }
      svg << "\"/>\n";
      svg << "<text x=\"" << left + pw + 8 << "\" y=\"" << top + 14 * (2 * k + c + 1)
          << "\" font-family=\"sans-serif\" font-size=\"11\" fill=\"" << color << "\">"
          << curves[k].first << (c == 0 ? " S_r" : " D_r") << "</text>\n";
    }
  }
  svg << "</svg>\n";
  return svg.str();
}

}  // namespace

void emit_report(const std::vector<EvalReport>& reports,
                 const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw std::runtime_error("cannot create " + dir.string() + ": " + ec.message());

  const auto aggregates = aggregate(reports);
  std::ostringstream csv;
  csv << "method,env,fidelity,seeds,s_r_mean,s_r_std,d_r_mean,d_r_std,"
         "collision_rate_mean,collision_rate_std\n";
  for (const auto& a : aggregates) {
    csv << a.method << ',' << a.env << ',' << a.fidelity << ',' << a.seeds << ','
        << fmt(a.s_r_mean) << ',' << fmt(a.s_r_std) << ',' << fmt(a.d_r_mean) << ','
        << fmt(a.d_r_std) << ',' << fmt(a.collision_rate_mean) << ','
        << fmt(a.collision_rate_std) << '\n';
  }
  write_text(dir / "aggregate.csv", csv.str());

  std::ostringstream col;
  col << "method,env,collision_rate_mean,collision_rate_std\n";
  for (const auto& a : aggregates) {
    col << a.method << ',' << a.env << ',' << fmt(a.collision_rate_mean) << ','
        << fmt(a.collision_rate_std) << '\n';
  }
  write_text(dir / "collision.csv", col.str());

  for (const auto& r : reports) {
    const std::string name = r.method + "_" + std::string(scene::to_string(r.env)) + "_" +
                             std::string(scene::to_string(r.fidelity)) + "_" +
                             std::to_string(r.seed) + ".json";
    write_text(dir / name, to_json(r).dump(2) + "\n");
  }
  write_text(dir / "curves.svg", curves_svg(reports));
}

}  // namespace suctionq::evalkit
