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

#include "suctionq/qnet.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>

namespace suctionq::qnet {
namespace {

using heightmap::Heightmap;
using heightmap::Pixel;

enum Slot : std::size_t {
  kConvWeight = 0,
  kConvBias = 1,
  kGamma = 2,
  kBeta = 3,
  kRunningMean = 4,
  kRunningVar = 5,
};

struct Trace {
  Tensor input;
  std::vector<int> sizes;        // spatial extent entering each block, then after the last
  std::vector<Window> windows;   // computed rectangle of each block output
  std::vector<Tensor> pre_norm;
  std::vector<Tensor> activation;
  Window head_window;
  Tensor head;
  Tensor output;
};

std::vector<int> spatial_sizes(const ArchConfig& arch) {
  std::vector<int> sizes{arch.input_size};
  for (int s : arch.strides) {
    sizes.push_back(conv_output_extent(sizes.back(), ArchConfig::kKernel, s, 1));
  }
  return sizes;
}

void check_state(const ArchConfig& arch, const Heightmap& state) {
  if (state.width != arch.input_size || state.height != arch.input_size ||
      state.depth.size() != state.pixel_count() ||
      state.color.size() != 3 * state.pixel_count()) {
    throw ShapeMismatch("bad input shape: expected " +
                        std::to_string(arch.input_size) + "x" +
                        std::to_string(arch.input_size) + " heightmaps");
  }
}

Trace run_forward(const QNetworkParams& params, const Heightmap& state,
                  const Window& out_window) {
  const ArchConfig& arch = params.arch;
  check_state(arch, state);
  Trace t;
  t.input = encode_state(arch, state);
  t.sizes = spatial_sizes(arch);
  const std::size_t blocks = params.block_count();
  const int feature = t.sizes.back();
  const int full = arch.input_size;

  t.head_window = upsample_input_window(out_window, feature, feature, full, full);
  t.windows.resize(blocks);
  t.windows[blocks - 1] = t.head_window;
  for (std::size_t i = blocks - 1; i > 0; --i) {
    t.windows[i - 1] = conv_input_window(t.windows[i], ArchConfig::kKernel,
                                         arch.strides[i], 1, t.sizes[i], t.sizes[i]);
  }

  t.pre_norm.reserve(blocks);
  t.activation.reserve(blocks);
  const Tensor* x = &t.input;
  for (std::size_t i = 0; i < blocks; ++i) {
    const int ch = arch.channels[i];
    const int size = t.sizes[i + 1];
    const Window& w = t.windows[i];
    t.pre_norm.emplace_back(std::vector<int>{ch, size, size});
    t.activation.emplace_back(std::vector<int>{ch, size, size});
    Tensor& z = t.pre_norm.back();
    Tensor& a = t.activation.back();
    conv2d_forward(*x, params.block(i, kConvWeight), params.block(i, kConvBias),
                   arch.strides[i], 1, w, z);
    const Tensor& gamma = params.block(i, kGamma);
    const Tensor& beta = params.block(i, kBeta);
    const Tensor& mean = params.block(i, kRunningMean);
    const Tensor& var = params.block(i, kRunningVar);
    for (int c = 0; c < ch; ++c) {
      const double scale = gamma[c] / std::sqrt(var[c] + arch.norm_epsilon);
      const double shift = beta[c] - mean[c] * scale;
      for (int r = w.r0; r < w.r1; ++r) {
        for (int col = w.c0; col < w.c1; ++col) {
          a.at(c, r, col) = std::max(z.at(c, r, col) * scale + shift, 0.0);
        }
      }
    }
    x = &a;
  }
  t.head = Tensor({1, feature, feature});
  conv2d_forward(*x, params.head_weight(), params.head_bias(), 1, 0,
                 t.head_window, t.head);
  t.output = Tensor({1, full, full});
  bilinear_upsample_forward(t.head, out_window, t.output);
  return t;
}

void write_u32(std::ostream& out, std::uint32_t v) {
  unsigned char b[4];
  for (int i = 0; i < 4; ++i) b[i] = static_cast<unsigned char>((v >> (8 * i)) & 0xff);
  out.write(reinterpret_cast<const char*>(b), 4);
}

void write_f64(std::ostream& out, double v) {
  const auto bits = std::bit_cast<std::uint64_t>(v);
  unsigned char b[8];
  for (int i = 0; i < 8; ++i) b[i] = static_cast<unsigned char>((bits >> (8 * i)) & 0xff);
  out.write(reinterpret_cast<const char*>(b), 8);
}

void read_exact(std::istream& in, void* dst, std::size_t n) {
  in.read(static_cast<char*>(dst), static_cast<std::streamsize>(n));
  if (static_cast<std::size_t>(in.gcount()) != n) {
    throw BadCheckpoint("bad checkpoint: truncated file");
  }
}

std::uint32_t read_u32(std::istream& in) {
  unsigned char b[4];
  read_exact(in, b, 4);
  std::uint32_t v = 0;
  for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(b[i]) << (8 * i);
  return v;
}

double read_f64(std::istream& in) {
  unsigned char b[8];
  read_exact(in, b, 8);
  std::uint64_t bits = 0;
  for (int i = 0; i < 8; ++i) bits |= static_cast<std::uint64_t>(b[i]) << (8 * i);
  return std::bit_cast<double>(bits);
}

constexpr char kMagic[] = "SQNET1";
constexpr std::uint8_t kDtypeF64 = 1;

}  // namespace

int ArchConfig::feature_size() const { return spatial_sizes(*this).back(); }

void ArchConfig::validate() const {
  if (input_size < 16) throw ConfigError("network input_size must be >= 16");
  if (channels.empty() || channels.size() != strides.size()) {
    throw ConfigError("network channels and strides must be non-empty and of equal length");
  }
  for (int c : channels) {
    if (c <= 0) throw ConfigError("network channel counts must be positive");
  }
  for (int s : strides) {
    if (s < 1 || s > 2) throw ConfigError("network strides must be 1 or 2");
  }
  if (!(norm_momentum >= 0.0 && norm_momentum < 1.0)) {
    throw ConfigError("norm momentum must be in [0, 1)");
  }
  if (!(norm_epsilon > 0.0)) throw ConfigError("norm epsilon must be > 0");
}

nlohmann::json to_json(const ArchConfig& arch) {
  return {{"input_size", arch.input_size},       {"channels", arch.channels},
          {"strides", arch.strides},             {"color_offset", arch.color_offset},
          {"depth_scale", arch.depth_scale},     {"norm_momentum", arch.norm_momentum},
          {"norm_epsilon", arch.norm_epsilon}};
}

ArchConfig arch_from_json(const nlohmann::json& doc) {
  ArchConfig arch;
  arch.input_size = doc.at("input_size").get<int>();
  arch.channels = doc.at("channels").get<std::vector<int>>();
  arch.strides = doc.at("strides").get<std::vector<int>>();
  arch.color_offset = doc.at("color_offset").get<double>();
  arch.depth_scale = doc.at("depth_scale").get<double>();
  arch.norm_momentum = doc.at("norm_momentum").get<double>();
  arch.norm_epsilon = doc.at("norm_epsilon").get<double>();
  arch.validate();
  return arch;
}

std::size_t QNetworkParams::parameter_count() const {
  std::size_t n = 0;
  for (const auto& t : tensors) {
    if (t.trainable) n += t.value.size();
  }
  return n;
}

bool QNetworkParams::all_finite() const {
  for (const auto& t : tensors) {
    for (double v : t.value.data) {
      if (!std::isfinite(v)) return false;
    }
  }
  return true;
}

double GradientSet::norm() const {
  double sq = 0.0;
  for (const auto& t : tensors) {
    for (double v : t.data) sq += v * v;
  }
  return std::sqrt(sq);
}

GradientSet& GradientSet::operator+=(const GradientSet& other) {
  if (other.tensors.size() != tensors.size()) throw ShapeMismatch("bad gradient");
  for (std::size_t i = 0; i < tensors.size(); ++i) {
    if (other.tensors[i].shape != tensors[i].shape) throw ShapeMismatch("bad gradient");
    for (std::size_t k = 0; k < tensors[i].size(); ++k) {
      tensors[i].data[k] += other.tensors[i].data[k];
    }
  }
  return *this;
}

GradientSet& GradientSet::operator*=(double factor) {
  for (auto& t : tensors) {
    for (double& v : t.data) v *= factor;
  }
  return *this;
}

GradientSet zero_gradients(const QNetworkParams& params) {
  GradientSet g;
  for (const auto& t : params.tensors) g.tensors.emplace_back(t.value.shape);
  return g;
}

QNetworkParams init_params(const ArchConfig& arch, std::uint64_t seed) {
  arch.validate();
  Rng rng = make_rng(seed, "qnet.init");
  QNetworkParams params;
  params.arch = arch;
  int in = ArchConfig::kInputChannels;
  const int k = ArchConfig::kKernel;
  for (std::size_t b = 0; b < arch.channels.size(); ++b) {
    const int out = arch.channels[b];
    const std::string prefix = "block" + std::to_string(b) + ".";
    Tensor w({out, in, k, k});
    std::normal_distribution<double> normal(0.0, std::sqrt(2.0 / (in * k * k)));
    for (double& v : w.data) v = normal(rng);
    params.tensors.push_back({prefix + "conv.weight", w, true});
    params.tensors.push_back({prefix + "conv.bias", Tensor({out}), true});
    params.tensors.push_back({prefix + "norm.gamma", Tensor({out}, 1.0), true});
    params.tensors.push_back({prefix + "norm.beta", Tensor({out}), true});
    params.tensors.push_back({prefix + "norm.running_mean", Tensor({out}), false});
    params.tensors.push_back({prefix + "norm.running_var", Tensor({out}, 1.0), false});
    in = out;
  }
  Tensor head({1, in, 1, 1});
  std::normal_distribution<double> normal(0.0, std::sqrt(1.0 / in));
  for (double& v : head.data) v = normal(rng);
  params.tensors.push_back({"head.weight", head, true});
  params.tensors.push_back({"head.bias", Tensor({1}), true});
  return params;
}

Tensor encode_state(const ArchConfig& arch, const Heightmap& state) {
  check_state(arch, state);
  const int h = state.height;
  const int w = state.width;
  Tensor x({ArchConfig::kInputChannels, h, w});
  for (int r = 0; r < h; ++r) {
    for (int c = 0; c < w; ++c) {
      for (int k = 0; k < 3; ++k) x.at(k, r, c) = state.color_at(r, c, k) - arch.color_offset;
      x.at(3, r, c) = state.depth_at(r, c) * arch.depth_scale;
    }
  }
  return x;
}

QMap forward(const QNetworkParams& params, const Heightmap& state) {
  const int full = params.arch.input_size;
  const Trace t = run_forward(params, state, Window{0, full, 0, full});
  QMap q;
  q.width = q.height = full;
  q.values = t.output.data;
  q.source_version = params.version;
  return q;
}

double q_value(const QNetworkParams& params, const Heightmap& state, Pixel pixel) {
  if (!state.in_bounds(pixel.row, pixel.col)) throw OutOfBounds("pixel outside map");
  const Trace t = run_forward(
      params, state, Window{pixel.row, pixel.row + 1, pixel.col, pixel.col + 1});
  return t.output.at(0, pixel.row, pixel.col);
}

PixelGradient pixel_gradient(const QNetworkParams& params, const Heightmap& state,
                             Pixel pixel) {
  if (!state.in_bounds(pixel.row, pixel.col)) throw OutOfBounds("pixel outside map");
  const ArchConfig& arch = params.arch;
  const Window out_window{pixel.row, pixel.row + 1, pixel.col, pixel.col + 1};
  const Trace t = run_forward(params, state, out_window);
  PixelGradient result;
  result.q = t.output.at(0, pixel.row, pixel.col);
  result.grad = zero_gradients(params);
  auto& g = result.grad.tensors;
  const std::size_t blocks = params.block_count();

  Tensor grad_out(t.output.shape);
  grad_out.at(0, pixel.row, pixel.col) = 1.0;
  Tensor grad_head(t.head.shape);
  bilinear_upsample_backward(grad_out, out_window, grad_head);

  Tensor grad_a(t.activation.back().shape);
  conv2d_backward(t.activation.back(), params.head_weight(), 1, 0, t.head_window,
                  grad_head, g[g.size() - 2], g.back(), &grad_a);

  for (std::size_t i = blocks; i-- > 0;) {
    const Window& w = t.windows[i];
    const Tensor& z = t.pre_norm[i];
    const Tensor& gamma = params.block(i, kGamma);
    const Tensor& beta = params.block(i, kBeta);
    const Tensor& mean = params.block(i, kRunningMean);
    const Tensor& var = params.block(i, kRunningVar);
    Tensor& g_gamma = g[i * QNetworkParams::kPerBlock + kGamma];
    Tensor& g_beta = g[i * QNetworkParams::kPerBlock + kBeta];
    Tensor grad_z(z.shape);
    for (int c = 0; c < arch.channels[i]; ++c) {
      const double inv_std = 1.0 / std::sqrt(var[c] + arch.norm_epsilon);
      const double scale = gamma[c] / std::sqrt(var[c] + arch.norm_epsilon);
      const double shift = beta[c] - mean[c] * scale;
      for (int r = w.r0; r < w.r1; ++r) {
        for (int col = w.c0; col < w.c1; ++col) {
          // Same expression as the forward pass so the ReLU gate agrees.
          if (z.at(c, r, col) * scale + shift <= 0.0) continue;
          const double xhat = (z.at(c, r, col) - mean[c]) * inv_std;
          const double gy = grad_a.at(c, r, col);
          g_gamma[c] += gy * xhat;
          g_beta[c] += gy;
          grad_z.at(c, r, col) = gy * gamma[c] * inv_std;
        }
      }
    }
    const Tensor& input = i == 0 ? t.input : t.activation[i - 1];
    Tensor grad_input;
    if (i > 0) grad_input = Tensor(input.shape);
    conv2d_backward(input, params.block(i, kConvWeight), arch.strides[i], 1, w,
                    grad_z, g[i * QNetworkParams::kPerBlock + kConvWeight],
                    g[i * QNetworkParams::kPerBlock + kConvBias],
                    i > 0 ? &grad_input : nullptr);
    grad_a = std::move(grad_input);
  }
  return result;
}

GradientSet backward_at_pixel(const QNetworkParams& params, const Heightmap& state,
                              Pixel pixel, double td_error) {
  PixelGradient pg = pixel_gradient(params, state, pixel);
  pg.grad *= td_error;
  return std::move(pg.grad);
}

QNetworkParams apply_update(const QNetworkParams& params, const GradientSet& grads,
                            double learning_rate) {
  if (grads.tensors.size() != params.tensors.size()) throw ShapeMismatch("bad gradient");
  QNetworkParams next = params;
  for (std::size_t i = 0; i < next.tensors.size(); ++i) {
    Tensor& p = next.tensors[i].value;
    const Tensor& g = grads.tensors[i];
    if (g.shape != p.shape) throw ShapeMismatch("bad gradient: shape of " + next.tensors[i].name);
    if (!next.tensors[i].trainable) continue;
    for (std::size_t k = 0; k < p.size(); ++k) p.data[k] -= learning_rate * g.data[k];
  }
  ++next.version;
  if (!next.all_finite()) {
    throw NumericError("parameter update produced a non-finite value (version " +
                       std::to_string(next.version) + ")");
  }
  return next;
}

void clip_gradient_norm(GradientSet& grads, double max_norm) {
  const double n = grads.norm();
  if (max_norm > 0.0 && n > max_norm) grads *= max_norm / n;
}

QNetworkParams snapshot_target(const QNetworkParams& params) { return params; }

void save_params(const QNetworkParams& params, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot open '" + path.string() + "' for writing");
  out.write(kMagic, 6);
  nlohmann::json header = {{"arch", to_json(params.arch)}, {"version", params.version}};
  const std::string blob = header.dump();
  write_u32(out, static_cast<std::uint32_t>(blob.size()));
  out.write(blob.data(), static_cast<std::streamsize>(blob.size()));
  for (const auto& t : params.tensors) {
    write_u32(out, static_cast<std::uint32_t>(t.name.size()));
    out.write(t.name.data(), static_cast<std::streamsize>(t.name.size()));
    out.put(static_cast<char>(kDtypeF64));
    write_u32(out, static_cast<std::uint32_t>(t.value.shape.size()));
    for (int d : t.value.shape) write_u32(out, static_cast<std::uint32_t>(d));
    for (double v : t.value.data) write_f64(out, v);
  }
  if (!out) throw Error("failed writing '" + path.string() + "'");
}

QNetworkParams load_params(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw BadCheckpoint("bad checkpoint: cannot open '" + path.string() + "'");
  char magic[6];
  read_exact(in, magic, 6);
  if (std::memcmp(magic, kMagic, 6) != 0) {
    throw BadCheckpoint("bad checkpoint: magic/version mismatch");
  }
  const std::uint32_t blob_size = read_u32(in);
  if (blob_size > (1u << 20)) throw BadCheckpoint("bad checkpoint: header too large");
  std::string blob(blob_size, '\0');
  read_exact(in, blob.data(), blob_size);
  QNetworkParams params;
  try {
    const auto header = nlohmann::json::parse(blob);
    params = init_params(arch_from_json(header.at("arch")), 0);
    params.version = header.at("version").get<std::int64_t>();
  } catch (const nlohmann::json::exception& e) {
    throw BadCheckpoint(std::string("bad checkpoint: ") + e.what());
  } catch (const ConfigError& e) {
    throw BadCheckpoint(std::string("bad checkpoint: ") + e.what());
  }
  for (auto& t : params.tensors) {
    const std::uint32_t name_size = read_u32(in);
    if (name_size > 256) throw BadCheckpoint("bad checkpoint: tensor name too long");
    std::string name(name_size, '\0');
    read_exact(in, name.data(), name_size);
    if (name != t.name) {
      throw BadCheckpoint("bad checkpoint: expected tensor '" + t.name + "', found '" + name + "'");
    }
    std::uint8_t dtype = 0;
    read_exact(in, &dtype, 1);
    if (dtype != kDtypeF64) throw BadCheckpoint("bad checkpoint: unsupported dtype");
    const std::uint32_t rank = read_u32(in);
    if (rank != t.value.shape.size()) throw BadCheckpoint("bad checkpoint: rank mismatch for " + name);
    for (int d : t.value.shape) {
      if (read_u32(in) != static_cast<std::uint32_t>(d)) {
        throw BadCheckpoint("bad checkpoint: shape mismatch for " + name);
      }
    }
    for (double& v : t.value.data) v = read_f64(in);
  }
  if (in.peek() != std::char_traits<char>::eof()) {
    throw BadCheckpoint("bad checkpoint: trailing bytes");
  }
  return params;
}

}  // namespace suctionq::qnet
