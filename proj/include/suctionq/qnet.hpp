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

#ifndef SUCTIONQ_QNET_HPP_
#define SUCTIONQ_QNET_HPP_

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "json.hpp"
#include "suctionq/heightmap.hpp"
#include "suctionq/layers.hpp"

namespace suctionq::qnet {

// Fully convolutional pixel-wise Q network:
//   [color(3) | depth(1)] -> {conv3x3 -> norm -> ReLU} x N -> conv1x1 -> 1
//   -> bilinear upsample back to the input size.
// Normalization uses running statistics (the network is always evaluated on
// single states).
struct ArchConfig {
  int input_size = 224;
  std::vector<int> channels{32, 64, 64, 64};
  std::vector<int> strides{2, 2, 1, 1};
  // Input encoding: color - color_offset, depth * depth_scale.
  double color_offset = 0.5;
  double depth_scale = 20.0;
  double norm_momentum = 0.99;
  double norm_epsilon = 1e-5;

  static constexpr int kInputChannels = 4;
  static constexpr int kKernel = 3;

  // Spatial size after the encoder.
  int feature_size() const;
  void validate() const;
  friend bool operator==(const ArchConfig&, const ArchConfig&) = default;
};

nlohmann::json to_json(const ArchConfig& arch);
ArchConfig arch_from_json(const nlohmann::json& doc);

struct NamedTensor {
  std::string name;
  Tensor value;
  // Running statistics are state, not parameters; they receive no gradient.
  bool trainable = true;
  friend bool operator==(const NamedTensor&, const NamedTensor&) = default;
};

// Layout: per block {conv.weight, conv.bias, norm.gamma, norm.beta,
// norm.running_mean, norm.running_var}, then {head.weight, head.bias}.
struct QNetworkParams {
  ArchConfig arch;
  std::vector<NamedTensor> tensors;
  std::int64_t version = 0;

  static constexpr std::size_t kPerBlock = 6;
  std::size_t block_count() const { return arch.channels.size(); }
  const Tensor& block(std::size_t b, std::size_t slot) const {
    return tensors[b * kPerBlock + slot].value;
  }
  const Tensor& head_weight() const { return tensors[tensors.size() - 2].value; }
  const Tensor& head_bias() const { return tensors.back().value; }
  std::size_t parameter_count() const;
  bool all_finite() const;
};

// Mirrors QNetworkParams::tensors.
struct GradientSet {
  std::vector<Tensor> tensors;

  double norm() const;
  GradientSet& operator+=(const GradientSet& other);
  GradientSet& operator*=(double factor);
};

GradientSet zero_gradients(const QNetworkParams& params);

// q_t.
struct QMap {
  int width = 0;
  int height = 0;
  std::vector<double> values;
  std::int64_t source_version = 0;

  double at(int row, int col) const {
    return values[static_cast<std::size_t>(row) * width + col];
  }
};

// Kaiming fan-in initialization from a seeded generator; norm layers start
// as identity with running mean 0 / variance 1.
QNetworkParams init_params(const ArchConfig& arch, std::uint64_t seed);

// Network input tensor (4, H, W) of a heightmap pair.
Tensor encode_state(const ArchConfig& arch, const heightmap::Heightmap& state);

QMap forward(const QNetworkParams& params, const heightmap::Heightmap& state);

// Q value of one pixel, evaluating only its receptive field.
double q_value(const QNetworkParams& params, const heightmap::Heightmap& state,
               heightmap::Pixel pixel);

struct PixelGradient {
  double q = 0.0;
  GradientSet grad;  // dQ(pixel) / dparams
};

PixelGradient pixel_gradient(const QNetworkParams& params,
                             const heightmap::Heightmap& state,
                             heightmap::Pixel pixel);

// Gradient of 0.5 * td_error^2 with the loss attached to `pixel` only.
GradientSet backward_at_pixel(const QNetworkParams& params,
                              const heightmap::Heightmap& state,
                              heightmap::Pixel pixel, double td_error);

// Plain gradient descent p <- p - learning_rate * g; version + 1. Throws
// NumericError if the result is not finite.
QNetworkParams apply_update(const QNetworkParams& params,
                            const GradientSet& grads, double learning_rate);

// Rescales `grads` so its global norm does not exceed max_norm (> 0).
void clip_gradient_norm(GradientSet& grads, double max_norm);

// phi^-: an independent deep copy.
QNetworkParams snapshot_target(const QNetworkParams& params);

// Checkpoint: "SQNET1", u32 length + architecture JSON, then per tensor
// u32 name length, name, u8 dtype tag (1 = f64), u32 rank, u32 dims,
// little-endian f64 payload.
void save_params(const QNetworkParams& params, const std::filesystem::path& path);
QNetworkParams load_params(const std::filesystem::path& path);

}  // namespace suctionq::qnet

#endif  // SUCTIONQ_QNET_HPP_
