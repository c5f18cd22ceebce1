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

#ifndef SUCTIONQ_LAYERS_HPP_
#define SUCTIONQ_LAYERS_HPP_

#include <cstddef>
#include <vector>

namespace suctionq::qnet {

// Dense row-major tensor of doubles.
struct Tensor {
  std::vector<int> shape;
  std::vector<double> data;

  Tensor() = default;
  explicit Tensor(std::vector<int> dims, double fill = 0.0);

  std::size_t size() const { return data.size(); }
  int dim(std::size_t i) const { return shape[i]; }
  double& operator[](std::size_t i) { return data[i]; }
  double operator[](std::size_t i) const { return data[i]; }
  // (c, h, w) accessors for rank-3 feature maps.
  double& at(int c, int h, int w) {
    return data[(static_cast<std::size_t>(c) * shape[1] + h) * shape[2] + w];
  }
  double at(int c, int h, int w) const {
    return data[(static_cast<std::size_t>(c) * shape[1] + h) * shape[2] + w];
  }
  friend bool operator==(const Tensor&, const Tensor&) = default;
};

// Half-open pixel rectangle [r0, r1) x [c0, c1).
struct Window {
  int r0 = 0;
  int r1 = 0;
  int c0 = 0;
  int c1 = 0;

  int rows() const { return r1 - r0; }
  int cols() const { return c1 - c0; }
  int area() const { return rows() * cols(); }
  friend bool operator==(const Window&, const Window&) = default;
};

inline int conv_output_extent(int in, int kernel, int stride, int pad) {
  return (in + 2 * pad - kernel) / stride + 1;
}

// Input rectangle read by the output rectangle `out` of a convolution.
Window conv_input_window(const Window& out, int kernel, int stride, int pad,
                         int in_height, int in_width);

// Low-resolution rectangle read by the output rectangle `out` of a bilinear
// upsample from (in_height, in_width).
Window upsample_input_window(const Window& out, int in_height, int in_width,
                             int out_height, int out_width);

// 2-D convolution over the output rectangle `window` only; `out` must be a
// (Co, Ho, Wo) tensor and is written inside the window. Zero padding.
void conv2d_forward(const Tensor& input, const Tensor& weight,
                    const Tensor& bias, int stride, int pad,
                    const Window& window, Tensor& out);

// Accumulates parameter gradients from `grad_out`, which must be zero outside
// `window`. `grad_input` may be null when the input gradient is not needed.
void conv2d_backward(const Tensor& input, const Tensor& weight, int stride,
                     int pad, const Window& window, const Tensor& grad_out,
                     Tensor& grad_weight, Tensor& grad_bias,
                     Tensor* grad_input);

// Bilinear resize with half-pixel centers (align_corners = false).
struct UpsampleTap {
  int i0 = 0;
  int i1 = 0;
  double lambda = 0.0;
};
UpsampleTap upsample_tap(int out_index, int in_extent, int out_extent);

void bilinear_upsample_forward(const Tensor& input, const Window& window,
                               Tensor& out);
void bilinear_upsample_backward(const Tensor& grad_out, const Window& window,
                                Tensor& grad_input);

// Training-mode batch normalization over (N, H, W) per channel, before the
// learned scale and shift.
struct BatchNormCache {
  std::vector<double> mean;
  std::vector<double> inv_std;
  std::vector<Tensor> normalized;
};

BatchNormCache batch_norm_train_forward(const std::vector<Tensor>& batch,
                                        double epsilon);

// Gradient with respect to the batch inputs, given the gradient with respect
// to the normalized values.
std::vector<Tensor> batch_norm_train_backward(
    const BatchNormCache& cache, const std::vector<Tensor>& grad_normalized);

}  // namespace suctionq::qnet

#endif  // SUCTIONQ_LAYERS_HPP_
