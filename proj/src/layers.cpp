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

#include "suctionq/layers.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>

#include <Eigen/Core>

#include "suctionq/common.hpp"

namespace suctionq::qnet {
namespace {

using RowMatrix =
    Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

// Patch matrix of the window: row (ci, ky, kx), column = window pixel.
RowMatrix im2col(const Tensor& input, int kernel, int stride, int pad,
                 const Window& w) {
  const int channels = input.dim(0);
  const int in_h = input.dim(1);
  const int in_w = input.dim(2);
  RowMatrix cols(static_cast<Eigen::Index>(channels) * kernel * kernel, w.area());
  for (int ci = 0; ci < channels; ++ci) {
    for (int ky = 0; ky < kernel; ++ky) {
      for (int kx = 0; kx < kernel; ++kx) {
        double* row = cols.row((ci * kernel + ky) * kernel + kx).data();
        int p = 0;
        for (int y = w.r0; y < w.r1; ++y) {
          const int iy = y * stride - pad + ky;
          if (iy < 0 || iy >= in_h) {
            std::fill(row + p, row + p + w.cols(), 0.0);
            p += w.cols();
            continue;
          }
          const double* src = &input.data[(static_cast<std::size_t>(ci) * in_h + iy) * in_w];
          for (int x = w.c0; x < w.c1; ++x, ++p) {
            const int ix = x * stride - pad + kx;
            row[p] = (ix >= 0 && ix < in_w) ? src[ix] : 0.0;
          }
        }
      }
    }
  }
  return cols;
}

void col2im_add(const RowMatrix& cols, int kernel, int stride, int pad,
                const Window& w, Tensor& grad_input) {
  const int channels = grad_input.dim(0);
  const int in_h = grad_input.dim(1);
  const int in_w = grad_input.dim(2);
  for (int ci = 0; ci < channels; ++ci) {
    for (int ky = 0; ky < kernel; ++ky) {
      for (int kx = 0; kx < kernel; ++kx) {
        const double* row = cols.row((ci * kernel + ky) * kernel + kx).data();
        int p = 0;
        for (int y = w.r0; y < w.r1; ++y) {
          const int iy = y * stride - pad + ky;
          if (iy < 0 || iy >= in_h) {
            p += w.cols();
            continue;
          }
          double* dst = &grad_input.data[(static_cast<std::size_t>(ci) * in_h + iy) * in_w];
          for (int x = w.c0; x < w.c1; ++x, ++p) {
            const int ix = x * stride - pad + kx;
            if (ix >= 0 && ix < in_w) dst[ix] += row[p];
          }
        }
      }
    }
  }
}

}  // namespace

Tensor::Tensor(std::vector<int> dims, double fill) : shape(std::move(dims)) {
  const std::size_t n = std::accumulate(shape.begin(), shape.end(),
                                        std::size_t{1}, std::multiplies<>());
  data.assign(n, fill);
}

Window conv_input_window(const Window& out, int kernel, int stride, int pad,
                         int in_height, int in_width) {
  Window w;
  w.r0 = std::clamp(out.r0 * stride - pad, 0, in_height);
  w.r1 = std::clamp((out.r1 - 1) * stride - pad + kernel, 0, in_height);
  w.c0 = std::clamp(out.c0 * stride - pad, 0, in_width);
  w.c1 = std::clamp((out.c1 - 1) * stride - pad + kernel, 0, in_width);
  return w;
}

UpsampleTap upsample_tap(int out_index, int in_extent, int out_extent) {
  const double scale = static_cast<double>(in_extent) / out_extent;
  double src = (out_index + 0.5) * scale - 0.5;
  if (src < 0.0) src = 0.0;
  UpsampleTap tap;
  tap.i0 = std::min(static_cast<int>(src), in_extent - 1);
  tap.i1 = std::min(tap.i0 + 1, in_extent - 1);
  tap.lambda = src - tap.i0;
  return tap;
}

Window upsample_input_window(const Window& out, int in_height, int in_width,
                             int out_height, int out_width) {
  Window w;
  w.r0 = upsample_tap(out.r0, in_height, out_height).i0;
  w.r1 = upsample_tap(out.r1 - 1, in_height, out_height).i1 + 1;
  w.c0 = upsample_tap(out.c0, in_width, out_width).i0;
  w.c1 = upsample_tap(out.c1 - 1, in_width, out_width).i1 + 1;
  return w;
}

void conv2d_forward(const Tensor& input, const Tensor& weight,
                    const Tensor& bias, int stride, int pad,
                    const Window& window, Tensor& out) {
  const int out_channels = weight.dim(0);
  const int kernel = weight.dim(2);
  if (input.dim(0) != weight.dim(1) || out.dim(0) != out_channels) {
    throw ShapeMismatch("conv2d: channel mismatch");
  }
  if (window.area() <= 0) return;
  const RowMatrix cols = im2col(input, kernel, stride, pad, window);
  Eigen::Map<const RowMatrix> w(weight.data.data(), out_channels, cols.rows());
  const RowMatrix result = w * cols;
  const int out_h = out.dim(1);
  const int out_w = out.dim(2);
  for (int co = 0; co < out_channels; ++co) {
    const double* src = result.row(co).data();
    int p = 0;
    for (int y = window.r0; y < window.r1; ++y) {
      double* dst = &out.data[(static_cast<std::size_t>(co) * out_h + y) * out_w];
      for (int x = window.c0; x < window.c1; ++x, ++p) dst[x] = src[p] + bias[co];
    }
  }
}

void conv2d_backward(const Tensor& input, const Tensor& weight, int stride,
                     int pad, const Window& window, const Tensor& grad_out,
                     Tensor& grad_weight, Tensor& grad_bias,
                     Tensor* grad_input) {
  const int out_channels = weight.dim(0);
  const int kernel = weight.dim(2);
  if (window.area() <= 0) return;
  const int out_h = grad_out.dim(1);
  const int out_w = grad_out.dim(2);
  RowMatrix g(out_channels, window.area());
  for (int co = 0; co < out_channels; ++co) {
    int p = 0;
    for (int y = window.r0; y < window.r1; ++y) {
      const double* src = &grad_out.data[(static_cast<std::size_t>(co) * out_h + y) * out_w];
      for (int x = window.c0; x < window.c1; ++x, ++p) g(co, p) = src[x];
    }
  }
  const RowMatrix cols = im2col(input, kernel, stride, pad, window);
  Eigen::Map<RowMatrix> gw(grad_weight.data.data(), out_channels, cols.rows());
  gw.noalias() += g * cols.transpose();
  for (int co = 0; co < out_channels; ++co) grad_bias[co] += g.row(co).sum();
  if (grad_input != nullptr) {
    Eigen::Map<const RowMatrix> w(weight.data.data(), out_channels, cols.rows());
    const RowMatrix grad_cols = w.transpose() * g;
    col2im_add(grad_cols, kernel, stride, pad, window, *grad_input);
  }
}

void bilinear_upsample_forward(const Tensor& input, const Window& window,
                               Tensor& out) {
  const int channels = input.dim(0);
  const int in_h = input.dim(1);
  const int in_w = input.dim(2);
  const int out_h = out.dim(1);
  const int out_w = out.dim(2);
  for (int c = 0; c < channels; ++c) {
    for (int y = window.r0; y < window.r1; ++y) {
      const UpsampleTap ty = upsample_tap(y, in_h, out_h);
      for (int x = window.c0; x < window.c1; ++x) {
        const UpsampleTap tx = upsample_tap(x, in_w, out_w);
        // a + t * (b - a) keeps constant inputs exact.
        const double top = input.at(c, ty.i0, tx.i0) +
                           tx.lambda * (input.at(c, ty.i0, tx.i1) - input.at(c, ty.i0, tx.i0));
        const double bottom = input.at(c, ty.i1, tx.i0) +
                              tx.lambda * (input.at(c, ty.i1, tx.i1) - input.at(c, ty.i1, tx.i0));
        out.at(c, y, x) = top + ty.lambda * (bottom - top);
      }
    }
  }
}

void bilinear_upsample_backward(const Tensor& grad_out, const Window& window,
                                Tensor& grad_input) {
  const int channels = grad_input.dim(0);
  const int in_h = grad_input.dim(1);
  const int in_w = grad_input.dim(2);
  const int out_h = grad_out.dim(1);
  const int out_w = grad_out.dim(2);
  for (int c = 0; c < channels; ++c) {
    for (int y = window.r0; y < window.r1; ++y) {
      const UpsampleTap ty = upsample_tap(y, in_h, out_h);
      for (int x = window.c0; x < window.c1; ++x) {
        const UpsampleTap tx = upsample_tap(x, in_w, out_w);
        const double g = grad_out.at(c, y, x);
        if (g == 0.0) continue;
        grad_input.at(c, ty.i0, tx.i0) += g * (1.0 - ty.lambda) * (1.0 - tx.lambda);
        grad_input.at(c, ty.i0, tx.i1) += g * (1.0 - ty.lambda) * tx.lambda;
        grad_input.at(c, ty.i1, tx.i0) += g * ty.lambda * (1.0 - tx.lambda);
        grad_input.at(c, ty.i1, tx.i1) += g * ty.lambda * tx.lambda;
      }
    }
  }
}

BatchNormCache batch_norm_train_forward(const std::vector<Tensor>& batch,
                                        double epsilon) {
  if (batch.empty()) throw ShapeMismatch("batch norm: empty batch");
  const int channels = batch.front().dim(0);
  const std::size_t plane =
      static_cast<std::size_t>(batch.front().dim(1)) * batch.front().dim(2);
  const double count = static_cast<double>(plane * batch.size());
  BatchNormCache cache;
  cache.mean.assign(channels, 0.0);
  cache.inv_std.assign(channels, 0.0);
  cache.normalized = batch;
  for (int c = 0; c < channels; ++c) {
    double sum = 0.0;
    for (const auto& t : batch) {
      if (t.shape != batch.front().shape) throw ShapeMismatch("batch norm: ragged batch");
      for (std::size_t i = 0; i < plane; ++i) sum += t.data[c * plane + i];
    }
    const double mean = sum / count;
    double sq = 0.0;
    for (const auto& t : batch) {
      for (std::size_t i = 0; i < plane; ++i) {
        const double d = t.data[c * plane + i] - mean;
        sq += d * d;
      }
    }
    const double inv_std = 1.0 / std::sqrt(sq / count + epsilon);
    cache.mean[c] = mean;
    cache.inv_std[c] = inv_std;
    for (auto& t : cache.normalized) {
      for (std::size_t i = 0; i < plane; ++i) {
        double& v = t.data[c * plane + i];
        v = (v - mean) * inv_std;
      }
    }
  }
  return cache;
}

std::vector<Tensor> batch_norm_train_backward(
    const BatchNormCache& cache, const std::vector<Tensor>& grad_normalized) {
  const int channels = static_cast<int>(cache.mean.size());
  const auto& first = cache.normalized.front();
  const std::size_t plane = static_cast<std::size_t>(first.dim(1)) * first.dim(2);
  const double count = static_cast<double>(plane * cache.normalized.size());
  std::vector<Tensor> grad = grad_normalized;
  for (int c = 0; c < channels; ++c) {
    double sum_g = 0.0;
    double sum_gx = 0.0;
    for (std::size_t n = 0; n < grad_normalized.size(); ++n) {
      for (std::size_t i = 0; i < plane; ++i) {
        const double g = grad_normalized[n].data[c * plane + i];
        sum_g += g;
        sum_gx += g * cache.normalized[n].data[c * plane + i];
      }
    }
    for (std::size_t n = 0; n < grad.size(); ++n) {
      for (std::size_t i = 0; i < plane; ++i) {
        const std::size_t k = c * plane + i;
        grad[n].data[k] = cache.inv_std[c] / count *
                          (count * grad_normalized[n].data[k] - sum_g -
                           cache.normalized[n].data[k] * sum_gx);
      }
    }
  }
  return grad;
}

}  // namespace suctionq::qnet
