/*
 * Copyright 2026 The phasepred Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#pragma once

// Dense CHW kernels for the convolutional predictor: "same" convolution,
// non-overlapping max pooling, ReLU and nearest-neighbour upsampling, each
// with its backward pass. Summation order is fixed so results are
// bit-reproducible.

#include <algorithm>
#include <cstddef>
#include <limits>
#include <vector>

#include "phasepred/error.hpp"

namespace phasepred {

/// Channel-major activation volume.
struct Tensor3 {
  int channels = 0;
  int height = 0;
  int width = 0;
  std::vector<double> data;

  Tensor3() = default;
  Tensor3(int c, int h, int w, double fill = 0.0)
      : channels(c), height(h), width(w),
        data(static_cast<std::size_t>(c) * h * w, fill) {}

  std::size_t plane() const { return static_cast<std::size_t>(height) * width; }
  double* channel(int c) { return data.data() + c * plane(); }
  const double* channel(int c) const { return data.data() + c * plane(); }
  bool same_shape(const Tensor3& o) const {
    return channels == o.channels && height == o.height && width == o.width;
  }
};

struct ConvLayer {
  int in_channels = 0;
  int out_channels = 0;
  int kernel = 3;
  std::vector<double> weight;  // [out][in][ky][kx]
  std::vector<double> bias;    // [out]

  ConvLayer() = default;
  ConvLayer(int in, int out, int k)
      : in_channels(in), out_channels(out), kernel(k),
        weight(static_cast<std::size_t>(out) * in * k * k, 0.0), bias(out, 0.0) {}

  double& w(int o, int i, int ky, int kx) {
    return weight[((static_cast<std::size_t>(o) * in_channels + i) * kernel + ky) * kernel + kx];
  }
  double w(int o, int i, int ky, int kx) const {
    return weight[((static_cast<std::size_t>(o) * in_channels + i) * kernel + ky) * kernel + kx];
  }
};

struct DenseLayer {
  int in_features = 0;
  int out_features = 0;
  std::vector<double> weight;  // [out][in]
  std::vector<double> bias;    // [out]

  DenseLayer() = default;
  DenseLayer(int in, int out)
      : in_features(in), out_features(out),
        weight(static_cast<std::size_t>(out) * in, 0.0), bias(out, 0.0) {}
};

namespace nn {

inline Tensor3 conv2d(const Tensor3& in, const ConvLayer& layer) {
  detail::require(in.channels == layer.in_channels, "conv2d: channel mismatch");
  const int H = in.height, W = in.width, K = layer.kernel, pad = K / 2;
  Tensor3 out(layer.out_channels, H, W);
  for (int o = 0; o < layer.out_channels; ++o) {
    double* dst = out.channel(o);
    std::fill(dst, dst + out.plane(), layer.bias[o]);
    for (int i = 0; i < layer.in_channels; ++i) {
      const double* src = in.channel(i);
      for (int ky = 0; ky < K; ++ky) {
        const int dy = ky - pad;
        const int y0 = std::max(0, -dy), y1 = std::min(H, H - dy);
        for (int kx = 0; kx < K; ++kx) {
          const int dx = kx - pad;
          const int x0 = std::max(0, -dx), x1 = std::min(W, W - dx);
          const double wv = layer.w(o, i, ky, kx);
          for (int y = y0; y < y1; ++y) {
            double* orow = dst + static_cast<std::size_t>(y) * W;
            const double* irow = src + static_cast<std::size_t>(y + dy) * W + dx;
            for (int x = x0; x < x1; ++x) orow[x] += wv * irow[x];
          }
        }
      }
    }
  }
  return out;
}

/// Accumulates kernel/bias gradients into grad and, when din is non-null,
/// writes the input gradient.
inline void conv2d_backward(const Tensor3& in, const ConvLayer& layer, const Tensor3& dout,
                            ConvLayer& grad, Tensor3* din) {
  const int H = in.height, W = in.width, K = layer.kernel, pad = K / 2;
  if (din) *din = Tensor3(in.channels, H, W);
  for (int o = 0; o < layer.out_channels; ++o) {
    const double* g = dout.channel(o);
    double bsum = 0.0;
    for (std::size_t p = 0; p < dout.plane(); ++p) bsum += g[p];
    grad.bias[o] += bsum;
    for (int i = 0; i < layer.in_channels; ++i) {
      const double* src = in.channel(i);
      double* dsrc = din ? din->channel(i) : nullptr;
      for (int ky = 0; ky < K; ++ky) {
        const int dy = ky - pad;
        const int y0 = std::max(0, -dy), y1 = std::min(H, H - dy);
        for (int kx = 0; kx < K; ++kx) {
          const int dx = kx - pad;
          const int x0 = std::max(0, -dx), x1 = std::min(W, W - dx);
          const double wv = layer.w(o, i, ky, kx);
          double acc = 0.0;
          for (int y = y0; y < y1; ++y) {
            const double* grow = g + static_cast<std::size_t>(y) * W;
            const double* irow = src + static_cast<std::size_t>(y + dy) * W + dx;
            for (int x = x0; x < x1; ++x) acc += grow[x] * irow[x];
            if (dsrc) {
              double* drow = dsrc + static_cast<std::size_t>(y + dy) * W + dx;
              for (int x = x0; x < x1; ++x) drow[x] += wv * grow[x];
            }
          }
          grad.w(o, i, ky, kx) += acc;
        }
      }
    }
  }
}

/// Non-overlapping factor x factor max pooling. argmax receives the flat
/// input index of each winner (first occurrence on ties).
inline Tensor3 max_pool(const Tensor3& in, int factor, std::vector<std::size_t>& argmax) {
  detail::require(in.height % factor == 0 && in.width % factor == 0,
                  "max_pool: size not divisible by pool factor");
  Tensor3 out(in.channels, in.height / factor, in.width / factor);
  argmax.assign(out.data.size(), 0);
  std::size_t k = 0;
  for (int c = 0; c < in.channels; ++c) {
    const std::size_t base = c * in.plane();
    for (int y = 0; y < out.height; ++y) {
      for (int x = 0; x < out.width; ++x, ++k) {
        double best = -std::numeric_limits<double>::infinity();
        std::size_t best_idx = 0;
        for (int py = 0; py < factor; ++py) {
          for (int px = 0; px < factor; ++px) {
            const std::size_t idx = base +
                static_cast<std::size_t>(y * factor + py) * in.width + (x * factor + px);
            if (in.data[idx] > best) {
              best = in.data[idx];
              best_idx = idx;
            }
          }
        }
        out.data[k] = best;
        argmax[k] = best_idx;
      }
    }
  }
  return out;
}

inline Tensor3 max_pool_backward(const Tensor3& dout, const std::vector<std::size_t>& argmax,
                                 int channels, int height, int width) {
  Tensor3 din(channels, height, width);
  for (std::size_t k = 0; k < dout.data.size(); ++k) din.data[argmax[k]] += dout.data[k];
  return din;
}

inline void relu(Tensor3& t) {
  for (double& v : t.data) v = std::max(v, 0.0);
}

/// Zeroes grad wherever the forward ReLU output was not positive.
inline void relu_backward(const Tensor3& activated, Tensor3& grad) {
  for (std::size_t i = 0; i < grad.data.size(); ++i) {
    if (!(activated.data[i] > 0.0)) grad.data[i] = 0.0;
  }
}

inline Tensor3 upsample_nearest(const Tensor3& in, int factor) {
  Tensor3 out(in.channels, in.height * factor, in.width * factor);
  for (int c = 0; c < in.channels; ++c) {
    const double* src = in.channel(c);
    double* dst = out.channel(c);
    for (int y = 0; y < out.height; ++y) {
      const double* srow = src + static_cast<std::size_t>(y / factor) * in.width;
      double* drow = dst + static_cast<std::size_t>(y) * out.width;
      for (int x = 0; x < out.width; ++x) drow[x] = srow[x / factor];
    }
  }
  return out;
}

inline Tensor3 upsample_nearest_backward(const Tensor3& dout, int factor) {
  Tensor3 din(dout.channels, dout.height / factor, dout.width / factor);
  for (int c = 0; c < dout.channels; ++c) {
    const double* src = dout.channel(c);
    double* dst = din.channel(c);
    for (int y = 0; y < dout.height; ++y) {
      const double* srow = src + static_cast<std::size_t>(y) * dout.width;
      double* drow = dst + static_cast<std::size_t>(y / factor) * din.width;
      for (int x = 0; x < dout.width; ++x) drow[x / factor] += srow[x];
    }
  }
  return din;
}

inline std::vector<double> dense(const DenseLayer& layer, const std::vector<double>& x) {
  detail::require(static_cast<int>(x.size()) == layer.in_features, "dense: input size mismatch");
  std::vector<double> y(layer.bias);
  for (int o = 0; o < layer.out_features; ++o) {
    const double* row = layer.weight.data() + static_cast<std::size_t>(o) * layer.in_features;
    double acc = 0.0;
    for (int i = 0; i < layer.in_features; ++i) acc += row[i] * x[i];
    y[o] += acc;
  }
  return y;
}

/// Accumulates into grad; returns dL/dx.
inline std::vector<double> dense_backward(const DenseLayer& layer, const std::vector<double>& x,
                                          const std::vector<double>& dy, DenseLayer& grad) {
  std::vector<double> dx(layer.in_features, 0.0);
  for (int o = 0; o < layer.out_features; ++o) {
    const double g = dy[o];
    grad.bias[o] += g;
    if (g == 0.0) continue;
    const std::size_t off = static_cast<std::size_t>(o) * layer.in_features;
    for (int i = 0; i < layer.in_features; ++i) {
      grad.weight[off + i] += g * x[i];
      dx[i] += g * layer.weight[off + i];
    }
  }
  return dx;
}

}  // namespace nn
}  // namespace phasepred
