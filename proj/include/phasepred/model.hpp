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

#include <cmath>
#include <cstdint>
#include <cstring>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "phasepred/angles.hpp"
#include "phasepred/error.hpp"
#include "phasepred/grid.hpp"
#include "phasepred/nn_ops.hpp"
#include "phasepred/phase.hpp"
#include "phasepred/rng.hpp"
#include "phasepred/spectral_maps.hpp"

namespace phasepred {

enum class Heads { kPhase, kPhaseAndMagnitude };

inline std::string to_string(Heads h) {
  return h == Heads::kPhase ? "phase" : "hybrid";
}

inline Heads parse_heads(const std::string& name) {
  if (name == "phase") return Heads::kPhase;
  if (name == "hybrid" || name == "phase+magnitude") return Heads::kPhaseAndMagnitude;
  throw Error("unknown heads option: " + name);
}

/// Encoder/decoder shape. The input grid must be divisible by pool^depth in
/// both directions.
struct ArchConfig {
  std::vector<int> channels{4, 8};
  int kernel = 3;
  int embedding_dim = 16;
  Heads heads = Heads::kPhase;
  int pool = 2;
  int input_frames = 96;
  int input_bins = 256;

  /// Five conv layers, 128-d embedding, 96 x 256 input.
  static ArchConfig large() {
    ArchConfig a;
    a.channels = {8, 16, 32, 64, 128};
    a.embedding_dim = 128;
    return a;
  }

  int depth() const { return static_cast<int>(channels.size()); }
  int downsample() const {
    int s = 1;
    for (int i = 0; i < depth(); ++i) s *= pool;
    return s;
  }
  int bottleneck_frames() const { return input_frames / downsample(); }
  int bottleneck_bins() const { return input_bins / downsample(); }

  friend bool operator==(const ArchConfig&, const ArchConfig&) = default;
};

inline void validate(const ArchConfig& a) {
  detail::require(!a.channels.empty(), "ArchConfig: channels must be nonempty");
  for (int c : a.channels) detail::require(c > 0, "ArchConfig: channel counts must be > 0");
  detail::require(a.kernel > 0 && a.kernel % 2 == 1, "ArchConfig: kernel must be odd and > 0");
  detail::require(a.embedding_dim > 0, "ArchConfig: embedding_dim must be > 0");
  detail::require(a.pool >= 1, "ArchConfig: pool must be >= 1");
  detail::require(a.input_frames > 0 && a.input_bins > 0, "ArchConfig: empty input shape");
  const int s = a.downsample();
  if (a.input_frames % s != 0 || a.input_bins % s != 0) {
    throw Error("ArchConfig: input " + std::to_string(a.input_frames) + "x" +
                std::to_string(a.input_bins) + " not divisible by pool^depth = " +
                std::to_string(s));
  }
}

/// Mirrored decoder: a dense projection from the embedding back onto the
/// bottleneck grid, then one upsample + conv stage per encoder layer.
struct Decoder {
  DenseLayer projection;
  std::vector<ConvLayer> convs;
};

struct ModelParams {
  ArchConfig arch;
  std::uint64_t seed = 0;
  std::vector<ConvLayer> encoder;
  DenseLayer embedding;
  Decoder phase_decoder;
  std::optional<Decoder> magnitude_decoder;
};

struct Embedding {
  std::vector<double> values;
};

/// Named view onto one parameter tensor.
struct ParamBlock {
  std::string name;
  std::span<double> values;
  std::vector<std::size_t> shape;
};

namespace detail {

inline std::vector<std::size_t> weight_shape(const ConvLayer& c) {
  return {std::size_t(c.out_channels), std::size_t(c.in_channels), std::size_t(c.kernel),
          std::size_t(c.kernel)};
}
inline std::vector<std::size_t> weight_shape(const DenseLayer& d) {
  return {std::size_t(d.out_features), std::size_t(d.in_features)};
}

template <typename Layer, typename Fn>
void visit_layer(Layer& layer, const std::string& name, Fn& fn) {
  fn(name + ".weight", layer.weight, weight_shape(layer));
  fn(name + ".bias", layer.bias, std::vector<std::size_t>{layer.bias.size()});
}

template <typename Params, typename Fn>
void visit_params(Params& p, Fn&& fn) {
  for (std::size_t l = 0; l < p.encoder.size(); ++l) {
    visit_layer(p.encoder[l], "encoder.conv" + std::to_string(l), fn);
  }
  visit_layer(p.embedding, "encoder.embedding", fn);
  auto visit_decoder = [&](auto& dec, const std::string& prefix) {
    visit_layer(dec.projection, prefix + ".projection", fn);
    for (std::size_t l = 0; l < dec.convs.size(); ++l) {
      visit_layer(dec.convs[l], prefix + ".conv" + std::to_string(l), fn);
    }
  };
  visit_decoder(p.phase_decoder, "phase_decoder");
  if (p.magnitude_decoder) visit_decoder(*p.magnitude_decoder, "magnitude_decoder");
}

}  // namespace detail

/// Every trainable tensor in a fixed order.
inline std::vector<ParamBlock> param_blocks(ModelParams& p) {
  std::vector<ParamBlock> blocks;
  detail::visit_params(p, [&](const std::string& name, std::vector<double>& v,
                              std::vector<std::size_t> shape) {
    blocks.push_back({name, std::span<double>(v), std::move(shape)});
  });
  return blocks;
}

inline std::size_t param_count(const ModelParams& p) {
  std::size_t n = 0;
  detail::visit_params(p, [&](const std::string&, const std::vector<double>& v,
                              const std::vector<std::size_t>&) { n += v.size(); });
  return n;
}

namespace detail {

inline Decoder make_decoder(const ArchConfig& a) {
  Decoder d;
  const int c_last = a.channels.back();
  d.projection = DenseLayer(a.embedding_dim,
                            c_last * a.bottleneck_frames() * a.bottleneck_bins());
  for (int l = a.depth() - 1; l >= 0; --l) {
    const int out = l > 0 ? a.channels[l - 1] : 1;
    d.convs.emplace_back(a.channels[l], out, a.kernel);
  }
  return d;
}

// FNV-1a over the raw bytes of every parameter. Detects parameter edits
// between forward and backward.
inline std::uint64_t fingerprint(const ModelParams& p) {
  std::uint64_t h = 1469598103934665603ull;
  visit_params(p, [&](const std::string&, const std::vector<double>& v,
                      const std::vector<std::size_t>&) {
    for (double x : v) {
      std::uint64_t bits;
      std::memcpy(&bits, &x, sizeof bits);
      h = (h ^ bits) * 1099511628211ull;
    }
  });
  return h;
}

}  // namespace detail

/// All-zero parameters with the right shapes (also used as gradient storage).
inline ModelParams zero_model(const ArchConfig& arch) {
  validate(arch);
  ModelParams p;
  p.arch = arch;
  int in = 1;
  for (int c : arch.channels) {
    p.encoder.emplace_back(in, c, arch.kernel);
    in = c;
  }
  p.embedding = DenseLayer(arch.channels.back(), arch.embedding_dim);
  p.phase_decoder = detail::make_decoder(arch);
  if (arch.heads == Heads::kPhaseAndMagnitude) p.magnitude_decoder = detail::make_decoder(arch);
  return p;
}

/// Kernels ~ U(-1/sqrt(fan_in), 1/sqrt(fan_in)), biases zero. Deterministic in
/// seed.
inline ModelParams init_model(const ArchConfig& arch, std::uint64_t seed) {
  ModelParams p = zero_model(arch);
  p.seed = seed;
  Rng rng(seed);
  auto fill = [&](std::vector<double>& w, int fan_in) {
    const double bound = 1.0 / std::sqrt(static_cast<double>(fan_in));
    for (double& v : w) v = rng.uniform(-bound, bound);
  };
  auto fill_conv = [&](ConvLayer& c) { fill(c.weight, c.in_channels * c.kernel * c.kernel); };
  auto fill_decoder = [&](Decoder& d) {
    fill(d.projection.weight, d.projection.in_features);
    for (auto& c : d.convs) fill_conv(c);
  };
  for (auto& c : p.encoder) fill_conv(c);
  fill(p.embedding.weight, p.embedding.in_features);
  fill_decoder(p.phase_decoder);
  if (p.magnitude_decoder) fill_decoder(*p.magnitude_decoder);
  return p;
}

struct EncoderLayerCache {
  Tensor3 input;
  std::vector<std::size_t> pool_argmax;
  int conv_channels = 0, conv_height = 0, conv_width = 0;
  Tensor3 output;  // after pool and ReLU
};

struct DecoderCache {
  std::vector<double> embedding;
  Tensor3 projected;
  std::vector<Tensor3> conv_inputs;   // upsampled inputs of each conv
  std::vector<Tensor3> conv_outputs;  // after ReLU (raw for the last conv)
};

/// Intermediate values kept by forward() for backward().
struct ForwardCache {
  ArchConfig arch;
  std::uint64_t params_fingerprint = 0;
  std::vector<EncoderLayerCache> encoder;
  std::vector<double> pooled;               // global max per channel
  std::vector<std::size_t> global_argmax;   // flat index into the last output
  DecoderCache phase;
  std::optional<DecoderCache> magnitude;
};

struct ForwardResult {
  Embedding embedding;
  InstFreqMap phase;                      // wrap() of the raw phase head
  RealGrid phase_raw;                     // linear phase head output
  std::optional<MagnitudeMap> magnitude;  // normalized domain
  ForwardCache cache;
};

namespace detail {

inline Tensor3 input_tensor(const ArchConfig& arch, const MagnitudeMap& input) {
  if (static_cast<int>(input.frames()) != arch.input_frames ||
      static_cast<int>(input.bins()) != arch.input_bins) {
    throw Error("model: input " + std::to_string(input.frames()) + "x" +
                std::to_string(input.bins()) + " does not match architecture " +
                std::to_string(arch.input_frames) + "x" + std::to_string(arch.input_bins));
  }
  Tensor3 x(1, arch.input_frames, arch.input_bins);
  x.data = input.values.data();
  return x;
}

inline Embedding run_encoder(const ModelParams& p, const MagnitudeMap& input,
                             ForwardCache* cache) {
  Tensor3 x = input_tensor(p.arch, input);
  for (const auto& layer : p.encoder) {
    EncoderLayerCache lc;
    Tensor3 conv = nn::conv2d(x, layer);
    lc.conv_channels = conv.channels;
    lc.conv_height = conv.height;
    lc.conv_width = conv.width;
    Tensor3 pooled = nn::max_pool(conv, p.arch.pool, lc.pool_argmax);
    nn::relu(pooled);
    if (cache) {
      lc.input = std::move(x);
      lc.output = pooled;
      cache->encoder.push_back(std::move(lc));
    }
    x = std::move(pooled);
  }
  std::vector<double> gmax(x.channels);
  std::vector<std::size_t> arg(x.channels);
  for (int c = 0; c < x.channels; ++c) {
    const double* ch = x.channel(c);
    std::size_t best = 0;
    for (std::size_t i = 1; i < x.plane(); ++i) {
      if (ch[i] > ch[best]) best = i;
    }
    gmax[c] = ch[best];
    arg[c] = c * x.plane() + best;
  }
  Embedding z{nn::dense(p.embedding, gmax)};
  if (cache) {
    cache->pooled = std::move(gmax);
    cache->global_argmax = std::move(arg);
  }
  return z;
}

inline RealGrid run_decoder(const ArchConfig& arch, const Decoder& dec,
                            const std::vector<double>& z, DecoderCache& cache) {
  cache.embedding = z;
  Tensor3 y(arch.channels.back(), arch.bottleneck_frames(), arch.bottleneck_bins());
  y.data = nn::dense(dec.projection, z);
  cache.projected = y;
  for (std::size_t l = 0; l < dec.convs.size(); ++l) {
    Tensor3 up = nn::upsample_nearest(y, arch.pool);
    y = nn::conv2d(up, dec.convs[l]);
    if (l + 1 < dec.convs.size()) nn::relu(y);
    cache.conv_inputs.push_back(std::move(up));
    cache.conv_outputs.push_back(y);
  }
  return RealGrid(arch.input_frames, arch.input_bins, std::move(y.data));
}

inline std::vector<double> decoder_backward(const ArchConfig& arch, const Decoder& dec,
                                            const DecoderCache& cache, const RealGrid& dout,
                                            Decoder& grad) {
  Tensor3 g(1, arch.input_frames, arch.input_bins);
  g.data = dout.data();
  for (std::size_t l = dec.convs.size(); l-- > 0;) {
    if (l + 1 < dec.convs.size()) nn::relu_backward(cache.conv_outputs[l], g);
    Tensor3 dup;
    nn::conv2d_backward(cache.conv_inputs[l], dec.convs[l], g, grad.convs[l], &dup);
    g = nn::upsample_nearest_backward(dup, arch.pool);
  }
  return nn::dense_backward(dec.projection, cache.embedding, g.data, grad.projection);
}

}  // namespace detail

/// Encoder [conv -> max-pool -> ReLU] x L, global max pool, dense to the
/// embedding, then one decoder per configured head.
inline ForwardResult forward(const ModelParams& params, const MagnitudeMap& input) {
  detail::require(input.normalized, "forward: input magnitude must be normalized");
  ForwardResult r;
  r.cache.arch = params.arch;
  r.cache.params_fingerprint = detail::fingerprint(params);
  r.embedding = detail::run_encoder(params, input, &r.cache);
  r.phase_raw = detail::run_decoder(params.arch, params.phase_decoder, r.embedding.values,
                                    r.cache.phase);
  RealGrid wrapped = r.phase_raw;
  for (double& v : wrapped.data()) v = wrap_angle(v);
  r.phase = InstFreqMap{std::move(wrapped), IfAlignment::kCentered};
  if (params.magnitude_decoder) {
    r.cache.magnitude.emplace();
    RealGrid m = detail::run_decoder(params.arch, *params.magnitude_decoder,
                                     r.embedding.values, *r.cache.magnitude);
    r.magnitude = MagnitudeMap{std::move(m), true, input.stats};
  }
  return r;
}

/// Encoder only; identical to forward(...).embedding.
inline Embedding embed(const ModelParams& params, const MagnitudeMap& input) {
  detail::require(input.normalized, "embed: input magnitude must be normalized");
  return detail::run_encoder(params, input, nullptr);
}

/// dLoss/dOutput for each head. The magnitude gradient is required iff the
/// model has a magnitude head.
struct HeadGradients {
  RealGrid phase;
  std::optional<RealGrid> magnitude;
};

/// Backpropagates head gradients through the cached forward pass. Returns
/// gradients shaped like params.
inline ModelParams backward(const ModelParams& params, const ForwardCache& cache,
                            const HeadGradients& grads) {
  const ArchConfig& arch = params.arch;
  if (!(cache.arch == arch) || cache.encoder.size() != params.encoder.size()) {
    throw Error("backward: cache does not match model architecture");
  }
  if (cache.params_fingerprint != detail::fingerprint(params)) {
    throw Error("backward: stale cache (parameters changed since forward)");
  }
  detail::require(grads.phase.rows() == static_cast<std::size_t>(arch.input_frames) &&
                      grads.phase.cols() == static_cast<std::size_t>(arch.input_bins),
                  "backward: phase gradient shape mismatch");
  detail::require(grads.magnitude.has_value() == params.magnitude_decoder.has_value(),
                  "backward: magnitude gradient presence must match the model heads");

  ModelParams g = zero_model(arch);
  g.seed = params.seed;

  std::vector<double> dz = detail::decoder_backward(arch, params.phase_decoder, cache.phase,
                                                    grads.phase, g.phase_decoder);
  if (params.magnitude_decoder) {
    detail::require(cache.magnitude.has_value(), "backward: cache lacks magnitude head");
    detail::require_same_shape(*grads.magnitude, grads.phase, "backward");
    auto dz2 = detail::decoder_backward(arch, *params.magnitude_decoder, *cache.magnitude,
                                        *grads.magnitude, *g.magnitude_decoder);
    for (std::size_t i = 0; i < dz.size(); ++i) dz[i] += dz2[i];
  }

  std::vector<double> dpooled = nn::dense_backward(params.embedding, cache.pooled, dz, g.embedding);

  const auto& last = cache.encoder.back().output;
  Tensor3 dx(last.channels, last.height, last.width);
  for (int c = 0; c < last.channels; ++c) dx.data[cache.global_argmax[c]] += dpooled[c];

  for (std::size_t l = params.encoder.size(); l-- > 0;) {
    const auto& lc = cache.encoder[l];
    nn::relu_backward(lc.output, dx);
    Tensor3 dconv = nn::max_pool_backward(dx, lc.pool_argmax, lc.conv_channels,
                                          lc.conv_height, lc.conv_width);
    Tensor3 din;
    nn::conv2d_backward(lc.input, params.encoder[l], dconv, g.encoder[l], l > 0 ? &din : nullptr);
    dx = std::move(din);
  }
  return g;
}

}  // namespace phasepred
