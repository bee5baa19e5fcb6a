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

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <sstream>
#include <string>
#include <vector>

#include "phasepred/losses.hpp"
#include "phasepred/model.hpp"
#include "phasepred/phase.hpp"
#include "phasepred/rng.hpp"
#include "phasepred/spectral_maps.hpp"
#include "phasepred/stft.hpp"

namespace phasepred {

enum class OptimizerKind { kSgd, kAdam };

inline std::string to_string(OptimizerKind k) { return k == OptimizerKind::kSgd ? "sgd" : "adam"; }

inline OptimizerKind parse_optimizer(const std::string& name) {
  if (name == "sgd") return OptimizerKind::kSgd;
  if (name == "adam") return OptimizerKind::kAdam;
  throw Error("unknown optimizer: " + name);
}

struct TrainConfig {
  double learning_rate = 3e-3;
  int steps = 2000;
  int batch_size = 1;
  WeightStrategy weight_strategy = WeightStrategy::kMagnitude;
  std::uint64_t seed = 0;
  OptimizerKind optimizer = OptimizerKind::kAdam;
  HybridWeights hybrid;
};

inline void validate(const TrainConfig& c) {
  detail::require(c.learning_rate >= 0.0 && std::isfinite(c.learning_rate),
                  "TrainConfig: learning_rate must be finite and >= 0");
  detail::require(c.steps >= 1, "TrainConfig: steps must be >= 1");
  detail::require(c.batch_size >= 1, "TrainConfig: batch_size must be >= 1");
  detail::require(c.hybrid.lambda_mag >= 0.0, "TrainConfig: lambda_mag must be >= 0");
}

/// One supervised pair for the phase-prediction task. The magnitude head, if
/// any, reconstructs `input`.
struct TrainExample {
  MagnitudeMap input;  // normalized |X|
  InstFreqMap target;
  WeightMap weights;
};

/// Builds an example from a spectrogram: normalized magnitude input,
/// centered IF target and weights of the given strategy.
inline TrainExample make_example(const ComplexSpectrogram& spec, WeightStrategy strategy) {
  auto [mag, phase] = decompose(spec);
  InstFreqMap target = smoothed_if(phase);
  WeightMap weights = error_weights(mag, target, strategy);
  return {normalize_magnitude(mag), std::move(target), std::move(weights)};
}

struct StepLoss {
  double total = 0.0;
  ModelParams gradient;
};

/// Loss and parameter gradient on one example.
inline StepLoss example_gradient(const ModelParams& params, const TrainExample& ex,
                                 const HybridWeights& hw) {
  ForwardResult fr = forward(params, ex.input);
  HeadGradients heads;
  double total = 0.0;
  if (params.magnitude_decoder) {
    HybridReport rep = hybrid_loss(fr.phase, ex.target, ex.weights, *fr.magnitude, ex.input, hw);
    total = rep.total;
    heads.phase = std::move(rep.phase.gradient);
    heads.magnitude = std::move(rep.magnitude.gradient);
  } else {
    LossReport rep = cosine_loss(fr.phase, ex.target, ex.weights);
    total = rep.value;
    heads.phase = std::move(rep.gradient);
  }
  return {total, backward(params, fr.cache, heads)};
}

/// Parameter update rule over the flattened parameter blocks.
class Optimizer {
 public:
  Optimizer(OptimizerKind kind, double lr) : kind_(kind), lr_(lr) {}

  void step(ModelParams& params, ModelParams& grads) {
    auto p = param_blocks(params);
    auto g = param_blocks(grads);
    if (kind_ == OptimizerKind::kAdam && m_.empty()) {
      for (const auto& b : p) {
        m_.emplace_back(b.values.size(), 0.0);
        v_.emplace_back(b.values.size(), 0.0);
      }
    }
    ++t_;
    const double bc1 = 1.0 - std::pow(kBeta1, t_);
    const double bc2 = 1.0 - std::pow(kBeta2, t_);
    for (std::size_t b = 0; b < p.size(); ++b) {
      auto pv = p[b].values;
      auto gv = g[b].values;
      if (kind_ == OptimizerKind::kSgd) {
        for (std::size_t i = 0; i < pv.size(); ++i) pv[i] -= lr_ * gv[i];
        continue;
      }
      auto& m = m_[b];
      auto& v = v_[b];
      for (std::size_t i = 0; i < pv.size(); ++i) {
        m[i] = kBeta1 * m[i] + (1.0 - kBeta1) * gv[i];
        v[i] = kBeta2 * v[i] + (1.0 - kBeta2) * gv[i] * gv[i];
        pv[i] -= lr_ * (m[i] / bc1) / (std::sqrt(v[i] / bc2) + kEps);
      }
    }
  }

 private:
  static constexpr double kBeta1 = 0.9;
  static constexpr double kBeta2 = 0.999;
  static constexpr double kEps = 1e-8;

  OptimizerKind kind_;
  double lr_;
  int t_ = 0;
  std::vector<std::vector<double>> m_, v_;
};

struct TrainResult {
  ModelParams params;
  std::vector<double> loss_history;  // mean batch loss before each update
};

/// Minibatch training. Example order is reshuffled every pass over the data
/// with a generator seeded from cfg.seed, so runs are bit-reproducible.
inline TrainResult train(ModelParams params, const std::vector<TrainExample>& dataset,
                         const TrainConfig& cfg) {
  validate(cfg);
  detail::require(!dataset.empty(), "train: empty dataset");
  Rng rng(cfg.seed);
  std::vector<std::size_t> order(dataset.size());
  std::size_t cursor = order.size();
  Optimizer opt(cfg.optimizer, cfg.learning_rate);

  TrainResult result;
  result.loss_history.reserve(cfg.steps);
  for (int step = 0; step < cfg.steps; ++step) {
    std::vector<std::size_t> batch(cfg.batch_size);
    for (auto& idx : batch) {
      if (cursor == order.size()) {
        std::iota(order.begin(), order.end(), std::size_t{0});
        rng.shuffle(order);
        cursor = 0;
      }
      idx = order[cursor++];
    }
    // Summing in index order makes the batch result independent of the shuffle.
    std::sort(batch.begin(), batch.end());
    ModelParams batch_grad = zero_model(params.arch);
    double batch_loss = 0.0;
    for (std::size_t idx : batch) {
      StepLoss sl = example_gradient(params, dataset[idx], cfg.hybrid);
      batch_loss += sl.total;
      auto acc = param_blocks(batch_grad);
      auto add = param_blocks(sl.gradient);
      for (std::size_t k = 0; k < acc.size(); ++k) {
        for (std::size_t i = 0; i < acc[k].values.size(); ++i) acc[k].values[i] += add[k].values[i];
      }
    }
    const double inv = 1.0 / cfg.batch_size;
    batch_loss *= inv;
    if (!std::isfinite(batch_loss)) {
      std::ostringstream msg;
      msg << "train: non-finite loss at step " << step << " (diverged; lower the learning rate)";
      throw Error(msg.str());
    }
    result.loss_history.push_back(batch_loss);
    for (auto& blk : param_blocks(batch_grad)) {
      for (double& x : blk.values) x *= inv;
    }
    opt.step(params, batch_grad);
  }
  result.params = std::move(params);
  return result;
}

}  // namespace phasepred
