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

#include "phasepred/grid.hpp"
#include "phasepred/phase.hpp"
#include "phasepred/spectral_maps.hpp"

namespace phasepred {

/// Loss value and its gradient with respect to the prediction grid.
struct LossReport {
  double value = 0.0;
  RealGrid gradient;
};

struct HybridWeights {
  double lambda_mag = 1.0;
};

struct HybridReport {
  double total = 0.0;
  LossReport phase;
  LossReport magnitude;
};

namespace detail {

inline LossReport cosine_loss_grid(const RealGrid& pred, const RealGrid& target,
                                   const RealGrid& weights) {
  require_same_shape(pred, target, "cosine_loss");
  require_same_shape(pred, weights, "cosine_loss");
  require(!pred.empty(), "cosine_loss: empty grids");
  const double scale = 1.0 / static_cast<double>(pred.size());
  LossReport r{0.0, RealGrid(pred.rows(), pred.cols())};
  for (std::size_t i = 0; i < pred.size(); ++i) {
    const double err = pred.data()[i] - target.data()[i];
    const double w = weights.data()[i];
    r.value += w * (1.0 - std::cos(err));
    r.gradient.data()[i] = w * std::sin(err) * scale;
  }
  r.value *= scale;
  return r;
}

inline LossReport mse_grid(const RealGrid& pred, const RealGrid& target) {
  require_same_shape(pred, target, "magnitude_mse");
  require(!pred.empty(), "magnitude_mse: empty grids");
  const double scale = 1.0 / static_cast<double>(pred.size());
  LossReport r{0.0, RealGrid(pred.rows(), pred.cols())};
  for (std::size_t i = 0; i < pred.size(); ++i) {
    const double d = pred.data()[i] - target.data()[i];
    r.value += d * d;
    r.gradient.data()[i] = 2.0 * d * scale;
  }
  r.value *= scale;
  return r;
}

}  // namespace detail

/// Weighted mean of 1 - cos(pred - target) over all cells. With unit weights
/// this is the plain cosine phase loss.
inline LossReport cosine_loss(const InstFreqMap& pred, const InstFreqMap& target,
                              const WeightMap& weights) {
  return detail::cosine_loss_grid(pred.values, target.values, weights.values);
}

inline LossReport magnitude_mse(const MagnitudeMap& pred, const MagnitudeMap& target) {
  detail::require(pred.normalized == target.normalized,
                  "magnitude_mse: normalization state differs");
  return detail::mse_grid(pred.values, target.values);
}

/// cosine_loss + lambda_mag * magnitude_mse; each head keeps its own gradient.
inline HybridReport hybrid_loss(const InstFreqMap& pred_if, const InstFreqMap& target_if,
                                const WeightMap& weights, const MagnitudeMap& pred_mag,
                                const MagnitudeMap& target_mag, HybridWeights hw = {}) {
  detail::require(hw.lambda_mag >= 0.0, "hybrid_loss: lambda_mag must be >= 0");
  HybridReport r;
  r.phase = cosine_loss(pred_if, target_if, weights);
  r.magnitude = magnitude_mse(pred_mag, target_mag);
  for (double& g : r.magnitude.gradient.data()) g *= hw.lambda_mag;
  r.magnitude.value *= hw.lambda_mag;
  r.total = r.phase.value + r.magnitude.value;
  return r;
}

}  // namespace phasepred
