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
#include <complex>
#include <optional>

#include "phasepred/angles.hpp"
#include "phasepred/grid.hpp"
#include "phasepred/stft.hpp"

namespace phasepred {

struct NormStats {
  double mean = 0.0;
  double std = 1.0;
  friend bool operator==(const NormStats&, const NormStats&) = default;
};

/// |X| on the T x F grid, optionally standardized to zero mean / unit std.
struct MagnitudeMap {
  RealGrid values;
  bool normalized = false;
  NormStats stats;  // meaningful only when normalized

  std::size_t frames() const { return values.rows(); }
  std::size_t bins() const { return values.cols(); }
};

/// arg(X) on the T x F grid, every value in [-pi, pi).
struct PhaseMap {
  RealGrid values;

  std::size_t frames() const { return values.rows(); }
  std::size_t bins() const { return values.cols(); }
};

struct Decomposition {
  MagnitudeMap magnitude;
  PhaseMap phase;
};

/// Splits X into |X| and arg(X). Exactly-zero cells get phase 0.
inline Decomposition decompose(const ComplexSpectrogram& spec) {
  const auto& X = spec.values;
  RealGrid mag(X.rows(), X.cols()), phase(X.rows(), X.cols());
  for (std::size_t i = 0; i < X.size(); ++i) {
    const auto v = X.data()[i];
    detail::require(std::isfinite(v.real()) && std::isfinite(v.imag()),
                    "decompose: non-finite spectrogram value");
    mag.data()[i] = std::abs(v);
    phase.data()[i] =
        (v.real() == 0.0 && v.imag() == 0.0) ? 0.0 : wrap_angle(std::arg(v));
  }
  return {MagnitudeMap{std::move(mag), false, {}}, PhaseMap{std::move(phase)}};
}

/// mag * exp(i * phase), cell-wise.
inline ComplexSpectrogram recompose(const MagnitudeMap& mag, const PhaseMap& phase,
                                    const StftConfig& config) {
  detail::require(!mag.normalized, "recompose: magnitude must be unnormalized");
  detail::require_same_shape(mag.values, phase.values, "recompose");
  Grid<std::complex<double>> X(mag.frames(), mag.bins());
  for (std::size_t i = 0; i < X.size(); ++i) {
    X.data()[i] = std::polar(mag.values.data()[i], phase.values.data()[i]);
  }
  return {std::move(X), config};
}

/// Standardizes over all T*F cells with the population standard deviation.
inline MagnitudeMap normalize_magnitude(const MagnitudeMap& mag) {
  detail::require(!mag.normalized, "normalize_magnitude: map is already normalized");
  detail::require(!mag.values.empty(), "normalize_magnitude: empty map");
  const auto& v = mag.values.data();
  const double n = static_cast<double>(v.size());
  double mean = 0.0;
  for (double x : v) mean += x;
  mean /= n;
  double var = 0.0;
  for (double x : v) var += (x - mean) * (x - mean);
  const double std = std::sqrt(var / n);
  if (!(std >= 1e-12)) {
    throw Error("normalize_magnitude: standard deviation below 1e-12 "
                "(constant or silent input)");
  }
  MagnitudeMap out{mag.values, true, {mean, std}};
  for (double& x : out.values.data()) x = (x - mean) / std;
  return out;
}

inline MagnitudeMap denormalize_magnitude(const MagnitudeMap& mag) {
  detail::require(mag.normalized, "denormalize_magnitude: map is not normalized");
  MagnitudeMap out{mag.values, false, {}};
  for (double& x : out.values.data()) x = x * mag.stats.std + mag.stats.mean;
  return out;
}

}  // namespace phasepred
