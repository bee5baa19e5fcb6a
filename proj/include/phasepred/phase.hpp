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
#include <string>
#include <vector>

#include "phasepred/angles.hpp"
#include "phasepred/grid.hpp"
#include "phasepred/spectral_maps.hpp"

namespace phasepred {

enum class IfAlignment { kForward, kCentered };

/// Wrapped temporal phase advance per cell. Always T rows; boundary rows
/// hold one-sided differences.
struct InstFreqMap {
  RealGrid values;
  IfAlignment alignment = IfAlignment::kCentered;

  std::size_t frames() const { return values.rows(); }
  std::size_t bins() const { return values.cols(); }
};

/// Wrapped phase difference between adjacent bins, T x (F - 1).
struct GroupDelayMap {
  RealGrid values;
};

enum class WeightStrategy { kNone, kMagnitude, kSqrtMagnitude, kSmoothness };

inline std::string to_string(WeightStrategy s) {
  switch (s) {
    case WeightStrategy::kNone: return "none";
    case WeightStrategy::kMagnitude: return "mag";
    case WeightStrategy::kSqrtMagnitude: return "sqrtmag";
    case WeightStrategy::kSmoothness: return "smoothness";
  }
  return "unknown";
}

inline WeightStrategy parse_weight_strategy(const std::string& name) {
  if (name == "none") return WeightStrategy::kNone;
  if (name == "mag" || name == "magnitude") return WeightStrategy::kMagnitude;
  if (name == "sqrtmag" || name == "sqrt-magnitude") return WeightStrategy::kSqrtMagnitude;
  if (name == "smoothness") return WeightStrategy::kSmoothness;
  throw Error("unknown weighting strategy: " + name);
}

/// Nonnegative per-cell loss weights with mean 1.
struct WeightMap {
  RealGrid values;
  WeightStrategy strategy = WeightStrategy::kNone;
};

/// Forward phase differences along time, wrapped. The missing last row
/// repeats row T - 2.
inline InstFreqMap instantaneous_frequency(const PhaseMap& phase) {
  const auto& p = phase.values;
  detail::require(p.rows() >= 2, "instantaneous_frequency: need at least 2 frames");
  RealGrid out(p.rows(), p.cols());
  for (std::size_t t = 0; t + 1 < p.rows(); ++t) {
    for (std::size_t f = 0; f < p.cols(); ++f) {
      out(t, f) = wrap_angle(p(t + 1, f) - p(t, f));
    }
  }
  const std::size_t last = p.rows() - 1;
  for (std::size_t f = 0; f < p.cols(); ++f) out(last, f) = out(last - 1, f);
  return {std::move(out), IfAlignment::kForward};
}

namespace detail {

// Unwraps a sequence of wrapped differences in place: each step is replaced by
// the 2*pi-equivalent value closest to its predecessor. A step of exactly pi
// in either direction is taken as +pi.
inline void unwrap_in_place(std::vector<double>& seq) {
  for (std::size_t i = 1; i < seq.size(); ++i) {
    double step = wrap_angle(seq[i] - seq[i - 1]);
    if (step == -kPi) step = kPi;
    seq[i] = seq[i - 1] + step;
  }
}

}  // namespace detail

/// Centered instantaneous frequency: per bin, unwrap the forward differences
/// along time, average neighbours and wrap back. Row 0 and row T - 1 fall back
/// to the one-sided difference.
inline InstFreqMap smoothed_if(const PhaseMap& phase) {
  const auto& p = phase.values;
  detail::require(p.rows() >= 3, "smoothed_if: need at least 3 frames");
  const std::size_t T = p.rows(), F = p.cols();
  RealGrid out(T, F);
  std::vector<double> diffs(T - 1);
  for (std::size_t f = 0; f < F; ++f) {
    for (std::size_t t = 0; t + 1 < T; ++t) diffs[t] = wrap_angle(p(t + 1, f) - p(t, f));
    out(0, f) = diffs.front();
    out(T - 1, f) = diffs.back();
    detail::unwrap_in_place(diffs);
    for (std::size_t t = 1; t + 1 < T; ++t) {
      out(t, f) = wrap_angle(0.5 * (diffs[t - 1] + diffs[t]));
    }
  }
  return {std::move(out), IfAlignment::kCentered};
}

inline GroupDelayMap group_delay(const PhaseMap& phase) {
  const auto& p = phase.values;
  detail::require(p.cols() >= 2, "group_delay: need at least 2 bins");
  RealGrid out(p.rows(), p.cols() - 1);
  for (std::size_t t = 0; t < p.rows(); ++t) {
    for (std::size_t f = 0; f + 1 < p.cols(); ++f) {
      out(t, f) = wrap_angle(p(t, f + 1) - p(t, f));
    }
  }
  return {std::move(out)};
}

namespace detail {

inline void rescale_to_unit_mean(RealGrid& w, const char* where) {
  double sum = 0.0;
  for (double v : w.data()) sum += v;
  const double mean = sum / static_cast<double>(w.size());
  if (!(mean > 0.0)) {
    throw Error(std::string(where) + ": weights sum to zero, cannot rescale");
  }
  for (double& v : w.data()) v /= mean;
}

}  // namespace detail

/// Raw smoothness 1 / (1 + sum of |wrap(psi' - psi)|) over the 4-neighbourhood.
/// Edge cells only count the neighbours they have.
inline RealGrid smoothness_raw(const InstFreqMap& psi) {
  const auto& v = psi.values;
  detail::require(v.rows() >= 2 && v.cols() >= 2,
                  "smoothness_weights: need at least 2x2 cells");
  const std::size_t T = v.rows(), F = v.cols();
  RealGrid out(T, F);
  for (std::size_t t = 0; t < T; ++t) {
    for (std::size_t f = 0; f < F; ++f) {
      const double c = v(t, f);
      double tv = 0.0;
      if (t > 0) tv += std::abs(wrap_angle(v(t - 1, f) - c));
      if (t + 1 < T) tv += std::abs(wrap_angle(v(t + 1, f) - c));
      if (f > 0) tv += std::abs(wrap_angle(v(t, f - 1) - c));
      if (f + 1 < F) tv += std::abs(wrap_angle(v(t, f + 1) - c));
      out(t, f) = 1.0 / (1.0 + tv);
    }
  }
  return out;
}

inline WeightMap smoothness_weights(const InstFreqMap& psi) {
  RealGrid w = smoothness_raw(psi);
  detail::rescale_to_unit_mean(w, "smoothness_weights");
  return {std::move(w), WeightStrategy::kSmoothness};
}

/// Loss weights for the chosen strategy. Magnitude strategies take the raw,
/// unnormalized |X|.
inline WeightMap error_weights(const MagnitudeMap& mag, const InstFreqMap& psi,
                               WeightStrategy strategy) {
  detail::require_same_shape(mag.values, psi.values, "error_weights");
  switch (strategy) {
    case WeightStrategy::kNone:
      return {RealGrid(mag.frames(), mag.bins(), 1.0), strategy};
    case WeightStrategy::kMagnitude:
    case WeightStrategy::kSqrtMagnitude: {
      detail::require(!mag.normalized,
                      "error_weights: magnitude weighting needs the raw |X|");
      RealGrid w = mag.values;
      if (strategy == WeightStrategy::kSqrtMagnitude) {
        for (double& x : w.data()) x = std::sqrt(x);
      }
      detail::rescale_to_unit_mean(w, "error_weights");
      return {std::move(w), strategy};
    }
    case WeightStrategy::kSmoothness:
      return smoothness_weights(psi);
  }
  throw Error("error_weights: unknown strategy");
}

}  // namespace phasepred
