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
#include <numbers>
#include <span>
#include <string>

#include "phasepred/error.hpp"

namespace phasepred {

inline constexpr double kPi = std::numbers::pi;
inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

/// Maps theta to the half-open interval [-pi, pi).
inline double wrap_angle(double theta) {
  if (!std::isfinite(theta)) {
    throw Error("wrap_angle: non-finite input");
  }
  double r = theta - kTwoPi * std::floor((theta + kPi) / kTwoPi);
  // floor() rounding can land exactly on the excluded end or just outside.
  if (r >= kPi) r -= kTwoPi;
  if (r < -kPi) r += kTwoPi;
  return r;
}

/// Angle of the barycenter of unit-circle points. Throws when the barycenter
/// lies within 1e-12 of the origin, where the mean direction is undefined.
inline double circular_mean(std::span<const double> angles) {
  detail::require(!angles.empty(), "circular_mean: empty sequence");
  double re = 0.0, im = 0.0;
  for (double a : angles) {
    re += std::cos(a);
    im += std::sin(a);
  }
  const double n = static_cast<double>(angles.size());
  if (std::hypot(re / n, im / n) < 1e-12) {
    throw Error("circular_mean: barycenter at the origin, mean undefined");
  }
  return wrap_angle(std::atan2(im, re));
}

}  // namespace phasepred
