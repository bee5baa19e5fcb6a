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

#include <gtest/gtest.h>

#include "oracles.hpp"
#include "phasepred/losses.hpp"

namespace phasepred {
namespace {

InstFreqMap if_map(RealGrid g) { return {std::move(g), IfAlignment::kCentered}; }
WeightMap unit(std::size_t r, std::size_t c) { return {RealGrid(r, c, 1.0), WeightStrategy::kNone}; }

TEST(CosineLoss, PerfectPredictionIsZero) {
  Rng rng(1);
  const auto target = if_map(oracle::random_grid(5, 6, rng, -kPi, kPi));
  WeightMap w{oracle::random_grid(5, 6, rng, 0.0, 2.0), WeightStrategy::kMagnitude};
  const auto r = cosine_loss(target, target, w);
  EXPECT_EQ(r.value, 0.0);
  for (double g : r.gradient.data()) EXPECT_EQ(g, 0.0);
}

TEST(CosineLoss, OppositePhaseIsTwo) {
  const auto target = if_map(RealGrid(4, 4, -1.0));
  const auto pred = if_map(RealGrid(4, 4, -1.0 + kPi));
  EXPECT_NEAR(cosine_loss(pred, target, unit(4, 4)).value, 2.0, 1e-12);
}

TEST(CosineLoss, UniformPredictionAveragesOne) {
  Rng rng(7);
  const auto pred = if_map(oracle::random_grid(400, 250, rng, -kPi, kPi));
  const auto target = if_map(oracle::random_grid(400, 250, rng, -0.3, 0.3));
  EXPECT_NEAR(cosine_loss(pred, target, unit(400, 250)).value, 1.0, 0.02);
}

TEST(CosineLoss, BoundsSymmetryAndPeriodicity) {
  Rng rng(2);
  for (int trial = 0; trial < 20; ++trial) {
    const auto a = if_map(oracle::random_grid(6, 5, rng, -kPi, kPi));
    const auto b = if_map(oracle::random_grid(6, 5, rng, -kPi, kPi));
    WeightMap w{oracle::random_grid(6, 5, rng, 0.0, 3.0), WeightStrategy::kMagnitude};
    const double v = cosine_loss(a, b, w).value;
    const double wmax = *std::max_element(w.values.data().begin(), w.values.data().end());
    EXPECT_GE(v, 0.0);
    EXPECT_LE(v, 2.0 * wmax);
    EXPECT_NEAR(cosine_loss(b, a, w).value, v, 1e-15);
    auto shifted = a;
    shifted.values(2, 3) += kTwoPi;
    shifted.values(0, 0) -= 2 * kTwoPi;
    EXPECT_NEAR(cosine_loss(shifted, b, w).value, v, 1e-12);
  }
}

TEST(CosineLoss, ZeroWeightCellsContributeNothing) {
  Rng rng(3);
  const auto a = if_map(oracle::random_grid(4, 4, rng, -kPi, kPi));
  const auto b = if_map(oracle::random_grid(4, 4, rng, -kPi, kPi));
  WeightMap w = unit(4, 4);
  w.values(1, 2) = 0.0;
  const auto r = cosine_loss(a, b, w);
  EXPECT_EQ(r.gradient(1, 2), 0.0);
  auto a2 = a;
  a2.values(1, 2) += 1.234;
  EXPECT_EQ(cosine_loss(a2, b, w).value, r.value);
}

TEST(CosineLoss, GradientMatchesFiniteDifferences) {
  Rng rng(4);
  auto pred = if_map(oracle::random_grid(8, 8, rng, -kPi, kPi));
  const auto target = if_map(oracle::random_grid(8, 8, rng, -kPi, kPi));
  WeightMap w{oracle::random_grid(8, 8, rng, 0.0, 2.0), WeightStrategy::kMagnitude};
  const auto analytic = cosine_loss(pred, target, w).gradient.data();
  const auto numeric = oracle::central_differences(
      pred.values.data(), [&] { return cosine_loss(pred, target, w).value; });
  EXPECT_LT(oracle::relative_error(analytic, numeric), 1e-5);
}

TEST(CosineLoss, ShapeMismatch) {
  EXPECT_THROW(cosine_loss(if_map(RealGrid(2, 3)), if_map(RealGrid(3, 2)), unit(2, 3)), Error);
  EXPECT_THROW(cosine_loss(if_map(RealGrid(2, 3)), if_map(RealGrid(2, 3)), unit(2, 2)), Error);
}

MagnitudeMap norm_map(RealGrid g) { return {std::move(g), true, {}}; }

TEST(MagnitudeMse, Examples) {
  Rng rng(5);
  const auto t = norm_map(oracle::random_grid(3, 5, rng, -2.0, 2.0));
  EXPECT_EQ(magnitude_mse(t, t).value, 0.0);
  auto p = t;
  for (double& v : p.values.data()) v += 1.0;
  const auto r = magnitude_mse(p, t);
  EXPECT_NEAR(r.value, 1.0, 1e-12);
  for (double g : r.gradient.data()) EXPECT_NEAR(g, 2.0 / 15.0, 1e-15);
}

TEST(MagnitudeMse, MatchesDirectSummation) {
  Rng rng(6);
  const auto a = norm_map(oracle::random_grid(7, 9, rng, -3.0, 3.0));
  const auto b = norm_map(oracle::random_grid(7, 9, rng, -3.0, 3.0));
  double direct = 0.0;
  for (std::size_t r = 0; r < 7; ++r)
    for (std::size_t c = 0; c < 9; ++c) direct += std::pow(a.values(r, c) - b.values(r, c), 2);
  EXPECT_NEAR(magnitude_mse(a, b).value, direct / 63.0, 1e-12);
}

TEST(MagnitudeMse, GradientMatchesFiniteDifferences) {
  Rng rng(7);
  auto a = norm_map(oracle::random_grid(8, 8, rng, -3.0, 3.0));
  const auto b = norm_map(oracle::random_grid(8, 8, rng, -3.0, 3.0));
  const auto analytic = magnitude_mse(a, b).gradient.data();
  const auto numeric =
      oracle::central_differences(a.values.data(), [&] { return magnitude_mse(a, b).value; });
  EXPECT_LT(oracle::relative_error(analytic, numeric), 1e-5);
}

TEST(MagnitudeMse, Errors) {
  EXPECT_THROW(magnitude_mse(norm_map(RealGrid(2, 2)), norm_map(RealGrid(2, 3))), Error);
  EXPECT_THROW(magnitude_mse(norm_map(RealGrid(2, 2)), MagnitudeMap{RealGrid(2, 2), false, {}}),
               Error);
}

TEST(HybridLoss, Composition) {
  Rng rng(8);
  const auto pi = if_map(oracle::random_grid(4, 4, rng, -kPi, kPi));
  const auto ti = if_map(oracle::random_grid(4, 4, rng, -kPi, kPi));
  const auto pm = norm_map(oracle::random_grid(4, 4, rng, -1.0, 1.0));
  const auto tm = norm_map(oracle::random_grid(4, 4, rng, -1.0, 1.0));
  const auto w = unit(4, 4);

  const auto only_phase = hybrid_loss(pi, ti, w, pm, tm, {0.0});
  EXPECT_EQ(only_phase.total, cosine_loss(pi, ti, w).value);
  for (double g : only_phase.magnitude.gradient.data()) EXPECT_EQ(g, 0.0);

  EXPECT_EQ(hybrid_loss(ti, ti, w, tm, tm, {}).total, 0.0);

  const auto both = hybrid_loss(pi, ti, w, pm, tm, {1.0});
  EXPECT_DOUBLE_EQ(both.total, both.phase.value + both.magnitude.value);
  EXPECT_DOUBLE_EQ(both.magnitude.value, magnitude_mse(pm, tm).value);

  const auto scaled = hybrid_loss(pi, ti, w, pm, tm, {2.5});
  EXPECT_DOUBLE_EQ(scaled.magnitude.value, 2.5 * magnitude_mse(pm, tm).value);
  EXPECT_THROW(hybrid_loss(pi, ti, w, pm, tm, {-1.0}), Error);
}

TEST(HybridLoss, AdditivityExample) {
  // Components 0.3 and 0.2: two cells with 1 - cos = 0.6, 0, and MSE 0.2.
  const auto ti = if_map(RealGrid(1, 2, 0.0));
  auto pi = ti;
  pi.values(0, 0) = std::acos(0.4);
  auto tm = norm_map(RealGrid(1, 2, 0.0));
  auto pm = tm;
  pm.values(0, 0) = std::sqrt(0.4);
  const auto r = hybrid_loss(pi, ti, unit(1, 2), pm, tm, {1.0});
  EXPECT_NEAR(r.phase.value, 0.3, 1e-12);
  EXPECT_NEAR(r.magnitude.value, 0.2, 1e-12);
  EXPECT_NEAR(r.total, 0.5, 1e-12);
}

}  // namespace
}  // namespace phasepred
