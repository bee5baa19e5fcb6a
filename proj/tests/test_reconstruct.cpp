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
#include "phasepred/reconstruct.hpp"
#include "phasepred/synth.hpp"

namespace phasepred {
namespace {

AudioClip noise_clip(std::size_t n, std::uint64_t seed) {
  Rng rng(seed);
  AudioClip clip{std::vector<double>(n), 16000};
  for (double& s : clip.samples) s = 0.5 * rng.normal();
  return clip;
}

AudioClip tone_clip(std::uint64_t seed, std::size_t n = synth::kSliceSamples) {
  Rng rng(seed);
  return synth::harmonic_tone(330.0, rng, n);
}

InstFreqMap centered(RealGrid g) { return {std::move(g), IfAlignment::kCentered}; }

TEST(IntegrateIf, Examples) {
  const auto c = integrate_if(centered(RealGrid(5, 3)), {{0.1, -0.2, 3.0}});
  for (std::size_t t = 0; t < 5; ++t) {
    EXPECT_EQ(c.values(t, 0), 0.1);
    EXPECT_EQ(c.values(t, 1), -0.2);
    EXPECT_EQ(c.values(t, 2), 3.0);
  }
  for (auto align : {IfAlignment::kForward, IfAlignment::kCentered}) {
    const auto r = integrate_if({RealGrid(12, 2, kPi / 4), align}, {{0.0, 0.0}});
    for (std::size_t t = 0; t < 12; ++t) {
      EXPECT_NEAR(oracle::angle_distance(r.values(t, 1), wrap_angle(t * kPi / 4)), 0.0, 1e-12);
    }
  }
  EXPECT_THROW(integrate_if(centered(RealGrid(4, 3)), {{0.0, 0.0}}), Error);
}

TEST(IntegrateIf, ForwardIfRoundTripIsExact) {
  for (const AudioClip& clip : {noise_clip(16000, 1), tone_clip(2)}) {
    const PhaseMap phase = decompose(stft(clip, {})).phase;
    const InstFreqMap psi = instantaneous_frequency(phase);
    const auto row0 = phase.values.row(0);
    const PhaseMap back = integrate_if(psi, {{row0.begin(), row0.end()}});
    for (std::size_t i = 0; i < phase.values.size(); ++i) {
      EXPECT_LT(oracle::angle_distance(back.values.data()[i], phase.values.data()[i]), 1e-9);
      EXPECT_GE(back.values.data()[i], -kPi);
      EXPECT_LT(back.values.data()[i], kPi);
    }
  }
}

TEST(MeanGroupDelay, ConstantMap) {
  RealGrid g(4, 6);
  for (std::size_t t = 0; t < 4; ++t)
    for (std::size_t f = 0; f < 6; ++f) g(t, f) = wrap_angle(-0.8 * f + t);
  const std::vector<PhaseMap> corpus{PhaseMap{g}};
  EXPECT_NEAR(estimate_mean_group_delay(corpus).value, -0.8, 1e-12);
  EXPECT_THROW(estimate_mean_group_delay(std::vector<PhaseMap>{}), Error);
}

TEST(MeanGroupDelay, DelayedImpulseTrain) {
  // Disjoint frames so each one holds a single impulse n0 samples in.
  const StftConfig cfg{400, 400, 512};
  for (int n0 : {3, 40, 150}) {
    AudioClip clip{std::vector<double>(4000, 0.0), 16000};
    for (std::size_t t = 0; t < 10; ++t) clip.samples[t * 400 + n0] = 1.0;
    const std::vector<PhaseMap> corpus{decompose(stft(clip, cfg)).phase};
    EXPECT_LT(oracle::angle_distance(estimate_mean_group_delay(corpus).value,
                                     wrap_angle(-kTwoPi * n0 / 512.0)),
              1e-2);
  }
}

TEST(MeanGroupDelay, SymmetricPair) {
  auto ramp = [](double a) {
    RealGrid g(3, 5);
    for (std::size_t t = 0; t < 3; ++t)
      for (std::size_t f = 0; f < 5; ++f) g(t, f) = wrap_angle(a * f);
    return PhaseMap{g};
  };
  const std::vector<PhaseMap> small{ramp(0.5), ramp(-0.5)};
  EXPECT_NEAR(estimate_mean_group_delay(small).value, 0.0, 1e-12);
  const std::vector<PhaseMap> right{ramp(kPi / 2), ramp(-kPi / 2)};
  EXPECT_THROW(estimate_mean_group_delay(right), Error);
}

TEST(RetrieveOffsets, Examples) {
  const auto zero = retrieve_offsets(centered(RealGrid(6, 4)), {0.0});
  for (double v : zero.values) EXPECT_EQ(v, 0.0);

  const auto two = retrieve_offsets({RealGrid(5, 2), IfAlignment::kForward}, {0.5});
  ASSERT_EQ(two.values.size(), 2u);
  EXPECT_EQ(two.values[0], 0.0);
  EXPECT_DOUBLE_EQ(two.values[1], 0.5);
  EXPECT_THROW(retrieve_offsets(centered(RealGrid(5, 1)), {0.0}), Error);
}

TEST(RetrieveOffsets, PostconditionOnRandomIf) {
  Rng rng(3);
  for (auto align : {IfAlignment::kForward, IfAlignment::kCentered}) {
    for (double tau : {-2.45, 0.0, 1.3}) {
      const InstFreqMap psi{oracle::random_grid(20, 16, rng, -1.0, 1.0), align};
      const PhaseMap phase = integrate_if(psi, retrieve_offsets(psi, {tau}));
      std::vector<double> diffs(20);
      for (std::size_t f = 0; f + 1 < 16; ++f) {
        for (std::size_t t = 0; t < 20; ++t) diffs[t] = phase.values(t, f + 1) - phase.values(t, f);
        EXPECT_LT(oracle::angle_distance(circular_mean(diffs), tau), 1e-9);
      }
    }
  }
}

TEST(RetrieveOffsets, TruePhaseRecoveredUpToPerBinConstant) {
  const PhaseMap phase = decompose(stft(tone_clip(4), {})).phase;
  const InstFreqMap psi = instantaneous_frequency(phase);
  const std::vector<PhaseMap> corpus{phase};
  const PhaseMap rec = integrate_if(psi, retrieve_offsets(psi, estimate_mean_group_delay(corpus)));
  for (std::size_t f = 0; f < phase.bins(); ++f) {
    const double c = rec.values(0, f) - phase.values(0, f);
    for (std::size_t t = 1; t < phase.frames(); ++t) {
      EXPECT_LT(oracle::angle_distance(rec.values(t, f) - phase.values(t, f), c), 1e-9);
    }
  }
}

MagnitudeMap raw(RealGrid g) { return {std::move(g), false, {}}; }

TEST(SpectralConvergence, Examples) {
  Rng rng(5);
  const auto a = raw(oracle::random_grid(6, 7, rng, 0.0, 3.0));
  EXPECT_EQ(spectral_convergence(a, a), -12.0);
  auto b = a;
  b.values(2, 3) += 10.0;
  EXPECT_NEAR(spectral_convergence(b, a), 1.0, 1e-15);
  const auto c = raw(oracle::random_grid(6, 7, rng, 0.0, 3.0));
  double sq = 0.0;
  for (std::size_t r = 0; r < 6; ++r)
    for (std::size_t k = 0; k < 7; ++k) sq += std::pow(a.values(r, k) - c.values(r, k), 2);
  EXPECT_NEAR(spectral_convergence(a, c), std::log10(std::sqrt(sq)), 1e-12);
  EXPECT_THROW(spectral_convergence(a, raw(RealGrid(7, 6))), Error);
}

TEST(SpectralConvergence, SymmetricAndPermutationInvariant) {
  Rng rng(6);
  for (int trial = 0; trial < 10; ++trial) {
    const auto a = raw(oracle::random_grid(5, 8, rng, 0.0, 1.0));
    const auto b = raw(oracle::random_grid(5, 8, rng, 0.0, 1.0));
    EXPECT_EQ(spectral_convergence(a, b), spectral_convergence(b, a));
    std::vector<std::size_t> rows{0, 1, 2, 3, 4}, cols{0, 1, 2, 3, 4, 5, 6, 7};
    rng.shuffle(rows);
    rng.shuffle(cols);
    auto pa = a, pb = b;
    for (std::size_t r = 0; r < 5; ++r)
      for (std::size_t c = 0; c < 8; ++c) {
        pa.values(r, c) = a.values(rows[r], cols[c]);
        pb.values(r, c) = b.values(rows[r], cols[c]);
      }
    EXPECT_NEAR(spectral_convergence(pa, pb), spectral_convergence(a, b), 1e-12);
  }
}

void expect_monotone(const ConvergenceTrace& trace) {
  for (std::size_t k = 1; k < trace.records.size(); ++k) {
    EXPECT_LE(trace.records[k].distance, trace.records[k - 1].distance + 1e-9) << k;
  }
}

TEST(GriffinLim, TruePhaseIsNearExactAtStart) {
  const auto [mag, phase] = decompose(stft(tone_clip(7), {}));
  const auto rec = griffin_lim(mag, phase, 3);
  EXPECT_LT(rec.trace.records.front().log_sc, -6.0);
  ASSERT_EQ(rec.trace.records.size(), 4u);
  for (std::size_t k = 0; k < 4; ++k) EXPECT_EQ(rec.trace.records[k].k, int(k));
}

TEST(GriffinLim, ZeroAndRandomInitsDecrease) {
  const auto [mag, phase] = decompose(stft(noise_clip(16000, 8), {}));
  Rng rng(9);
  PhaseMap random{oracle::random_grid(mag.frames(), mag.bins(), rng, -kPi, kPi)};
  for (const PhaseMap& init : {PhaseMap{RealGrid(mag.frames(), mag.bins())}, random}) {
    const auto rec = griffin_lim(mag, init, 100);
    ASSERT_EQ(rec.trace.records.size(), 101u);
    expect_monotone(rec.trace);
    EXPECT_LT(rec.trace.records.back().log_sc, rec.trace.records.front().log_sc);
  }
}

TEST(GriffinLim, MonotoneOnTones) {
  for (std::uint64_t seed : {10, 11}) {
    const auto [mag, phase] = decompose(stft(tone_clip(seed), {}));
    expect_monotone(griffin_lim(mag, PhaseMap{RealGrid(mag.frames(), mag.bins())}, 40).trace);
  }
}

TEST(GriffinLim, ZeroIterationsReturnsInitialization) {
  const auto [mag, phase] = decompose(stft(tone_clip(12), {}));
  const auto rec = griffin_lim(mag, phase, 0);
  ASSERT_EQ(rec.trace.records.size(), 1u);
  EXPECT_EQ(rec.audio.samples, istft(recompose(mag, phase, {})).samples);
  EXPECT_EQ(rec.audio.size(), 95u * 160 + 400);
}

TEST(GriffinLim, Errors) {
  const auto [mag, phase] = decompose(stft(tone_clip(13), {}));
  EXPECT_THROW(griffin_lim(mag, PhaseMap{RealGrid(3, 3)}, 1), Error);
  EXPECT_THROW(griffin_lim(mag, phase, -1), Error);
  EXPECT_THROW(griffin_lim(normalize_magnitude(mag), phase, 1), Error);
}

TEST(ReconstructWaveform, OracleIfBeatsZeroPhase) {
  const auto [mag, phase] = decompose(stft(tone_clip(14), {}));
  const std::vector<PhaseMap> corpus{phase};
  const auto rec = reconstruct_waveform(mag, smoothed_if(phase), estimate_mean_group_delay(corpus), 0);
  const auto zero = griffin_lim(mag, PhaseMap{RealGrid(mag.frames(), mag.bins())}, 0);
  EXPECT_LE(rec.trace.records.front().log_sc, zero.trace.records.front().log_sc);
}

TEST(ReconstructWaveform, MatchesPipelineComposition) {
  const auto [mag, phase] = decompose(stft(tone_clip(15), {}));
  const InstFreqMap psi = smoothed_if(phase);
  const MeanGroupDelay tau{-2.4};
  const auto direct = griffin_lim(mag, integrate_if(psi, retrieve_offsets(psi, tau)), 0);
  const auto rec = reconstruct_waveform(mag, psi, tau, 0);
  EXPECT_EQ(rec.audio.samples, direct.audio.samples);

  const auto zero_if = reconstruct_waveform(mag, centered(RealGrid(mag.frames(), mag.bins())), {0.0}, 5);
  const auto zero_gl = griffin_lim(mag, PhaseMap{RealGrid(mag.frames(), mag.bins())}, 5);
  EXPECT_EQ(zero_if.audio.samples, zero_gl.audio.samples);
}

TEST(TraceCsv, HeaderAndRows) {
  ConvergenceTrace t;
  t.records = {{0, 2.5, 0.25}, {1, 1.0, -0.5}};
  EXPECT_EQ(trace_to_csv(t), "k,d_k,log_sc\n0,2.5,0.25\n1,1,-0.5\n");
}

}  // namespace
}  // namespace phasepred
