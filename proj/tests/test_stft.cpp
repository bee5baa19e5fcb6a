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
#include "phasepred/spectral_maps.hpp"
#include "phasepred/stft.hpp"

namespace phasepred {
namespace {

AudioClip noise_clip(std::size_t n, std::uint64_t seed) {
  Rng rng(seed);
  AudioClip clip{std::vector<double>(n), 16000};
  for (double& s : clip.samples) s = rng.uniform(-1.0, 1.0);
  return clip;
}

double interior_rel_error(const AudioClip& a, const AudioClip& b, std::size_t margin) {
  double num = 0.0, den = 0.0;
  for (std::size_t i = margin; i + margin < a.size(); ++i) {
    num += (a.samples[i] - b.samples[i]) * (a.samples[i] - b.samples[i]);
    den += a.samples[i] * a.samples[i];
  }
  return std::sqrt(num / den);
}

TEST(Stft, DefaultShapeFor975Milliseconds) {
  const auto spec = stft(AudioClip{std::vector<double>(15600, 0.1), 16000}, StftConfig{});
  EXPECT_EQ(spec.frames(), 96u);
  EXPECT_EQ(spec.bins(), 256u);
}

TEST(Stft, ZeroClipGivesZeroSpectrogram) {
  const auto spec = stft(AudioClip{std::vector<double>(2000, 0.0), 16000}, StftConfig{});
  for (const auto& v : spec.values.data()) EXPECT_EQ(std::abs(v), 0.0);
}

TEST(Stft, MatchesDirectDftOnEveryFrame) {
  const AudioClip clip = noise_clip(1200, 3);
  const StftConfig cfg;
  const auto spec = stft(clip, cfg);
  const auto window = oracle::hann(cfg.window_length);
  for (std::size_t t = 0; t < spec.frames(); ++t) {
    const auto ref = oracle::naive_frame_dft(clip.samples, t * cfg.hop_length, window, cfg.fft_size);
    for (std::size_t f = 0; f < spec.bins(); ++f) {
      EXPECT_NEAR(std::abs(spec.values(t, f) - ref[f + 1]), 0.0, 1e-9);
    }
  }
}

TEST(Stft, OneKilohertzSinePeaksAtBin31) {
  const StftConfig cfg;
  AudioClip clip{oracle::sine(1000.0, 16000.0, 400), 16000};
  const auto ref = oracle::naive_frame_dft(clip.samples, 0, oracle::hann(400), 512);
  std::size_t oracle_peak = 1;
  for (std::size_t k = 1; k < ref.size(); ++k) {
    if (std::abs(ref[k]) > std::abs(ref[oracle_peak])) oracle_peak = k;
  }
  ASSERT_EQ(oracle_peak, 32u);

  const auto spec = stft(clip, cfg);
  ASSERT_EQ(spec.frames(), 1u);
  std::size_t peak = 0;
  for (std::size_t f = 0; f < spec.bins(); ++f) {
    if (std::abs(spec.values(0, f)) > std::abs(spec.values(0, peak))) peak = f;
  }
  EXPECT_EQ(peak, 31u);
}

TEST(Stft, ShapeContractAcrossConfigs) {
  for (int win : {64, 100, 400}) {
    for (int hop : {1, 16, 37, 64}) {
      if (hop > win) continue;
      for (int fft : {128, 512}) {
        if (win > fft) continue;
        StftConfig cfg{win, hop, fft};
        for (std::size_t n : {std::size_t(win), std::size_t(win) + 1, std::size_t(3 * win + 7)}) {
          const auto spec = stft(AudioClip{std::vector<double>(n, 0.0), 16000}, cfg);
          EXPECT_EQ(spec.frames(), 1 + (n - win) / hop);
          EXPECT_EQ(spec.bins(), static_cast<std::size_t>(fft / 2));
        }
      }
    }
  }
}

TEST(Stft, Linearity) {
  const AudioClip x = noise_clip(3000, 1), y = noise_clip(3000, 2);
  const double a = 0.7, b = -2.5;
  AudioClip mix{std::vector<double>(3000), 16000};
  for (std::size_t i = 0; i < mix.size(); ++i) mix.samples[i] = a * x.samples[i] + b * y.samples[i];
  const auto sx = stft(x, {}), sy = stft(y, {}), sm = stft(mix, {});
  for (std::size_t i = 0; i < sm.values.size(); ++i) {
    EXPECT_NEAR(std::abs(sm.values.data()[i] - (a * sx.values.data()[i] + b * sy.values.data()[i])),
                0.0, 1e-9);
  }
}

TEST(Stft, Errors) {
  EXPECT_THROW(stft(AudioClip{std::vector<double>(399, 0.0), 16000}, {}), Error);
  EXPECT_THROW(stft(AudioClip{std::vector<double>(800, 0.0), 8000}, {}), Error);
  EXPECT_THROW(stft(AudioClip{std::vector<double>(800, 0.0), 16000}, StftConfig{400, 500, 512}),
               Error);
  EXPECT_THROW(stft(AudioClip{std::vector<double>(800, 0.0), 16000}, StftConfig{600, 160, 512}),
               Error);
}

TEST(Stft, FromMillisecondsGivesDefaults) {
  EXPECT_EQ(StftConfig::from_ms(16000, 25.0, 10.0, 512), StftConfig{});
}

TEST(Istft, RoundTripOnRandomClip) {
  const AudioClip x = noise_clip(16000, 11);
  const AudioClip y = istft(stft(x, {}));
  ASSERT_EQ(y.size(), StftConfig{}.samples_for(static_cast<int>(stft(x, {}).frames())));
  EXPECT_LT(interior_rel_error(x, y, 400), 1e-6);
}

TEST(Istft, RoundTripPropertyAcrossConfigs) {
  for (auto cfg : {StftConfig{}, StftConfig{256, 64, 256, WindowKind::kHann, false},
                   StftConfig{100, 25, 128},
                   StftConfig{400, 160, 512, WindowKind::kHamming}}) {
    for (std::size_t n : {std::size_t(2 * cfg.window_length + 37), std::size_t(5000)}) {
      const AudioClip x = noise_clip(n, n + cfg.window_length);
      const AudioClip y = istft(stft(x, cfg));
      EXPECT_LT(interior_rel_error(x, y, cfg.window_length), 1e-6)
          << cfg.window_length << "/" << cfg.hop_length << "/" << cfg.fft_size;
    }
  }
}

TEST(Istft, ZeroSpectrogramGivesZeroClip) {
  ComplexSpectrogram spec{Grid<std::complex<double>>(5, 256), {}};
  const AudioClip y = istft(spec);
  EXPECT_EQ(y.size(), 4u * 160 + 400);
  for (double s : y.samples) EXPECT_EQ(s, 0.0);
}

TEST(Istft, SingleFrameRecoversFrameWhereWindowIsLarge) {
  const AudioClip x = noise_clip(400, 5);
  const AudioClip y = istft(stft(x, {}));
  ASSERT_EQ(y.size(), 400u);
  const auto w = oracle::hann(400);
  for (std::size_t n = 0; n < 400; ++n) {
    if (w[n] > 1e-3) {
      EXPECT_NEAR(y.samples[n], x.samples[n], 1e-9) << n;
    }
  }
}

TEST(Istft, DegenerateWindowHopIsRejected) {
  // Periodic Hann of length 4 is zero at n = 0, so hop 4 leaves samples uncovered.
  ComplexSpectrogram spec{Grid<std::complex<double>>(3, 4), StftConfig{4, 4, 8}};
  EXPECT_THROW(istft(spec), Error);
}

TEST(Istft, RejectsNonFinite) {
  ComplexSpectrogram spec{Grid<std::complex<double>>(3, 256), {}};
  spec.values(1, 1) = {std::nan(""), 0.0};
  EXPECT_THROW(istft(spec), Error);
}

TEST(Decompose, BoundaryConventions) {
  ComplexSpectrogram spec{Grid<std::complex<double>>(1, 3), {}};
  spec.values(0, 0) = {1.0, 0.0};
  spec.values(0, 1) = {-1.0, 0.0};
  spec.values(0, 2) = {0.0, 0.0};
  auto [mag, phase] = decompose(spec);
  EXPECT_EQ(mag.values(0, 0), 1.0);
  EXPECT_EQ(phase.values(0, 0), 0.0);
  EXPECT_EQ(mag.values(0, 1), 1.0);
  EXPECT_EQ(phase.values(0, 1), -kPi);
  EXPECT_EQ(mag.values(0, 2), 0.0);
  EXPECT_EQ(phase.values(0, 2), 0.0);
}

TEST(Decompose, RecomposeReproducesGrid) {
  const auto spec = stft(noise_clip(4000, 8), {});
  auto [mag, phase] = decompose(spec);
  for (double p : phase.values.data()) {
    EXPECT_GE(p, -kPi);
    EXPECT_LT(p, kPi);
  }
  const auto back = recompose(mag, phase, spec.config);
  for (std::size_t i = 0; i < spec.values.size(); ++i) {
    EXPECT_NEAR(std::abs(back.values.data()[i] - spec.values.data()[i]), 0.0, 1e-12);
  }
}

TEST(Normalize, TwoCellExample) {
  MagnitudeMap m{RealGrid(1, 2), false, {}};
  m.values(0, 1) = 2.0;
  const auto n = normalize_magnitude(m);
  EXPECT_TRUE(n.normalized);
  EXPECT_DOUBLE_EQ(n.values(0, 0), -1.0);
  EXPECT_DOUBLE_EQ(n.values(0, 1), 1.0);
  EXPECT_EQ(n.stats.mean, 1.0);
  EXPECT_EQ(n.stats.std, 1.0);
}

TEST(Normalize, FixedPointAndRoundTrip) {
  MagnitudeMap m{RealGrid(2, 2), false, {}};
  m.values.data() = {-1.0, 1.0, -1.0, 1.0};
  const auto n = normalize_magnitude(m);
  for (std::size_t i = 0; i < 4; ++i) EXPECT_NEAR(n.values.data()[i], m.values.data()[i], 1e-12);

  auto [mag, phase] = decompose(stft(noise_clip(4000, 9), {}));
  const auto z = normalize_magnitude(mag);
  double mean = 0.0, sq = 0.0;
  for (double v : z.values.data()) mean += v;
  mean /= z.values.size();
  for (double v : z.values.data()) sq += (v - mean) * (v - mean);
  EXPECT_NEAR(mean, 0.0, 1e-12);
  EXPECT_NEAR(std::sqrt(sq / z.values.size()), 1.0, 1e-12);
  const auto back = denormalize_magnitude(z);
  for (std::size_t i = 0; i < mag.values.size(); ++i) {
    EXPECT_NEAR(back.values.data()[i], mag.values.data()[i], 1e-9);
  }
}

TEST(Normalize, Errors) {
  MagnitudeMap flat{RealGrid(3, 3, 0.5), false, {}};
  EXPECT_THROW(normalize_magnitude(flat), Error);
  MagnitudeMap m{RealGrid(1, 2), false, {}};
  m.values(0, 1) = 1.0;
  EXPECT_THROW(normalize_magnitude(normalize_magnitude(m)), Error);
  EXPECT_THROW(denormalize_magnitude(m), Error);
}

}  // namespace
}  // namespace phasepred
