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

// Synthetic corpora for desk-scale experiments: harmonic tones drawn from a
// fixed pitch inventory, and a three-class "tone family" task for probing.
// Every clip carries a faint white-noise floor so that no STFT cell is
// purely leakage.

#include <array>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "phasepred/angles.hpp"
#include "phasepred/audio.hpp"
#include "phasepred/rng.hpp"

namespace phasepred::synth {

/// 0.975 s at 16 kHz: 96 frames with the default STFT.
inline constexpr std::size_t kSliceSamples = 15600;
inline constexpr double kNoiseFloor = 1e-4;

/// Ten pitches spaced 5 semitones apart starting at 220 Hz.
inline std::array<double, 10> pitch_inventory() {
  std::array<double, 10> p{};
  for (std::size_t i = 0; i < p.size(); ++i) p[i] = 220.0 * std::pow(2.0, i / 2.4);
  return p;
}

struct Partial {
  double frequency = 0.0;  // Hz
  double amplitude = 0.0;
  double phase = 0.0;      // radians at sample 0
};

/// Sum of stationary partials, optionally amplitude-modulated, plus noise.
inline AudioClip render(const std::vector<Partial>& partials, std::size_t samples,
                        int sample_rate, Rng& rng, double noise = kNoiseFloor,
                        double tremolo_hz = 0.0, double tremolo_depth = 0.0) {
  AudioClip clip{std::vector<double>(samples, 0.0), sample_rate};
  for (std::size_t n = 0; n < samples; ++n) {
    const double t = static_cast<double>(n) / sample_rate;
    double v = 0.0;
    for (const auto& p : partials) v += p.amplitude * std::sin(kTwoPi * p.frequency * t + p.phase);
    if (tremolo_depth > 0.0) {
      v *= 1.0 - tremolo_depth * 0.5 * (1.0 - std::cos(kTwoPi * tremolo_hz * t));
    }
    clip.samples[n] = v;
  }
  for (double& s : clip.samples) s += noise * rng.normal();
  return clip;
}

/// Three-harmonic tone at f0 with random harmonic amplitudes and phases.
inline AudioClip harmonic_tone(double f0, Rng& rng, std::size_t samples = kSliceSamples,
                               int sample_rate = 16000) {
  std::vector<Partial> partials;
  for (int h = 0; h < 3; ++h) {
    partials.push_back({f0 * (h + 1), 0.3 * rng.uniform(0.2, 1.0) * std::pow(0.6, h),
                        rng.uniform(0.0, kTwoPi)});
  }
  return render(partials, samples, sample_rate, rng);
}

/// `count` tones cycling through the pitch inventory from a seed-dependent
/// starting pitch.
inline std::vector<AudioClip> tone_corpus(std::size_t count, std::uint64_t seed,
                                          std::size_t samples = kSliceSamples) {
  Rng rng(seed);
  const auto pitches = pitch_inventory();
  const std::size_t start = rng.below(pitches.size());
  std::vector<AudioClip> out;
  for (std::size_t i = 0; i < count; ++i) {
    out.push_back(harmonic_tone(pitches[(start + i) % pitches.size()], rng, samples));
  }
  return out;
}

struct LabeledClip {
  AudioClip clip;
  int label = 0;
};

inline constexpr std::array<const char*, 3> kFamilyNames = {"pure", "odd", "bright"};

/// Families differ in harmonic content and envelope: a steady sinusoid, a
/// steady odd-harmonic tone, and an all-harmonic tone with 6 Hz tremolo.
/// f0 is uniform in [150, 500] Hz.
inline AudioClip family_tone(int family, Rng& rng, std::size_t samples = kSliceSamples,
                             int sample_rate = 16000) {
  const double f0 = rng.uniform(150.0, 500.0);
  const double level = rng.uniform(0.1, 0.4);
  std::vector<Partial> partials;
  switch (family) {
    case 0:
      partials.push_back({f0, level, rng.uniform(0.0, kTwoPi)});
      return render(partials, samples, sample_rate, rng);
    case 1:
      for (int h = 1; h <= 7; h += 2) partials.push_back({f0 * h, level / h, rng.uniform(0.0, kTwoPi)});
      return render(partials, samples, sample_rate, rng);
    case 2:
      for (int h = 1; h <= 8; ++h) partials.push_back({f0 * h, level / h, rng.uniform(0.0, kTwoPi)});
      return render(partials, samples, sample_rate, rng, kNoiseFloor, 6.0, 0.8);
    default:
      throw Error("family_tone: family must be 0, 1 or 2");
  }
}

/// per_class clips of each family, interleaved by class.
inline std::vector<LabeledClip> family_corpus(std::size_t per_class, std::uint64_t seed,
                                              std::size_t samples = kSliceSamples) {
  Rng rng(seed);
  std::vector<LabeledClip> out;
  for (std::size_t i = 0; i < per_class; ++i) {
    for (int c = 0; c < 3; ++c) out.push_back({family_tone(c, rng, samples), c});
  }
  return out;
}

}  // namespace phasepred::synth
