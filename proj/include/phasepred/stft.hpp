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
#include <string>
#include <vector>

#include "phasepred/audio.hpp"
#include "phasepred/error.hpp"
#include "phasepred/fft.hpp"
#include "phasepred/grid.hpp"

namespace phasepred {

enum class WindowKind { kHann, kHamming, kRectangular };

inline std::string to_string(WindowKind kind) {
  switch (kind) {
    case WindowKind::kHann: return "hann";
    case WindowKind::kHamming: return "hamming";
    case WindowKind::kRectangular: return "rectangular";
  }
  return "unknown";
}

inline WindowKind parse_window_kind(const std::string& name) {
  if (name == "hann") return WindowKind::kHann;
  if (name == "hamming") return WindowKind::kHamming;
  if (name == "rectangular" || name == "rect") return WindowKind::kRectangular;
  throw Error("unknown window kind: " + name);
}

/// Framing parameters in samples. The defaults are 25 ms / 10 ms at 16 kHz
/// with a 512-point FFT, which leaves 256 bins once DC is dropped.
struct StftConfig {
  int window_length = 400;
  int hop_length = 160;
  int fft_size = 512;
  WindowKind window_kind = WindowKind::kHann;
  bool drop_dc = true;
  int sample_rate = 16000;

  static StftConfig from_ms(int sample_rate, double window_ms, double hop_ms,
                            int fft_size) {
    StftConfig c;
    c.sample_rate = sample_rate;
    c.window_length = static_cast<int>(std::lround(sample_rate * window_ms / 1000.0));
    c.hop_length = static_cast<int>(std::lround(sample_rate * hop_ms / 1000.0));
    c.fft_size = fft_size;
    return c;
  }

  int bins() const { return drop_dc ? fft_size / 2 : fft_size / 2 + 1; }

  /// Number of frames produced for a clip of n samples (0 if n < window).
  int frames_for(std::size_t n) const {
    if (n < static_cast<std::size_t>(window_length)) return 0;
    return 1 + static_cast<int>((n - window_length) / hop_length);
  }

  /// Clip length reproduced by istft for the given frame count.
  std::size_t samples_for(int frames) const {
    return frames <= 0 ? 0
                       : static_cast<std::size_t>(frames - 1) * hop_length + window_length;
  }

  friend bool operator==(const StftConfig&, const StftConfig&) = default;
};

inline void validate(const StftConfig& c) {
  detail::require(c.hop_length > 0, "StftConfig: hop_length must be > 0");
  detail::require(c.hop_length <= c.window_length,
                  "StftConfig: hop_length must not exceed window_length");
  detail::require(c.window_length <= c.fft_size,
                  "StftConfig: window_length must not exceed fft_size");
  detail::require(c.fft_size % 2 == 0, "StftConfig: fft_size must be even");
  detail::require(c.sample_rate > 0, "StftConfig: sample_rate must be > 0");
}

/// Periodic analysis window of the configured kind.
inline std::vector<double> make_window(WindowKind kind, int length) {
  std::vector<double> w(length, 1.0);
  const double step = 2.0 * std::numbers::pi / length;
  for (int n = 0; n < length; ++n) {
    switch (kind) {
      case WindowKind::kHann: w[n] = 0.5 - 0.5 * std::cos(step * n); break;
      case WindowKind::kHamming: w[n] = 0.54 - 0.46 * std::cos(step * n); break;
      case WindowKind::kRectangular: break;
    }
  }
  return w;
}

/// T x F complex STFT. Column f holds FFT bin f + 1 when drop_dc is set.
struct ComplexSpectrogram {
  Grid<std::complex<double>> values;
  StftConfig config;

  std::size_t frames() const { return values.rows(); }
  std::size_t bins() const { return values.cols(); }
};

/// Frame t covers samples [t*hop, t*hop + window). Frames are windowed,
/// zero-padded at the end to fft_size and transformed with no phase
/// correction for the frame position.
inline ComplexSpectrogram stft(const AudioClip& clip, const StftConfig& config) {
  validate(config);
  detail::require(clip.sample_rate == config.sample_rate,
                  "stft: clip sample rate " + std::to_string(clip.sample_rate) +
                      " does not match config " + std::to_string(config.sample_rate));
  const int frames = config.frames_for(clip.size());
  detail::require(frames > 0, "stft: clip of " + std::to_string(clip.size()) +
                                  " samples is shorter than one window (" +
                                  std::to_string(config.window_length) + ")");

  const auto window = make_window(config.window_kind, config.window_length);
  const int n_fft = config.fft_size;
  const int first = config.drop_dc ? 1 : 0;
  ComplexSpectrogram out{Grid<std::complex<double>>(frames, config.bins()), config};

  std::vector<double> frame(n_fft);
  std::vector<std::complex<double>> spectrum(n_fft / 2 + 1);
  for (int t = 0; t < frames; ++t) {
    std::fill(frame.begin(), frame.end(), 0.0);
    const double* src = clip.samples.data() + static_cast<std::size_t>(t) * config.hop_length;
    for (int n = 0; n < config.window_length; ++n) frame[n] = src[n] * window[n];
    detail::rfft(frame, spectrum);
    auto row = out.values.row(t);
    std::copy(spectrum.begin() + first, spectrum.end(), row.begin());
  }
  return out;
}

/// Window-sum-normalized overlap-add inverse of stft.
///
/// When the DC bin was dropped and the FFT is longer than the window, each
/// frame's DC is restored as the constant that gives the zero-padded tail
/// [window, fft_size) zero mean. This is exact for spectrograms produced by
/// stft. Without a tail the DC is taken as zero.
inline AudioClip istft(const ComplexSpectrogram& spec) {
  const StftConfig& config = spec.config;
  validate(config);
  detail::require(spec.frames() > 0, "istft: empty spectrogram");
  detail::require(static_cast<int>(spec.bins()) == config.bins(),
                  "istft: bin count does not match config");
  for (const auto& v : spec.values.data()) {
    detail::require(std::isfinite(v.real()) && std::isfinite(v.imag()),
                    "istft: non-finite spectrogram value");
  }

  const auto window = make_window(config.window_kind, config.window_length);
  const int win = config.window_length;
  const int hop = config.hop_length;
  const int n_fft = config.fft_size;

  // Steady-state coverage: every sample far from the edges sees the same
  // periodic sum of squared window values.
  for (int phase = 0; phase < hop; ++phase) {
    double s = 0.0;
    for (int n = phase; n < win; n += hop) s += window[n] * window[n];
    detail::require(s >= 1e-8, "istft: window-sum below tolerance (degenerate "
                               "window/hop configuration)");
  }

  const int frames = static_cast<int>(spec.frames());
  const std::size_t length = config.samples_for(frames);
  std::vector<double> out(length, 0.0), wsum(length, 0.0);
  std::vector<std::complex<double>> spectrum(n_fft / 2 + 1);
  std::vector<double> frame(n_fft);
  const int first = config.drop_dc ? 1 : 0;
  const bool recover_dc = config.drop_dc && n_fft > win;

  for (int t = 0; t < frames; ++t) {
    auto row = spec.values.row(t);
    spectrum[0] = 0.0;
    std::copy(row.begin(), row.end(), spectrum.begin() + first);
    detail::irfft(spectrum, frame);
    double dc_shift = 0.0;
    if (recover_dc) {
      double tail = 0.0;
      for (int n = win; n < n_fft; ++n) tail += frame[n];
      dc_shift = -tail / (n_fft - win);
    }
    const std::size_t base = static_cast<std::size_t>(t) * hop;
    for (int n = 0; n < win; ++n) {
      const double sample = (frame[n] + dc_shift) / n_fft;
      out[base + n] += sample * window[n];
      wsum[base + n] += window[n] * window[n];
    }
  }
  for (std::size_t i = 0; i < length; ++i) {
    out[i] = wsum[i] > 1e-12 ? out[i] / wsum[i] : 0.0;
  }
  return AudioClip{std::move(out), config.sample_rate};
}

}  // namespace phasepred
