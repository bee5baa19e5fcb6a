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
#include <span>
#include <string>
#include <vector>

#include "phasepred/angles.hpp"
#include "phasepred/audio.hpp"
#include "phasepred/grid_io.hpp"
#include "phasepred/phase.hpp"
#include "phasepred/spectral_maps.hpp"
#include "phasepred/stft.hpp"

namespace phasepred {

/// Initial phase of every bin (row 0 of the integrated phase).
struct PhaseOffsets {
  std::vector<double> values;
};

struct MeanGroupDelay {
  double value = 0.0;
};

struct TraceRecord {
  int k = 0;
  double distance = 0.0;  // ||stft(x_k) - |X| e^{i phi_k}||_F
  double log_sc = 0.0;    // spectral_convergence(|stft(x_k)|, |X|)
};

struct ConvergenceTrace {
  std::vector<TraceRecord> records;
};

/// Integrates IF along time starting from the given offsets. Forward IF
/// uses phi[t+1] = phi[t] + psi[t]; centered IF uses psi[t+1] so that the
/// first interior row anchors the recurrence.
inline PhaseMap integrate_if(const InstFreqMap& psi, const PhaseOffsets& offsets) {
  const auto& v = psi.values;
  detail::require(v.rows() >= 1, "integrate_if: empty IF map");
  detail::require(offsets.values.size() == v.cols(),
                  "integrate_if: offsets length " + std::to_string(offsets.values.size()) +
                      " does not match bin count " + std::to_string(v.cols()));
  const std::size_t shift = psi.alignment == IfAlignment::kCentered ? 1 : 0;
  RealGrid out(v.rows(), v.cols());
  for (std::size_t f = 0; f < v.cols(); ++f) out(0, f) = wrap_angle(offsets.values[f]);
  for (std::size_t t = 0; t + 1 < v.rows(); ++t) {
    for (std::size_t f = 0; f < v.cols(); ++f) {
      out(t + 1, f) = wrap_angle(out(t, f) + v(t + shift, f));
    }
  }
  return {std::move(out)};
}

/// Circular mean of every group-delay cell pooled over the corpus.
inline MeanGroupDelay estimate_mean_group_delay(std::span<const PhaseMap> corpus) {
  detail::require(!corpus.empty(), "estimate_mean_group_delay: empty corpus");
  double re = 0.0, im = 0.0;
  std::size_t count = 0;
  for (const auto& phase : corpus) {
    const GroupDelayMap gd = group_delay(phase);
    for (double g : gd.values.data()) {
      re += std::cos(g);
      im += std::sin(g);
    }
    count += gd.values.size();
  }
  detail::require(count > 0, "estimate_mean_group_delay: no group-delay cells");
  if (std::hypot(re, im) / static_cast<double>(count) < 1e-12) {
    throw Error("estimate_mean_group_delay: barycenter at the origin, mean undefined");
  }
  return {wrap_angle(std::atan2(im, re))};
}

/// Per-bin initial phases such that, after integration, the circular mean
/// over time of the group delay between every pair of adjacent bins equals
/// tau_bar. Bin 0 starts at phase 0.
inline PhaseOffsets retrieve_offsets(const InstFreqMap& psi, MeanGroupDelay tau_bar) {
  const std::size_t F = psi.bins();
  detail::require(F >= 2, "retrieve_offsets: need at least 2 bins");
  const PhaseMap base = integrate_if(psi, PhaseOffsets{std::vector<double>(F, 0.0)});
  std::vector<double> diffs(psi.frames());
  PhaseOffsets out{std::vector<double>(F, 0.0)};
  for (std::size_t f = 0; f + 1 < F; ++f) {
    for (std::size_t t = 0; t < diffs.size(); ++t) {
      diffs[t] = base.values(t, f + 1) - base.values(t, f);
    }
    double mean = 0.0;
    try {
      mean = circular_mean(diffs);
    } catch (const Error&) {
      throw Error("retrieve_offsets: group delay mean undefined between bins " +
                  std::to_string(f) + " and " + std::to_string(f + 1));
    }
    out.values[f + 1] = wrap_angle(out.values[f] + tau_bar.value - mean);
  }
  return out;
}

/// log10 of the Frobenius norm of est - ref, floored at 1e-12.
inline double spectral_convergence(const MagnitudeMap& est, const MagnitudeMap& ref) {
  detail::require_same_shape(est.values, ref.values, "spectral_convergence");
  double sq = 0.0;
  for (std::size_t i = 0; i < est.values.size(); ++i) {
    const double d = est.values.data()[i] - ref.values.data()[i];
    sq += d * d;
  }
  return std::log10(std::max(std::sqrt(sq), 1e-12));
}

struct Reconstruction {
  AudioClip audio;
  ConvergenceTrace trace;
};

/// Alternating projections between the fixed-magnitude set and consistent
/// spectrograms, starting from init_phase. Records iterations 0..iterations
/// and returns the waveform of the last one.
inline Reconstruction griffin_lim(const MagnitudeMap& ref_mag, const PhaseMap& init_phase,
                                  int iterations, const StftConfig& config = {}) {
  detail::require(!ref_mag.normalized, "griffin_lim: reference magnitude must be unnormalized");
  detail::require_same_shape(ref_mag.values, init_phase.values, "griffin_lim");
  detail::require(iterations >= 0, "griffin_lim: iterations must be >= 0");
  detail::require(static_cast<int>(ref_mag.bins()) == config.bins(),
                  "griffin_lim: magnitude bins do not match the STFT config");

  Reconstruction out;
  PhaseMap phase = init_phase;
  for (int k = 0;; ++k) {
    const ComplexSpectrogram target = recompose(ref_mag, phase, config);
    AudioClip x = istft(target);
    const ComplexSpectrogram rebuilt = stft(x, config);
    double sq = 0.0;
    for (std::size_t i = 0; i < target.values.size(); ++i) {
      sq += std::norm(rebuilt.values.data()[i] - target.values.data()[i]);
    }
    auto [mag, next_phase] = decompose(rebuilt);
    out.trace.records.push_back({k, std::sqrt(sq), spectral_convergence(mag, ref_mag)});
    if (k == iterations) {
      out.audio = std::move(x);
      break;
    }
    phase = std::move(next_phase);
  }
  return out;
}

/// Offsets from the mean group delay, integration of psi, then Griffin-Lim
/// warm-started from that phase. gl_iterations = 0 is the model-only result.
inline Reconstruction reconstruct_waveform(const MagnitudeMap& ref_mag, const InstFreqMap& psi,
                                           MeanGroupDelay tau_bar, int gl_iterations,
                                           const StftConfig& config = {}) {
  detail::require_same_shape(ref_mag.values, psi.values, "reconstruct_waveform");
  const PhaseOffsets offsets = retrieve_offsets(psi, tau_bar);
  return griffin_lim(ref_mag, integrate_if(psi, offsets), gl_iterations, config);
}

/// `k,d_k,log_sc` with one row per iteration.
inline std::string trace_to_csv(const ConvergenceTrace& trace) {
  std::string out = "k,d_k,log_sc\n";
  for (const auto& r : trace.records) {
    out += std::to_string(r.k) + "," + format_double(r.distance) + "," +
           format_double(r.log_sc) + "\n";
  }
  return out;
}

}  // namespace phasepred
