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

#include <fftw3.h>

#include <complex>
#include <map>
#include <mutex>
#include <span>

#include "phasepred/error.hpp"

namespace phasepred::detail {

// Plans are created once per size and shared. Planning is not thread-safe in
// FFTW, execution through the new-array interface is.
class FftPlans {
 public:
  static FftPlans& instance() {
    static FftPlans plans;
    return plans;
  }

  fftw_plan forward(int n) { return get(n, true); }
  fftw_plan inverse(int n) { return get(n, false); }

  FftPlans(const FftPlans&) = delete;
  FftPlans& operator=(const FftPlans&) = delete;

 private:
  FftPlans() = default;
  ~FftPlans() {
    for (auto& [key, plan] : plans_) fftw_destroy_plan(plan);
  }

  fftw_plan get(int n, bool forward) {
    std::lock_guard lock(mutex_);
    auto key = std::make_pair(n, forward);
    if (auto it = plans_.find(key); it != plans_.end()) return it->second;
    double* real = fftw_alloc_real(n);
    fftw_complex* spec = fftw_alloc_complex(n / 2 + 1);
    const unsigned flags = FFTW_ESTIMATE | FFTW_UNALIGNED;
    fftw_plan plan = forward ? fftw_plan_dft_r2c_1d(n, real, spec, flags)
                             : fftw_plan_dft_c2r_1d(n, spec, real, flags);
    fftw_free(real);
    fftw_free(spec);
    require(plan != nullptr, "fft: could not create plan");
    plans_.emplace(key, plan);
    return plan;
  }

  std::mutex mutex_;
  std::map<std::pair<int, bool>, fftw_plan> plans_;
};

/// Unnormalized real-to-complex DFT; out has n/2 + 1 bins.
inline void rfft(std::span<double> in, std::span<std::complex<double>> out) {
  const int n = static_cast<int>(in.size());
  require(out.size() == in.size() / 2 + 1, "rfft: output size mismatch");
  fftw_execute_dft_r2c(FftPlans::instance().forward(n), in.data(),
                       reinterpret_cast<fftw_complex*>(out.data()));
}

/// Unnormalized complex-to-real inverse DFT (result is n times the signal).
/// The input buffer is clobbered.
inline void irfft(std::span<std::complex<double>> in, std::span<double> out) {
  const int n = static_cast<int>(out.size());
  require(in.size() == out.size() / 2 + 1, "irfft: input size mismatch");
  fftw_execute_dft_c2r(FftPlans::instance().inverse(n),
                       reinterpret_cast<fftw_complex*>(in.data()), out.data());
}

}  // namespace phasepred::detail
