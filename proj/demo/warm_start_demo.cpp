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

// Trains the toy phase predictor on synthetic tones, then compares
// Griffin-Lim convergence from zero, random, predicted and oracle phase on a
// held-out tone.
//
//   warm_start_demo [steps]

#include <cstdio>
#include <cstdlib>
#include <vector>

#include "phasepred/phasepred.hpp"

using namespace phasepred;

int main(int argc, char** argv) {
  const int steps = argc > 1 ? std::atoi(argv[1]) : 600;
  const StftConfig cfg;

  std::vector<TrainExample> data;
  std::vector<PhaseMap> phases;
  for (const auto& clip : synth::tone_corpus(20, 1)) {
    const auto spec = stft(clip, cfg);
    data.push_back(make_example(spec, WeightStrategy::kMagnitude));
    phases.push_back(decompose(spec).phase);
  }
  const MeanGroupDelay tau = estimate_mean_group_delay(phases);

  TrainConfig tc;
  tc.steps = steps;
  tc.seed = 1;
  const TrainResult run = train(init_model(ArchConfig{}, 1), data, tc);
  std::printf("trained %d steps: loss %.4f -> %.4f, tau_bar %.3f\n", steps,
              run.loss_history.front(), run.loss_history.back(), tau.value);

  const auto held_out = synth::tone_corpus(1, 99).front();
  const auto [mag, phase] = decompose(stft(held_out, cfg));
  const int iters = 50;

  Rng rng(7);
  PhaseMap random{RealGrid(mag.frames(), mag.bins())};
  for (double& v : random.values.data()) v = rng.uniform(-kPi, kPi);
  const InstFreqMap predicted = forward(run.params, normalize_magnitude(mag)).phase;

  const ConvergenceTrace traces[] = {
      griffin_lim(mag, PhaseMap{RealGrid(mag.frames(), mag.bins())}, iters, cfg).trace,
      griffin_lim(mag, random, iters, cfg).trace,
      reconstruct_waveform(mag, predicted, tau, iters, cfg).trace,
      reconstruct_waveform(mag, smoothed_if(phase), tau, iters, cfg).trace,
  };

  std::printf("\nlog spectral convergence on a held-out tone\n");
  std::printf("%4s %9s %9s %9s %9s\n", "k", "zero", "random", "model", "oracle");
  for (int k : {0, 1, 2, 5, 10, 25, 50}) {
    std::printf("%4d", k);
    for (const auto& t : traces) std::printf(" %9.4f", t.records[k].log_sc);
    std::printf("\n");
  }
  return 0;
}
