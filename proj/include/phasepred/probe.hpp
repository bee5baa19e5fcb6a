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
#include <set>
#include <vector>

#include "phasepred/error.hpp"

namespace phasepred {

struct ProbeOptions {
  double learning_rate = 0.5;
  double l2 = 1e-4;
  int max_iterations = 3000;
  double tolerance = 1e-6;  // on the gradient norm
};

struct ProbeResult {
  double train_accuracy = 0.0;
  double test_accuracy = 0.0;
  int iterations = 0;
};

/// Softmax regression on frozen embeddings, trained by full-batch gradient
/// descent on standardized features. Labels are 0-based class indices.
inline ProbeResult linear_probe(const std::vector<std::vector<double>>& train_x,
                                const std::vector<int>& train_y,
                                const std::vector<std::vector<double>>& test_x,
                                const std::vector<int>& test_y, const ProbeOptions& opt = {}) {
  detail::require(!train_x.empty() && train_x.size() == train_y.size(),
                  "linear_probe: train features/labels mismatch");
  detail::require(test_x.size() == test_y.size(), "linear_probe: test features/labels mismatch");
  const std::size_t d = train_x.front().size();
  for (const auto& x : train_x) detail::require(x.size() == d, "linear_probe: ragged features");
  for (const auto& x : test_x) detail::require(x.size() == d, "linear_probe: ragged features");
  for (int y : train_y) detail::require(y >= 0, "linear_probe: negative label");
  for (int y : test_y) detail::require(y >= 0, "linear_probe: negative label");
  const std::set<int> distinct(train_y.begin(), train_y.end());
  detail::require(distinct.size() >= 2, "linear_probe: need at least 2 classes in training data");
  int classes = *distinct.rbegin() + 1;
  if (!test_y.empty()) classes = std::max(classes, *std::max_element(test_y.begin(), test_y.end()) + 1);

  // Standardize with training statistics.
  const double n = static_cast<double>(train_x.size());
  std::vector<double> mean(d, 0.0), scale(d, 0.0);
  for (const auto& x : train_x) for (std::size_t j = 0; j < d; ++j) mean[j] += x[j] / n;
  for (const auto& x : train_x) for (std::size_t j = 0; j < d; ++j) scale[j] += (x[j] - mean[j]) * (x[j] - mean[j]) / n;
  for (double& s : scale) s = s > 1e-24 ? 1.0 / std::sqrt(s) : 0.0;
  auto standardize = [&](const std::vector<double>& x) {
    std::vector<double> out(d + 1, 1.0);  // trailing bias feature
    for (std::size_t j = 0; j < d; ++j) out[j] = (x[j] - mean[j]) * scale[j];
    return out;
  };
  std::vector<std::vector<double>> xs, xt;
  for (const auto& x : train_x) xs.push_back(standardize(x));
  for (const auto& x : test_x) xt.push_back(standardize(x));

  const std::size_t D = d + 1;
  std::vector<double> w(classes * D, 0.0), grad(classes * D), prob(classes);
  auto scores = [&](const std::vector<double>& x, std::vector<double>& out) {
    for (int c = 0; c < classes; ++c) {
      double s = 0.0;
      for (std::size_t j = 0; j < D; ++j) s += w[c * D + j] * x[j];
      out[c] = s;
    }
  };

  ProbeResult r;
  for (r.iterations = 0; r.iterations < opt.max_iterations; ++r.iterations) {
    std::fill(grad.begin(), grad.end(), 0.0);
    for (std::size_t i = 0; i < xs.size(); ++i) {
      scores(xs[i], prob);
      const double mx = *std::max_element(prob.begin(), prob.end());
      double z = 0.0;
      for (double& p : prob) z += (p = std::exp(p - mx));
      for (int c = 0; c < classes; ++c) {
        const double delta = prob[c] / z - (c == train_y[i] ? 1.0 : 0.0);
        for (std::size_t j = 0; j < D; ++j) grad[c * D + j] += delta * xs[i][j] / n;
      }
    }
    double gnorm = 0.0;
    for (std::size_t k = 0; k < w.size(); ++k) {
      // The bias feature is left unregularized.
      if (k % D != d) grad[k] += opt.l2 * w[k];
      gnorm += grad[k] * grad[k];
    }
    if (std::sqrt(gnorm) < opt.tolerance) break;
    for (std::size_t k = 0; k < w.size(); ++k) w[k] -= opt.learning_rate * grad[k];
  }

  auto accuracy = [&](const std::vector<std::vector<double>>& xset, const std::vector<int>& ys) {
    if (xset.empty()) return 0.0;
    std::size_t hits = 0;
    for (std::size_t i = 0; i < xset.size(); ++i) {
      scores(xset[i], prob);
      const int pred = static_cast<int>(std::max_element(prob.begin(), prob.end()) - prob.begin());
      hits += pred == ys[i];
    }
    return static_cast<double>(hits) / static_cast<double>(xset.size());
  };
  r.train_accuracy = accuracy(xs, train_y);
  r.test_accuracy = accuracy(xt, test_y);
  return r;
}

}  // namespace phasepred
