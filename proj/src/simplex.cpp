/*
 * Copyright 2026 The fedaug Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *      http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include "fedaug/simplex.hpp"

#include <algorithm>
#include <numeric>
#include <string>
#include <vector>

#include "fedaug/error.hpp"

namespace fedaug {

WeightVector project_simplex(const RealVector& v) {
  const std::size_t n = v.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return v[a] > v[b]; });

  double running = 0.0;
  double tau = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    const double u = v[order[k]];
    running += u;
    const double candidate = (running - 1.0) / static_cast<double>(k + 1);
    // k = 0 always qualifies: u - (u - 1) = 1 > 0.
    if (u - candidate > 0.0) tau = candidate;
  }

  WeightVector out(n);
  for (std::size_t i = 0; i < n; ++i) out[i] = std::max(v[i] - tau, 0.0);
  return out;
}

WeightVector project_generalized(const RealVector& v, double lambda_min) {
  const double n = static_cast<double>(v.size());
  if (!(lambda_min < 1.0 / n)) {
    throw ValueError("lambda_min must be < 1/n (lambda_min = " +
                     std::to_string(lambda_min) +
                     ", n = " + std::to_string(v.size()) + ")");
  }
  const double width = 1.0 - n * lambda_min;
  RealVector shifted = v;
  for (double& x : shifted.span()) x = (x - lambda_min) / width;
  WeightVector out = project_simplex(shifted);
  for (double& x : out.span()) x = width * x + lambda_min;
  out.check_finite("project_generalized");
  return out;
}

}  // namespace fedaug
