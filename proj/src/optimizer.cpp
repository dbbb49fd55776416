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

#include "fedaug/optimizer.hpp"

#include <cmath>
#include <string>

#include "fedaug/error.hpp"

namespace fedaug {

std::string_view to_string(OptimizerKind kind) {
  return kind == OptimizerKind::kSgd ? "sgd" : "adam";
}

OptimizerKind optimizer_kind_from_string(std::string_view name) {
  if (name == "sgd") return OptimizerKind::kSgd;
  if (name == "adam") return OptimizerKind::kAdam;
  throw ValueError("unknown optimizer '" + std::string(name) + "'");
}

OptimizerState make_optimizer(OptimizerKind kind, double learning_rate,
                              std::size_t num_params) {
  return OptimizerState{kind,
                        learning_rate,
                        0.9,
                        0.999,
                        1e-8,
                        RealVector(num_params),
                        RealVector(num_params),
                        0};
}

void optimizer_step_inplace(OptimizerState& state, ParamVector& theta,
                            const ParamVector& grad) {
  if (theta.size() != grad.size() || theta.size() != state.first_moment.size()) {
    throw DimensionError("optimizer_step: parameter/gradient/state mismatch");
  }
  ++state.step_count;
  const double lr = state.learning_rate;
  if (state.kind == OptimizerKind::kSgd) {
    for (std::size_t k = 0; k < theta.size(); ++k) theta[k] -= lr * grad[k];
  } else {
    const double b1 = state.adam_beta1;
    const double b2 = state.adam_beta2;
    const double t = static_cast<double>(state.step_count);
    const double c1 = 1.0 - std::pow(b1, t);
    const double c2 = 1.0 - std::pow(b2, t);
    auto m = state.first_moment.span();
    auto v = state.second_moment.span();
    for (std::size_t k = 0; k < theta.size(); ++k) {
      const double g = grad[k];
      m[k] = b1 * m[k] + (1.0 - b1) * g;
      v[k] = b2 * v[k] + (1.0 - b2) * g * g;
      const double m_hat = m[k] / c1;
      const double v_hat = v[k] / c2;
      theta[k] -= lr * m_hat / (std::sqrt(v_hat) + state.adam_eps);
    }
  }
  theta.check_finite("optimizer_step");
}

std::pair<ParamVector, OptimizerState> optimizer_step(OptimizerState state,
                                                      ParamVector theta,
                                                      const ParamVector& grad) {
  optimizer_step_inplace(state, theta, grad);
  return {std::move(theta), std::move(state)};
}

}  // namespace fedaug
