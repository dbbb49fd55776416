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

#ifndef FEDAUG_OPTIMIZER_HPP_
#define FEDAUG_OPTIMIZER_HPP_

#include <cstddef>
#include <string_view>
#include <utility>

#include "fedaug/model.hpp"

namespace fedaug {

enum class OptimizerKind { kSgd, kAdam };

std::string_view to_string(OptimizerKind kind);
OptimizerKind optimizer_kind_from_string(std::string_view name);

struct OptimizerState {
  OptimizerKind kind;
  double learning_rate;
  double adam_beta1 = 0.9;
  double adam_beta2 = 0.999;
  double adam_eps = 1e-8;
  RealVector first_moment;
  RealVector second_moment;
  std::size_t step_count = 0;
};

// Fresh state with zero moments for `num_params` parameters.
OptimizerState make_optimizer(OptimizerKind kind, double learning_rate,
                              std::size_t num_params);

// SGD: theta - lr * g. Adam: bias-corrected update with the state's betas.
std::pair<ParamVector, OptimizerState> optimizer_step(OptimizerState state,
                                                      ParamVector theta,
                                                      const ParamVector& grad);

// Same update, applied in place.
void optimizer_step_inplace(OptimizerState& state, ParamVector& theta,
                            const ParamVector& grad);

}  // namespace fedaug

#endif  // FEDAUG_OPTIMIZER_HPP_
