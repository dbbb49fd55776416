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

#ifndef FEDAUG_MODEL_HPP_
#define FEDAUG_MODEL_HPP_

#include <cstddef>
#include <functional>
#include <vector>

#include "fedaug/linalg.hpp"
#include "fedaug/rng.hpp"

namespace fedaug {

enum class Activation { kRelu };

// Fully connected classifier: input -> hidden_dims... -> num_classes, with the
// activation after every hidden layer and raw logits at the output.
struct ModelSpec {
  std::size_t input_dim = 0;
  std::vector<std::size_t> hidden_dims;
  std::size_t num_classes = 0;
  Activation activation = Activation::kRelu;

  // Throws ValueError on zero dims or fewer than two classes.
  void validate() const;

  friend bool operator==(const ModelSpec&, const ModelSpec&) = default;
};

// Where one dense layer lives inside the flat parameter vector. Weights are
// stored input-major: W[i][j] at weight_offset + i * fan_out + j.
struct LayerSlice {
  std::size_t fan_in;
  std::size_t fan_out;
  std::size_t weight_offset;
  std::size_t bias_offset;
};

struct ParamLayout {
  std::vector<LayerSlice> layers;
  std::size_t total = 0;
};

ParamLayout make_layout(const ModelSpec& spec);

// All trainable parameters, flattened per make_layout(spec).
using ParamVector = RealVector;

// Glorot-uniform weights, zero biases.
ParamVector init_params(const ModelSpec& spec, RngStream rng);
ParamVector zero_params(const ModelSpec& spec);

struct Batch {
  RealMatrix inputs;          // batch x input_dim
  std::vector<int> labels;    // one per row
};

RealMatrix forward(const ModelSpec& spec, const ParamVector& theta,
                   const Batch& batch);

struct LossAndGrad {
  double loss;
  ParamVector grad;
};

// Mean cross-entropy over the batch and its gradient.
LossAndGrad loss_and_grad(const ModelSpec& spec, const ParamVector& theta,
                          const Batch& batch);

double mean_loss(const ModelSpec& spec, const ParamVector& theta,
                 const Batch& batch);

using GradientFn = std::function<ParamVector(const ParamVector&)>;

// Central-difference Hessian-vector product H(theta) * v from two gradient
// evaluations, eps = 1e-4 * (1 + |theta|_inf) / (1 + |v|_inf).
ParamVector finite_difference_hvp(const GradientFn& gradient,
                                  const ParamVector& theta,
                                  const ParamVector& v);

struct IrmPenalty {
  double penalty;     // g^2 with g = d/dw f(w * theta) at w = 1
  ParamVector grad;   // gradient of the penalty in theta
  double loss;        // f(theta), computed on the way
  ParamVector loss_grad;
};

// Invariance penalty with a fixed scalar classifier w on top of the model.
// g = <theta, grad f(theta)>, grad P = 2 g (grad f + H theta).
IrmPenalty irm_penalty_and_grad(const ModelSpec& spec, const ParamVector& theta,
                                const Batch& batch);

// Fraction of rows whose argmax logit (lowest index on ties) equals the label.
double accuracy(const ModelSpec& spec, const ParamVector& theta,
                const Batch& batch);

}  // namespace fedaug

#endif  // FEDAUG_MODEL_HPP_
