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

#include "fedaug/model.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "fedaug/error.hpp"

namespace fedaug {

namespace {

void check_inputs(const ModelSpec& spec, const ParamLayout& layout,
                  const ParamVector& theta, const Batch& batch) {
  if (theta.size() != layout.total) {
    throw DimensionError("model: parameter vector has length " +
                         std::to_string(theta.size()) + ", layout needs " +
                         std::to_string(layout.total));
  }
  if (batch.inputs.rows() == 0) throw DimensionError("model: empty batch");
  if (batch.inputs.cols() != spec.input_dim) {
    throw DimensionError("model: batch has " +
                         std::to_string(batch.inputs.cols()) +
                         " features, model expects " +
                         std::to_string(spec.input_dim));
  }
  if (batch.labels.size() != batch.inputs.rows()) {
    throw DimensionError("model: label count does not match batch rows");
  }
  for (int y : batch.labels) {
    if (y < 0 || static_cast<std::size_t>(y) >= spec.num_classes) {
      throw ValueError("model: label " + std::to_string(y) + " out of range");
    }
  }
}

// Activations of every layer; acts[0] is the input, acts.back() the logits.
// Hidden entries hold post-ReLU values.
struct Trace {
  std::vector<RealMatrix> acts;
};

void dense_forward(const LayerSlice& layer, std::span<const double> params,
                   const RealMatrix& in, RealMatrix& out) {
  const double* w = params.data() + layer.weight_offset;
  const double* b = params.data() + layer.bias_offset;
  for (std::size_t r = 0; r < in.rows(); ++r) {
    auto x = in.row(r);
    auto z = out.row(r);
    std::copy(b, b + layer.fan_out, z.begin());
    for (std::size_t i = 0; i < layer.fan_in; ++i) {
      const double xi = x[i];
      if (xi == 0.0) continue;
      const double* wi = w + i * layer.fan_out;
      for (std::size_t j = 0; j < layer.fan_out; ++j) z[j] += xi * wi[j];
    }
  }
}

Trace run_forward(const ModelSpec& spec, const ParamLayout& layout,
                  const ParamVector& theta, const Batch& batch) {
  check_inputs(spec, layout, theta, batch);
  Trace trace;
  trace.acts.reserve(layout.layers.size() + 1);
  trace.acts.push_back(batch.inputs);
  for (std::size_t l = 0; l < layout.layers.size(); ++l) {
    const LayerSlice& layer = layout.layers[l];
    RealMatrix out(batch.inputs.rows(), layer.fan_out);
    dense_forward(layer, theta.span(), trace.acts.back(), out);
    if (l + 1 < layout.layers.size()) {
      for (double& v : out.span()) v = v > 0.0 ? v : 0.0;
    }
    trace.acts.push_back(std::move(out));
  }
  return trace;
}

// Mean softmax cross-entropy; fills dlogits with d(loss)/d(logits) when given.
double softmax_cross_entropy(const RealMatrix& logits,
                             const std::vector<int>& labels,
                             RealMatrix* dlogits) {
  const std::size_t n = logits.rows();
  const std::size_t c = logits.cols();
  const double inv_n = 1.0 / static_cast<double>(n);
  double total = 0.0;
  for (std::size_t r = 0; r < n; ++r) {
    auto z = logits.row(r);
    const double m = *std::max_element(z.begin(), z.end());
    double s = 0.0;
    for (std::size_t k = 0; k < c; ++k) s += std::exp(z[k] - m);
    const double lse = m + std::log(s);
    total += lse - z[static_cast<std::size_t>(labels[r])];
    if (dlogits != nullptr) {
      auto d = dlogits->row(r);
      for (std::size_t k = 0; k < c; ++k) d[k] = std::exp(z[k] - lse) * inv_n;
      d[static_cast<std::size_t>(labels[r])] -= inv_n;
    }
  }
  return total * inv_n;
}

}  // namespace

void ModelSpec::validate() const {
  if (input_dim == 0) throw ValueError("model: input_dim must be > 0");
  for (std::size_t h : hidden_dims) {
    if (h == 0) throw ValueError("model: hidden dims must be > 0");
  }
  if (num_classes < 2) throw ValueError("model: num_classes must be >= 2");
}

ParamLayout make_layout(const ModelSpec& spec) {
  spec.validate();
  ParamLayout layout;
  std::size_t fan_in = spec.input_dim;
  std::vector<std::size_t> outs = spec.hidden_dims;
  outs.push_back(spec.num_classes);
  for (std::size_t fan_out : outs) {
    LayerSlice s{fan_in, fan_out, layout.total, layout.total + fan_in * fan_out};
    layout.total = s.bias_offset + fan_out;
    layout.layers.push_back(s);
    fan_in = fan_out;
  }
  return layout;
}

ParamVector init_params(const ModelSpec& spec, RngStream rng) {
  const ParamLayout layout = make_layout(spec);
  ParamVector theta(layout.total);
  for (const LayerSlice& layer : layout.layers) {
    const double limit =
        std::sqrt(6.0 / static_cast<double>(layer.fan_in + layer.fan_out));
    for (std::size_t k = 0; k < layer.fan_in * layer.fan_out; ++k) {
      theta[layer.weight_offset + k] = rng.uniform(-limit, limit);
    }
  }
  return theta;
}

ParamVector zero_params(const ModelSpec& spec) {
  return ParamVector(make_layout(spec).total);
}

RealMatrix forward(const ModelSpec& spec, const ParamVector& theta,
                   const Batch& batch) {
  Trace trace = run_forward(spec, make_layout(spec), theta, batch);
  return std::move(trace.acts.back());
}

double mean_loss(const ModelSpec& spec, const ParamVector& theta,
                 const Batch& batch) {
  const RealMatrix logits = forward(spec, theta, batch);
  return softmax_cross_entropy(logits, batch.labels, nullptr);
}

LossAndGrad loss_and_grad(const ModelSpec& spec, const ParamVector& theta,
                          const Batch& batch) {
  const ParamLayout layout = make_layout(spec);
  const Trace trace = run_forward(spec, layout, theta, batch);
  const std::size_t n = batch.inputs.rows();

  RealMatrix delta(n, spec.num_classes);
  const double loss =
      softmax_cross_entropy(trace.acts.back(), batch.labels, &delta);

  ParamVector grad(layout.total);
  auto g = grad.span();
  const double* params = theta.span().data();
  for (std::size_t l = layout.layers.size(); l-- > 0;) {
    const LayerSlice& layer = layout.layers[l];
    const RealMatrix& in = trace.acts[l];
    double* gw = g.data() + layer.weight_offset;
    double* gb = g.data() + layer.bias_offset;
    for (std::size_t r = 0; r < n; ++r) {
      auto x = in.row(r);
      auto d = delta.row(r);
      for (std::size_t j = 0; j < layer.fan_out; ++j) gb[j] += d[j];
      for (std::size_t i = 0; i < layer.fan_in; ++i) {
        const double xi = x[i];
        if (xi == 0.0) continue;
        double* gwi = gw + i * layer.fan_out;
        for (std::size_t j = 0; j < layer.fan_out; ++j) gwi[j] += xi * d[j];
      }
    }
    if (l == 0) break;
    // Back through the weights and the ReLU of the previous layer. A zero
    // post-activation means the unit was inactive, so its delta is zero.
    RealMatrix prev(n, layer.fan_in);
    const double* w = params + layer.weight_offset;
    for (std::size_t r = 0; r < n; ++r) {
      auto x = in.row(r);
      auto d = delta.row(r);
      auto p = prev.row(r);
      for (std::size_t i = 0; i < layer.fan_in; ++i) {
        if (x[i] <= 0.0) continue;
        const double* wi = w + i * layer.fan_out;
        double acc = 0.0;
        for (std::size_t j = 0; j < layer.fan_out; ++j) acc += wi[j] * d[j];
        p[i] = acc;
      }
    }
    delta = std::move(prev);
  }
  grad.check_finite("loss_and_grad");
  return {loss, std::move(grad)};
}

ParamVector finite_difference_hvp(const GradientFn& gradient,
                                  const ParamVector& theta,
                                  const ParamVector& v) {
  if (theta.size() != v.size()) {
    throw DimensionError("finite_difference_hvp: direction length mismatch");
  }
  const double eps = 1e-4 * (1.0 + max_abs(theta)) / (1.0 + max_abs(v));
  const ParamVector g_plus = gradient(axpy(eps, v, theta));
  const ParamVector g_minus = gradient(axpy(-eps, v, theta));
  ParamVector hv = g_plus;
  const double inv = 1.0 / (2.0 * eps);
  for (std::size_t k = 0; k < hv.size(); ++k) {
    hv[k] = (g_plus[k] - g_minus[k]) * inv;
  }
  hv.check_finite("finite_difference_hvp");
  return hv;
}

IrmPenalty irm_penalty_and_grad(const ModelSpec& spec, const ParamVector& theta,
                                const Batch& batch) {
  LossAndGrad base = loss_and_grad(spec, theta, batch);
  const double g = dot(theta, base.grad);
  const ParamVector h_theta = finite_difference_hvp(
      [&](const ParamVector& p) { return loss_and_grad(spec, p, batch).grad; },
      theta, theta);
  ParamVector grad = base.grad;
  for (std::size_t k = 0; k < grad.size(); ++k) {
    grad[k] = 2.0 * g * (base.grad[k] + h_theta[k]);
  }
  grad.check_finite("irm_penalty_and_grad");
  return {g * g, std::move(grad), base.loss, std::move(base.grad)};
}

double accuracy(const ModelSpec& spec, const ParamVector& theta,
                const Batch& batch) {
  const RealMatrix logits = forward(spec, theta, batch);
  std::size_t correct = 0;
  for (std::size_t r = 0; r < logits.rows(); ++r) {
    auto z = logits.row(r);
    const auto best = std::max_element(z.begin(), z.end()) - z.begin();
    if (best == batch.labels[r]) ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(logits.rows());
}

}  // namespace fedaug
