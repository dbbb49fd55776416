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

#include "fedaug/federation.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <optional>
#include <string>
#include <thread>

#include "fedaug/error.hpp"

namespace fedaug {

namespace {

constexpr std::size_t kEvalChunk = 512;

bool uses_lambda_update(StrategyKind k) {
  return k == StrategyKind::kAfl || k == StrategyKind::kGenAfl;
}

void require_updates(const std::vector<LocalUpdate>& updates, std::size_t n,
                     const char* op) {
  if (updates.empty()) throw ValueError(std::string(op) + ": no updates");
  if (n != updates.size()) {
    throw DimensionError(std::string(op) + ": " + std::to_string(n) +
                         " weights for " + std::to_string(updates.size()) +
                         " updates");
  }
}

std::vector<double> client_weights(const std::vector<Environment>& clients) {
  double total = 0.0;
  for (const auto& c : clients) total += static_cast<double>(c.samples.size());
  std::vector<double> w;
  w.reserve(clients.size());
  for (const auto& c : clients) {
    w.push_back(static_cast<double>(c.samples.size()) / total);
  }
  return w;
}

// Size-weighted mean loss of theta over the clients' un-augmented data.
double global_objective(const ModelSpec& spec, const ParamVector& theta,
                        const std::vector<Environment>& clients,
                        const std::vector<double>& weights) {
  double acc = 0.0;
  for (std::size_t i = 0; i < clients.size(); ++i) {
    const auto& s = clients[i].samples;
    double sum = 0.0;
    for (std::size_t b = 0; b < s.size(); b += kEvalChunk) {
      const std::size_t e = std::min(s.size(), b + kEvalChunk);
      const Batch batch = to_batch(std::span<const Glyph>(s).subspan(b, e - b));
      sum += mean_loss(spec, theta, batch) * static_cast<double>(e - b);
    }
    acc += weights[i] * sum / static_cast<double>(s.size());
  }
  return acc;
}

template <typename Fn>
void parallel_for(std::size_t n, std::size_t threads, Fn&& fn) {
  threads = std::max<std::size_t>(1, std::min(threads, n));
  std::vector<std::exception_ptr> errors(n);
  auto worker = [&](std::size_t t) {
    for (std::size_t i = t; i < n; i += threads) {
      try {
        fn(i);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  if (threads == 1) {
    worker(0);
  } else {
    std::vector<std::jthread> pool;
    pool.reserve(threads);
    for (std::size_t t = 0; t < threads; ++t) pool.emplace_back(worker, t);
  }
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

}  // namespace

std::string_view to_string(StrategyKind kind) {
  switch (kind) {
    case StrategyKind::kFedAvg: return "fedavg";
    case StrategyKind::kAfl: return "afl";
    case StrategyKind::kGenAfl: return "gen_afl";
    case StrategyKind::kVm: return "vm";
    case StrategyKind::kFedIrm: return "fed_irm";
    case StrategyKind::kFedProx: return "fedprox";
    case StrategyKind::kCentralized: return "centralized";
  }
  return "?";
}

StrategyKind strategy_kind_from_string(std::string_view name) {
  for (StrategyKind k :
       {StrategyKind::kFedAvg, StrategyKind::kAfl, StrategyKind::kGenAfl,
        StrategyKind::kVm, StrategyKind::kFedIrm, StrategyKind::kFedProx,
        StrategyKind::kCentralized}) {
    if (to_string(k) == name) return k;
  }
  throw ValueError("unknown strategy '" + std::string(name) + "'");
}

void StrategyConfig::validate(std::size_t num_clients) const {
  if (rounds_T < 1) throw ConfigError("strategy.rounds_T", "must be >= 1");
  if (local_steps_E < 1) throw ConfigError("strategy.local_steps_E", "must be >= 1");
  if (batch_size < 1) throw ConfigError("strategy.batch_size", "must be >= 1");
  if (!(lr_theta >= 0.0)) throw ConfigError("strategy.lr_theta", "must be >= 0");
  if (!(lr_lambda >= 0.0)) throw ConfigError("strategy.lr_lambda", "must be >= 0");
  if (kind == StrategyKind::kGenAfl && num_clients > 0 &&
      !(lambda_min < 1.0 / static_cast<double>(num_clients))) {
    throw ConfigError("strategy.lambda_min",
                      "lambda_min must be < 1/n (lambda_min = " +
                          format_real(lambda_min) +
                          ", n = " + std::to_string(num_clients) + ")");
  }
  if ((kind == StrategyKind::kVm || kind == StrategyKind::kFedIrm) &&
      !(beta >= 0.0)) {
    throw ConfigError("strategy.beta", "must be >= 0");
  }
  if (kind == StrategyKind::kFedProx) {
    if (!(mu >= 0.0)) throw ConfigError("strategy.mu", "must be >= 0");
    if (optimizer_kind != OptimizerKind::kSgd) {
      throw ConfigError("strategy.optimizer_kind", "fedprox requires sgd");
    }
  }
  if (kind == StrategyKind::kCentralized && local_steps_E != 1) {
    throw ConfigError("strategy.local_steps_E",
                      "centralized training takes one step per round (E = 1)");
  }
}

RngStream client_round_stream(const RngStream& root, std::size_t round,
                              std::size_t client) {
  return root.derive("local-train").derive(round).derive(client);
}

Batch sample_batch(const Environment& client, std::size_t batch_size,
                   const AugmentationSpec& aug, RngStream& rng) {
  if (client.samples.empty()) throw ValueError("sample_batch: empty client");
  const std::size_t dim = client.samples.front().pixels.rows() *
                          client.samples.front().pixels.cols();
  RealMatrix inputs(batch_size, dim);
  std::vector<int> labels(batch_size);
  const bool plain = aug.kind == AugmentationSpec::Kind::kNone;
  for (std::size_t r = 0; r < batch_size; ++r) {
    const Glyph& g = client.samples[rng.uniform_index(client.samples.size())];
    labels[r] = g.label;
    if (plain) {
      std::copy(g.pixels.span().begin(), g.pixels.span().end(), inputs.row(r).begin());
    } else {
      const RealMatrix px = apply_augmentation(aug, g.pixels, rng);
      std::copy(px.span().begin(), px.span().end(), inputs.row(r).begin());
    }
  }
  return {std::move(inputs), std::move(labels)};
}

LocalUpdate local_train(const Environment& client, std::size_t client_id,
                        const ParamVector& theta_start,
                        const StrategyConfig& cfg, const AugmentationSpec& aug,
                        const ModelSpec& spec, RngStream rng) {
  if (client.samples.empty()) {
    throw ValueError("local_train: client " + std::to_string(client_id) +
                     " has no samples");
  }
  ParamVector theta = theta_start;
  OptimizerState opt = make_optimizer(cfg.optimizer_kind, cfg.lr_theta, theta.size());
  double loss_sum = 0.0;
  for (std::size_t step = 0; step < cfg.local_steps_E; ++step) {
    const Batch batch = sample_batch(client, cfg.batch_size, aug, rng);
    if (cfg.kind == StrategyKind::kFedIrm) {
      IrmPenalty irm = irm_penalty_and_grad(spec, theta, batch);
      ParamVector grad = std::move(irm.loss_grad);
      axpy_inplace(cfg.beta, irm.grad.span(), grad.span());
      loss_sum += irm.loss;
      optimizer_step_inplace(opt, theta, grad);
    } else {
      LossAndGrad lg = loss_and_grad(spec, theta, batch);
      if (cfg.kind == StrategyKind::kFedProx) {
        for (std::size_t k = 0; k < theta.size(); ++k) {
          lg.grad[k] += cfg.mu * (theta[k] - theta_start[k]);
        }
      }
      loss_sum += lg.loss;
      optimizer_step_inplace(opt, theta, lg.grad);
    }
  }
  ParamVector pseudo = theta_start;
  for (std::size_t k = 0; k < pseudo.size(); ++k) pseudo[k] -= theta[k];
  return {client_id, std::move(theta), std::move(pseudo),
          loss_sum / static_cast<double>(cfg.local_steps_E), std::move(opt)};
}

ParamVector aggregate_fedavg(const std::vector<LocalUpdate>& updates,
                             const std::vector<double>& weights) {
  require_updates(updates, weights.size(), "aggregate_fedavg");
  double total = 0.0;
  for (double w : weights) total += w;
  if (std::abs(total - 1.0) > 1e-12) {
    throw ValueError("aggregate_fedavg: weights sum to " + format_real(total));
  }
  ParamVector out(updates.front().theta_after.size());
  for (std::size_t i = 0; i < updates.size(); ++i) {
    axpy_inplace(weights[i], updates[i].theta_after.span(), out.span());
  }
  out.check_finite("aggregate_fedavg");
  return out;
}

ParamVector aggregate_weighted(const std::vector<LocalUpdate>& updates,
                               const WeightVector& lambda) {
  require_updates(updates, lambda.size(), "aggregate_weighted");
  ParamVector out(updates.front().theta_after.size());
  for (std::size_t i = 0; i < updates.size(); ++i) {
    axpy_inplace(lambda[i], updates[i].theta_after.span(), out.span());
  }
  out.check_finite("aggregate_weighted");
  return out;
}

WeightVector update_lambda_gen_afl(const WeightVector& lambda,
                                   const std::vector<double>& losses,
                                   double lr_lambda, double lambda_min) {
  const std::size_t n = lambda.size();
  if (losses.size() != n) {
    throw DimensionError("update_lambda: loss vector length mismatch");
  }
  if (!(lambda_min < 1.0 / static_cast<double>(n))) {
    throw ValueError("update_lambda: lambda_min must be < 1/n");
  }
  const double width = 1.0 - static_cast<double>(n) * lambda_min;
  RealVector shifted(n);
  for (std::size_t i = 0; i < n; ++i) {
    shifted[i] = (lambda[i] + lr_lambda * losses[i] - lambda_min) / width;
  }
  WeightVector out = project_simplex(shifted);
  for (double& x : out.span()) x = width * x + lambda_min;
  out.check_finite("update_lambda");
  return out;
}

WeightVector update_lambda_afl(const WeightVector& lambda,
                               const std::vector<double>& losses,
                               double lr_lambda) {
  return update_lambda_gen_afl(lambda, losses, lr_lambda, 0.0);
}

ParamVector aggregate_vm(const std::vector<LocalUpdate>& updates,
                         const std::vector<double>& losses,
                         const WeightVector& lambda, double beta) {
  require_updates(updates, lambda.size(), "aggregate_vm");
  if (losses.size() != updates.size()) {
    throw DimensionError("aggregate_vm: loss vector length mismatch");
  }
  const std::size_t dim = updates.front().pseudo_gradient.size();
  ParamVector mean_delta(dim);
  double mean_loss_value = 0.0;
  for (std::size_t i = 0; i < updates.size(); ++i) {
    axpy_inplace(lambda[i], updates[i].pseudo_gradient.span(), mean_delta.span());
    mean_loss_value += lambda[i] * losses[i];
  }
  ParamVector out = mean_delta;
  for (std::size_t i = 0; i < updates.size(); ++i) {
    const double c = 2.0 * beta * lambda[i] * (losses[i] - mean_loss_value);
    if (c == 0.0) continue;
    const auto& d = updates[i].pseudo_gradient;
    for (std::size_t k = 0; k < dim; ++k) out[k] += c * (d[k] - mean_delta[k]);
  }
  out.check_finite("aggregate_vm");
  return out;
}

WeightVector initial_lambda(const std::vector<Environment>& clients,
                            const StrategyConfig& cfg) {
  WeightVector lambda(client_weights(clients));
  if (cfg.kind == StrategyKind::kGenAfl) {
    return project_generalized(lambda, cfg.lambda_min);
  }
  if (cfg.kind == StrategyKind::kAfl) return project_simplex(lambda);
  return lambda;
}

double env_accuracy(const ModelSpec& spec, const ParamVector& theta,
                    const Environment& env) {
  const auto& s = env.samples;
  if (s.empty()) throw ValueError("accuracy: empty environment");
  double correct = 0.0;
  for (std::size_t b = 0; b < s.size(); b += kEvalChunk) {
    const std::size_t e = std::min(s.size(), b + kEvalChunk);
    const Batch batch = to_batch(std::span<const Glyph>(s).subspan(b, e - b));
    correct += accuracy(spec, theta, batch) * static_cast<double>(e - b);
  }
  return correct / static_cast<double>(s.size());
}

double mean_accuracy(const ModelSpec& spec, const ParamVector& theta,
                     const std::vector<Environment>& sets) {
  if (sets.empty()) throw ValueError("accuracy: no evaluation sets");
  double acc = 0.0;
  for (const auto& env : sets) acc += env_accuracy(spec, theta, env);
  return acc / static_cast<double>(sets.size());
}

RunResult run_federation(const FederatedData& data, const FederationSetup& setup,
                         const RngStream& rng, const RunHooks& hooks) {
  const StrategyConfig& cfg = setup.strategy;
  if (data.clients.empty()) throw ValueError("run_federation: no clients");
  if (setup.eval_every_rounds < 1) {
    throw ConfigError("eval_every_rounds", "must be >= 1");
  }
  setup.augmentation.validate();

  std::vector<Environment> merged;
  const bool centralized = cfg.kind == StrategyKind::kCentralized;
  if (centralized) merged.push_back(merge_environments(data.clients));
  const std::vector<Environment>& clients = centralized ? merged : data.clients;
  cfg.validate(clients.size());

  const std::size_t n = clients.size();
  const std::vector<double> weights = client_weights(clients);
  FederationState state{setup.initial_theta, initial_lambda(clients, cfg), 0, {}};
  if (state.global_theta.size() != make_layout(setup.model).total) {
    throw DimensionError("run_federation: initial parameters do not match model");
  }

  std::vector<Environment> eval_sets = data.validation;
  eval_sets.push_back(data.ood);

  RunResult result{{}, state};
  for (std::size_t t = 0; t < cfg.rounds_T; ++t) {
    std::vector<std::optional<LocalUpdate>> slots(n);
    try {
      parallel_for(n, setup.threads, [&](std::size_t i) {
        slots[i] = local_train(clients[i], i, state.global_theta, cfg,
                               setup.augmentation, setup.model,
                               client_round_stream(rng, t, i));
      });
    } catch (const std::exception& e) {
      throw std::runtime_error("round " + std::to_string(t) + ": " + e.what());
    }
    std::vector<LocalUpdate> updates;
    updates.reserve(n);
    std::vector<double> losses;
    for (auto& s : slots) {
      losses.push_back(s->train_loss);
      updates.push_back(std::move(*s));
    }

    switch (cfg.kind) {
      case StrategyKind::kAfl:
      case StrategyKind::kGenAfl:
        state.global_theta = aggregate_weighted(updates, state.lambda);
        break;
      case StrategyKind::kVm: {
        const ParamVector delta =
            aggregate_vm(updates, losses, state.lambda, cfg.beta);
        state.global_theta = subtract(state.global_theta, delta);
        break;
      }
      default:
        state.global_theta = aggregate_fedavg(updates, weights);
        break;
    }
    const WeightVector lambda_used = state.lambda;
    if (uses_lambda_update(cfg.kind)) {
      const double lmin = cfg.kind == StrategyKind::kGenAfl ? cfg.lambda_min : 0.0;
      state.lambda = update_lambda_gen_afl(state.lambda, losses, cfg.lr_lambda, lmin);
    }
    state.round = t + 1;
    state.per_client_optimizer.clear();
    for (auto& u : updates) state.per_client_optimizer.push_back(std::move(u.optimizer));
    if (hooks.on_round_end) hooks.on_round_end(state);

    const bool last = t + 1 == cfg.rounds_T;
    if (!last && (t + 1) % setup.eval_every_rounds != 0) continue;

    RoundRecord rec;
    rec.round = t;
    rec.steps = (t + 1) * cfg.local_steps_E;
    rec.id_accuracy = mean_accuracy(setup.model, state.global_theta, data.validation);
    rec.ood_accuracy = env_accuracy(setup.model, state.global_theta, data.ood);
    rec.per_client_loss = losses;
    rec.lambda = lambda_used.values();
    rec.objective = global_objective(setup.model, state.global_theta, clients, weights);
    if (last && setup.final_heterogeneity) {
      rec.grad_sq_norms = heterogeneity(eval_sets, state.global_theta, setup.model);
    }
    if (hooks.on_record) hooks.on_record(rec);
    result.records.push_back(std::move(rec));
  }
  result.final_state = std::move(state);
  return result;
}

}  // namespace fedaug
