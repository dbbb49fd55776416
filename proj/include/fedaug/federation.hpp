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

#ifndef FEDAUG_FEDERATION_HPP_
#define FEDAUG_FEDERATION_HPP_

#include <cstddef>
#include <functional>
#include <string_view>
#include <vector>

#include "fedaug/data.hpp"
#include "fedaug/diagnostics.hpp"
#include "fedaug/model.hpp"
#include "fedaug/optimizer.hpp"
#include "fedaug/rng.hpp"
#include "fedaug/simplex.hpp"

namespace fedaug {

enum class StrategyKind {
  kFedAvg,
  kAfl,
  kGenAfl,
  kVm,
  kFedIrm,
  kFedProx,
  kCentralized,
};

std::string_view to_string(StrategyKind kind);
StrategyKind strategy_kind_from_string(std::string_view name);

struct StrategyConfig {
  StrategyKind kind = StrategyKind::kFedAvg;
  std::size_t rounds_T = 80;
  std::size_t local_steps_E = 200;
  std::size_t batch_size = 64;
  double lr_theta = 1e-3;
  double lr_lambda = 0.1;   // afl, gen_afl
  double lambda_min = -1.0; // gen_afl
  double beta = 10.0;       // vm, fed_irm
  double mu = 0.01;         // fedprox
  OptimizerKind optimizer_kind = OptimizerKind::kAdam;

  // Throws ConfigError naming the offending "strategy.*" field.
  void validate(std::size_t num_clients) const;
};

struct FederationState {
  ParamVector global_theta;
  WeightVector lambda;
  std::size_t round = 0;
  // Client optimizer states at the end of the latest round. They are not
  // carried into the next round: every round starts from fresh moments.
  std::vector<OptimizerState> per_client_optimizer;
};

struct LocalUpdate {
  std::size_t client_id;
  ParamVector theta_after;
  ParamVector pseudo_gradient;  // theta_start - theta_after
  double train_loss;            // mean data loss over the E local steps
  OptimizerState optimizer;
};

// The per-(round, client) stream local training draws batches from.
RngStream client_round_stream(const RngStream& root, std::size_t round,
                              std::size_t client);

// batch_size samples drawn uniformly with replacement, each augmented on
// draw.
Batch sample_batch(const Environment& client, std::size_t batch_size,
                   const AugmentationSpec& aug, RngStream& rng);

// E optimizer steps from theta_start. fedprox adds mu (theta - theta_start)
// to each gradient; fed_irm minimizes f + beta * IRM penalty.
LocalUpdate local_train(const Environment& client, std::size_t client_id,
                        const ParamVector& theta_start,
                        const StrategyConfig& cfg, const AugmentationSpec& aug,
                        const ModelSpec& spec, RngStream rng);

// sum_i w_i theta_after_i; weights must sum to 1 within 1e-12.
ParamVector aggregate_fedavg(const std::vector<LocalUpdate>& updates,
                             const std::vector<double>& weights);

// sum_i lambda_i theta_after_i (lambda may have negative entries).
ParamVector aggregate_weighted(const std::vector<LocalUpdate>& updates,
                               const WeightVector& lambda);

// lambda' = (lambda + lr_lambda f - lambda_min 1) / (1 - n lambda_min)
// lambda  = (1 - n lambda_min) proj_simplex(lambda') + lambda_min 1
WeightVector update_lambda_gen_afl(const WeightVector& lambda,
                                   const std::vector<double>& losses,
                                   double lr_lambda, double lambda_min);
WeightVector update_lambda_afl(const WeightVector& lambda,
                               const std::vector<double>& losses,
                               double lr_lambda);

// Variance-penalized aggregate pseudo-gradient with lambda-weighted means:
// D = sum_i l_i D_i + 2 beta sum_i l_i (f_i - fbar)(D_i - Dbar).
// The caller applies theta_next = theta - D.
ParamVector aggregate_vm(const std::vector<LocalUpdate>& updates,
                         const std::vector<double>& losses,
                         const WeightVector& lambda, double beta);

// Client data for one federated run.
struct FederatedData {
  std::vector<Environment> clients;     // train clients, in client-id order
  std::vector<Environment> validation;  // held-out split of each train domain
  Environment ood;                      // unseen test domain
};

struct FederationSetup {
  ModelSpec model;
  ParamVector initial_theta;
  StrategyConfig strategy;
  AugmentationSpec augmentation;
  std::size_t eval_every_rounds = 1;
  // Worker threads for local training; results never depend on it.
  std::size_t threads = 1;
  // Gradient-norm heterogeneity report on the final record.
  bool final_heterogeneity = true;
};

struct RunHooks {
  // After aggregation, every round.
  std::function<void(const FederationState&)> on_round_end;
  // Whenever a RoundRecord is produced.
  std::function<void(const RoundRecord&)> on_record;
};

struct RunResult {
  std::vector<RoundRecord> records;
  FederationState final_state;
};

// Initial weights n_i / N, projected onto the strategy's feasible set.
WeightVector initial_lambda(const std::vector<Environment>& clients,
                            const StrategyConfig& cfg);

// Runs rounds_T rounds with full participation. Records are emitted every
// eval_every_rounds rounds and always after the last round. Centralized mode
// trains a single merged client with E = 1.
RunResult run_federation(const FederatedData& data, const FederationSetup& setup,
                         const RngStream& rng, const RunHooks& hooks = {});

// Accuracy helpers used for records.
double mean_accuracy(const ModelSpec& spec, const ParamVector& theta,
                     const std::vector<Environment>& sets);
double env_accuracy(const ModelSpec& spec, const ParamVector& theta,
                    const Environment& env);

}  // namespace fedaug

#endif  // FEDAUG_FEDERATION_HPP_
