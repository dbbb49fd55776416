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

#ifndef FEDAUG_DIAGNOSTICS_HPP_
#define FEDAUG_DIAGNOSTICS_HPP_

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "fedaug/data.hpp"
#include "fedaug/model.hpp"
#include "json.hpp"

namespace fedaug {

// Squared full-batch gradient norm of every evaluation environment at one
// model, plus mean and sample standard deviation across environments.
struct HeterogeneityReport {
  std::vector<std::size_t> env_ids;
  std::vector<double> per_env_grad_sq_norm;
  double mean = 0.0;
  double std = 0.0;
  std::string evaluated_at;
};

// Per-round metrics of one federated run. `steps` counts local gradient steps
// per client so far (round + 1) * E, which is what budget alignment uses.
struct RoundRecord {
  std::size_t round = 0;
  std::size_t steps = 0;
  double id_accuracy = 0.0;
  double ood_accuracy = 0.0;
  std::vector<double> per_client_loss;
  std::vector<double> lambda;
  // Size-weighted mean training loss of the global model on un-augmented
  // client data.
  double objective = 0.0;
  std::optional<HeterogeneityReport> grad_sq_norms;
};

// Evaluation sets are used whole (validation splits for training domains,
// the full set for the OOD domain). Throws ValueError on an empty set.
HeterogeneityReport heterogeneity(const std::vector<Environment>& eval_sets,
                                  const ParamVector& theta,
                                  const ModelSpec& spec,
                                  std::string evaluated_at = "final global model");

struct TvQuery {
  enum class Kind { kDiracPair, kUniformPair };
  Kind kind;
  double t1;
  double t2;
  double alpha = 0.0;

  static TvQuery dirac_pair(double t1, double t2) {
    return {Kind::kDiracPair, t1, t2, 0.0};
  }
  // U(t1 - alpha, t1 + alpha) vs U(t2 - alpha, t2 + alpha).
  static TvQuery uniform_pair(double t1, double t2, double alpha) {
    return {Kind::kUniformPair, t1, t2, alpha};
  }
};

// Total variation as the unhalved L1 distance (range [0, 2]).
// Dirac: 2 if t1 != t2 else 0. Uniform: min(2, |t2 - t1| / alpha).
double tv_analytic(const TvQuery& q);

// Density sampled at start + i * step, i = 0..values.size()-1.
struct DensityGrid {
  double start;
  double step;
  std::vector<double> values;
};

// Trapezoid integral of |p1 - p2|. Both grids must coincide, hold
// non-negative values, and integrate to 1 within 1e-6.
double tv_numeric(const DensityGrid& p1, const DensityGrid& p2);

struct GapPoint {
  std::size_t round;
  std::size_t steps;
  double gap;  // centralized OOD accuracy minus federated OOD accuracy
};

// Pairs every federated record with the centralized record at the same
// gradient-step count. Throws ValueError when one is missing.
std::vector<GapPoint> gap_report(const std::vector<RoundRecord>& federated,
                                 const std::vector<RoundRecord>& centralized);

// Shortest round-trip decimal form.
std::string format_real(double v);

nlohmann::json to_json(const HeterogeneityReport& report);
nlohmann::json to_json(const RoundRecord& record);
HeterogeneityReport heterogeneity_from_json(const nlohmann::json& doc);
RoundRecord round_record_from_json(const nlohmann::json& doc);

// Long-format CSV: header "round,env_id,metric,value"; env_id is -1 for
// run-wide metrics.
inline constexpr const char* kCsvHeader = "round,env_id,metric,value";
std::string rounds_csv(const std::vector<RoundRecord>& records);
std::string heterogeneity_csv(const std::vector<RoundRecord>& records);

}  // namespace fedaug

#endif  // FEDAUG_DIAGNOSTICS_HPP_
