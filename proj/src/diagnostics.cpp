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

#include "fedaug/diagnostics.hpp"

#include <charconv>
#include <cmath>
#include <map>
#include <sstream>

#include "fedaug/error.hpp"

namespace fedaug {

namespace {

double trapezoid(const std::vector<double>& f, double step) {
  if (f.size() < 2) return 0.0;
  double acc = 0.5 * (f.front() + f.back());
  for (std::size_t i = 1; i + 1 < f.size(); ++i) acc += f[i];
  return acc * step;
}

void check_density(const DensityGrid& p, const char* name) {
  for (double v : p.values) {
    if (!(v >= 0.0) || !std::isfinite(v)) {
      throw ValueError(std::string("tv_numeric: ") + name +
                       " has a negative or non-finite value");
    }
  }
  const double mass = trapezoid(p.values, p.step);
  if (std::abs(mass - 1.0) > 1e-6) {
    throw ValueError(std::string("tv_numeric: ") + name +
                     " integrates to " + format_real(mass) + ", not 1");
  }
}

void append_row(std::string& out, std::size_t round, long long env_id,
                const char* metric, double value) {
  out += std::to_string(round);
  out += ',';
  out += std::to_string(env_id);
  out += ',';
  out += metric;
  out += ',';
  out += format_real(value);
  out += '\n';
}

}  // namespace

HeterogeneityReport heterogeneity(const std::vector<Environment>& eval_sets,
                                  const ParamVector& theta,
                                  const ModelSpec& spec,
                                  std::string evaluated_at) {
  if (eval_sets.empty()) throw ValueError("heterogeneity: no environments");
  HeterogeneityReport report;
  report.evaluated_at = std::move(evaluated_at);
  for (const Environment& env : eval_sets) {
    if (env.samples.empty()) {
      throw ValueError("heterogeneity: environment " +
                       std::to_string(env.env_id) + " has no samples");
    }
    const LossAndGrad lg = loss_and_grad(spec, theta, to_batch(env.samples));
    report.env_ids.push_back(env.env_id);
    report.per_env_grad_sq_norm.push_back(squared_norm(lg.grad));
  }
  const double n = static_cast<double>(report.per_env_grad_sq_norm.size());
  double sum = 0.0;
  for (double v : report.per_env_grad_sq_norm) sum += v;
  report.mean = sum / n;
  if (report.per_env_grad_sq_norm.size() > 1) {
    double ss = 0.0;
    for (double v : report.per_env_grad_sq_norm) {
      ss += (v - report.mean) * (v - report.mean);
    }
    report.std = std::sqrt(ss / (n - 1.0));
  }
  return report;
}

double tv_analytic(const TvQuery& q) {
  const double gap = std::abs(q.t2 - q.t1);
  switch (q.kind) {
    case TvQuery::Kind::kDiracPair:
      return gap == 0.0 ? 0.0 : 2.0;
    case TvQuery::Kind::kUniformPair:
      if (!(q.alpha > 0.0)) throw ValueError("tv_analytic: alpha must be > 0");
      return std::min(2.0, gap / q.alpha);
  }
  return 0.0;
}

double tv_numeric(const DensityGrid& p1, const DensityGrid& p2) {
  if (p1.values.size() != p2.values.size() || p1.start != p2.start ||
      p1.step != p2.step) {
    throw DimensionError("tv_numeric: densities are on different grids");
  }
  if (!(p1.step > 0.0) || p1.values.size() < 2) {
    throw ValueError("tv_numeric: grid needs a positive step and >= 2 nodes");
  }
  check_density(p1, "p1");
  check_density(p2, "p2");
  std::vector<double> diff(p1.values.size());
  for (std::size_t i = 0; i < diff.size(); ++i) {
    diff[i] = std::abs(p1.values[i] - p2.values[i]);
  }
  return trapezoid(diff, p1.step);
}

std::vector<GapPoint> gap_report(const std::vector<RoundRecord>& federated,
                                 const std::vector<RoundRecord>& centralized) {
  std::map<std::size_t, const RoundRecord*> by_steps;
  for (const RoundRecord& r : centralized) by_steps[r.steps] = &r;
  std::vector<GapPoint> out;
  out.reserve(federated.size());
  for (const RoundRecord& f : federated) {
    auto it = by_steps.find(f.steps);
    if (it == by_steps.end()) {
      throw ValueError("gap_report: no centralized record at " +
                       std::to_string(f.steps) +
                       " gradient steps (misaligned budgets)");
    }
    out.push_back({f.round, f.steps, it->second->ood_accuracy - f.ood_accuracy});
  }
  return out;
}

std::string format_real(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

nlohmann::json to_json(const HeterogeneityReport& report) {
  return {{"env_ids", report.env_ids},
          {"per_env_grad_sq_norm", report.per_env_grad_sq_norm},
          {"mean", report.mean},
          {"std", report.std},
          {"evaluated_at", report.evaluated_at}};
}

nlohmann::json to_json(const RoundRecord& record) {
  nlohmann::json j = {{"round", record.round},
                      {"steps", record.steps},
                      {"id_accuracy", record.id_accuracy},
                      {"ood_accuracy", record.ood_accuracy},
                      {"per_client_loss", record.per_client_loss},
                      {"lambda", record.lambda},
                      {"objective", record.objective}};
  j["grad_sq_norms"] = record.grad_sq_norms ? to_json(*record.grad_sq_norms)
                                            : nlohmann::json(nullptr);
  return j;
}

HeterogeneityReport heterogeneity_from_json(const nlohmann::json& doc) {
  HeterogeneityReport r;
  r.env_ids = doc.at("env_ids").get<std::vector<std::size_t>>();
  r.per_env_grad_sq_norm = doc.at("per_env_grad_sq_norm").get<std::vector<double>>();
  r.mean = doc.at("mean").get<double>();
  r.std = doc.at("std").get<double>();
  r.evaluated_at = doc.at("evaluated_at").get<std::string>();
  return r;
}

RoundRecord round_record_from_json(const nlohmann::json& doc) {
  RoundRecord r;
  r.round = doc.at("round").get<std::size_t>();
  r.steps = doc.at("steps").get<std::size_t>();
  r.id_accuracy = doc.at("id_accuracy").get<double>();
  r.ood_accuracy = doc.at("ood_accuracy").get<double>();
  r.per_client_loss = doc.at("per_client_loss").get<std::vector<double>>();
  r.lambda = doc.at("lambda").get<std::vector<double>>();
  r.objective = doc.at("objective").get<double>();
  if (!doc.at("grad_sq_norms").is_null()) {
    r.grad_sq_norms = heterogeneity_from_json(doc.at("grad_sq_norms"));
  }
  return r;
}

std::string rounds_csv(const std::vector<RoundRecord>& records) {
  std::string out = std::string(kCsvHeader) + "\n";
  for (const RoundRecord& r : records) {
    append_row(out, r.round, -1, "steps", static_cast<double>(r.steps));
    append_row(out, r.round, -1, "id_accuracy", r.id_accuracy);
    append_row(out, r.round, -1, "ood_accuracy", r.ood_accuracy);
    append_row(out, r.round, -1, "objective", r.objective);
    for (std::size_t c = 0; c < r.per_client_loss.size(); ++c) {
      append_row(out, r.round, static_cast<long long>(c), "client_loss",
                 r.per_client_loss[c]);
    }
    for (std::size_t c = 0; c < r.lambda.size(); ++c) {
      append_row(out, r.round, static_cast<long long>(c), "lambda", r.lambda[c]);
    }
  }
  return out;
}

std::string heterogeneity_csv(const std::vector<RoundRecord>& records) {
  std::string out = std::string(kCsvHeader) + "\n";
  for (const RoundRecord& r : records) {
    if (!r.grad_sq_norms) continue;
    const HeterogeneityReport& h = *r.grad_sq_norms;
    for (std::size_t i = 0; i < h.env_ids.size(); ++i) {
      append_row(out, r.round, static_cast<long long>(h.env_ids[i]),
                 "grad_sq_norm", h.per_env_grad_sq_norm[i]);
    }
    append_row(out, r.round, -1, "grad_sq_norm_mean", h.mean);
    append_row(out, r.round, -1, "grad_sq_norm_std", h.std);
  }
  return out;
}

}  // namespace fedaug
