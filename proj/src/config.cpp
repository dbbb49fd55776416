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

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "fedaug/error.hpp"
#include "fedaug/experiment.hpp"

namespace fedaug {

namespace {

using nlohmann::json;

std::string join(const std::string& path, const std::string& key) {
  return path.empty() ? key : path + "." + key;
}

std::size_t as_count(const json& v, const std::string& path) {
  if (v.is_number_unsigned()) return v.get<std::size_t>();
  if (v.is_number_integer() && v.get<long long>() >= 0) {
    return static_cast<std::size_t>(v.get<long long>());
  }
  throw ConfigError(path, "expected a non-negative integer");
}

double as_real(const json& v, const std::string& path) {
  if (!v.is_number()) throw ConfigError(path, "expected a number");
  const double x = v.get<double>();
  if (!std::isfinite(x)) throw ConfigError(path, "expected a finite number");
  return x;
}

std::string as_string(const json& v, const std::string& path) {
  if (!v.is_string()) throw ConfigError(path, "expected a string");
  return v.get<std::string>();
}

const json& as_array(const json& v, const std::string& path) {
  if (!v.is_array()) throw ConfigError(path, "expected an array");
  return v;
}

// Walks one JSON object, remembering which keys were read so that leftovers
// can be reported as unknown fields.
class ObjectReader {
 public:
  ObjectReader(const json& doc, std::string path)
      : doc_(doc), path_(std::move(path)) {
    if (!doc_.is_object()) {
      throw ConfigError(path_.empty() ? "<root>" : path_, "expected an object");
    }
  }

  const json* take(const std::string& key) {
    seen_.insert(key);
    auto it = doc_.find(key);
    return it == doc_.end() ? nullptr : &*it;
  }

  std::string path(const std::string& key) const { return join(path_, key); }

  void count(const std::string& key, std::size_t& out) {
    if (const json* v = take(key)) out = as_count(*v, path(key));
  }
  void real(const std::string& key, double& out) {
    if (const json* v = take(key)) out = as_real(*v, path(key));
  }
  void string(const std::string& key, std::string& out) {
    if (const json* v = take(key)) out = as_string(*v, path(key));
  }

  void finish() const {
    for (auto it = doc_.begin(); it != doc_.end(); ++it) {
      if (!seen_.count(it.key())) throw ConfigError(path(it.key()), "unknown field");
    }
  }

 private:
  const json& doc_;
  std::string path_;
  std::set<std::string> seen_;
};

DatasetConfig parse_dataset(const json& doc, const std::string& path) {
  ObjectReader r(doc, path);
  DatasetConfig d;
  std::string kind = "synthetic";
  r.string("kind", kind);
  if (kind == "synthetic") {
    d.kind = DatasetConfig::Kind::kSynthetic;
    r.count("num_classes", d.num_classes);
    r.count("side", d.side);
    r.count("samples_per_class", d.samples_per_class);
    r.real("noise_std", d.noise_std);
  } else if (kind == "idx") {
    d.kind = DatasetConfig::Kind::kIdx;
    r.string("images", d.images_path);
    r.string("labels", d.labels_path);
    r.count("max_samples", d.max_samples);
    if (d.images_path.empty()) throw ConfigError(r.path("images"), "required");
    if (d.labels_path.empty()) throw ConfigError(r.path("labels"), "required");
  } else {
    throw ConfigError(r.path("kind"), "expected \"synthetic\" or \"idx\"");
  }
  r.finish();
  return d;
}

json dataset_to_json(const DatasetConfig& d) {
  if (d.kind == DatasetConfig::Kind::kIdx) {
    return {{"kind", "idx"},
            {"images", d.images_path},
            {"labels", d.labels_path},
            {"max_samples", d.max_samples}};
  }
  return {{"kind", "synthetic"},
          {"num_classes", d.num_classes},
          {"side", d.side},
          {"samples_per_class", d.samples_per_class},
          {"noise_std", d.noise_std}};
}

StrategyConfig parse_strategy(const json& doc, const std::string& path) {
  ObjectReader r(doc, path);
  StrategyConfig s;
  if (const json* v = r.take("kind")) {
    try {
      s.kind = strategy_kind_from_string(as_string(*v, r.path("kind")));
    } catch (const ValueError& e) {
      throw ConfigError(r.path("kind"), e.what());
    }
  }
  r.count("rounds_T", s.rounds_T);
  r.count("local_steps_E", s.local_steps_E);
  r.count("batch_size", s.batch_size);
  r.real("lr_theta", s.lr_theta);
  r.real("lr_lambda", s.lr_lambda);
  r.real("lambda_min", s.lambda_min);
  r.real("beta", s.beta);
  r.real("mu", s.mu);
  if (const json* v = r.take("optimizer")) {
    try {
      s.optimizer_kind = optimizer_kind_from_string(as_string(*v, r.path("optimizer")));
    } catch (const ValueError& e) {
      throw ConfigError(r.path("optimizer"), e.what());
    }
  }
  r.finish();
  return s;
}

json strategy_to_json(const StrategyConfig& s) {
  return {{"kind", std::string(to_string(s.kind))},
          {"rounds_T", s.rounds_T},
          {"local_steps_E", s.local_steps_E},
          {"batch_size", s.batch_size},
          {"lr_theta", s.lr_theta},
          {"lr_lambda", s.lr_lambda},
          {"lambda_min", s.lambda_min},
          {"beta", s.beta},
          {"mu", s.mu},
          {"optimizer", std::string(to_string(s.optimizer_kind))}};
}

std::vector<double> parse_reals(const json& v, const std::string& path) {
  std::vector<double> out;
  const json& arr = as_array(v, path);
  for (std::size_t i = 0; i < arr.size(); ++i) {
    out.push_back(as_real(arr[i], path + "[" + std::to_string(i) + "]"));
  }
  return out;
}

std::vector<std::size_t> parse_counts(const json& v, const std::string& path) {
  std::vector<std::size_t> out;
  const json& arr = as_array(v, path);
  for (std::size_t i = 0; i < arr.size(); ++i) {
    out.push_back(as_count(arr[i], path + "[" + std::to_string(i) + "]"));
  }
  return out;
}

}  // namespace

AugmentationSpec augmentation_from_json(const json& doc, const std::string& path) {
  ObjectReader r(doc, path);
  std::string kind = "none";
  r.string("kind", kind);
  AugmentationSpec a;
  if (kind == "none") {
    a = AugmentationSpec::none();
  } else if (kind == "random_rotation") {
    double alpha = 0.0;
    if (!r.take("alpha_deg")) throw ConfigError(r.path("alpha_deg"), "required");
    r.real("alpha_deg", alpha);
    a = AugmentationSpec::random_rotation(alpha);
  } else if (kind == "gaussian_blur") {
    double sigma = 1.0;
    std::size_t kernel = 5;
    r.real("sigma", sigma);
    r.count("kernel", kernel);
    a = AugmentationSpec::gaussian_blur(sigma, kernel);
  } else if (kind == "compose") {
    std::vector<AugmentationSpec> steps;
    const json* v = r.take("steps");
    if (!v) throw ConfigError(r.path("steps"), "required");
    const json& arr = as_array(*v, r.path("steps"));
    for (std::size_t i = 0; i < arr.size(); ++i) {
      steps.push_back(
          augmentation_from_json(arr[i], r.path("steps") + "[" + std::to_string(i) + "]"));
    }
    a = AugmentationSpec::compose(std::move(steps));
  } else {
    throw ConfigError(r.path("kind"),
                      "expected none, random_rotation, gaussian_blur or compose");
  }
  r.finish();
  try {
    a.validate();
  } catch (const ValueError& e) {
    throw ConfigError(path, e.what());
  }
  return a;
}

json augmentation_to_json(const AugmentationSpec& a) {
  switch (a.kind) {
    case AugmentationSpec::Kind::kNone:
      return {{"kind", "none"}};
    case AugmentationSpec::Kind::kRandomRotation:
      return {{"kind", "random_rotation"}, {"alpha_deg", a.alpha_deg}};
    case AugmentationSpec::Kind::kGaussianBlur:
      return {{"kind", "gaussian_blur"}, {"sigma", a.sigma}, {"kernel", a.kernel}};
    case AugmentationSpec::Kind::kCompose: {
      json steps = json::array();
      for (const auto& s : a.steps) steps.push_back(augmentation_to_json(s));
      return {{"kind", "compose"}, {"steps", steps}};
    }
  }
  return {};
}

void ExperimentConfig::validate() const {
  if (eval_every_rounds < 1) throw ConfigError("eval_every_rounds", "must be >= 1");
  if (angles_deg.empty()) throw ConfigError("angles_deg", "needs at least one angle");
  for (std::size_t i = 0; i < angles_deg.size(); ++i) {
    for (std::size_t j = 0; j < i; ++j) {
      if (angles_deg[i] == angles_deg[j]) {
        throw ConfigError("angles_deg", "duplicate angle " + std::to_string(angles_deg[i]));
      }
    }
  }
  if (!(validation_fraction > 0.0 && validation_fraction < 1.0)) {
    throw ConfigError("validation_fraction", "must lie in (0, 1)");
  }
  if (hidden_dims.empty()) throw ConfigError("model.hidden_dims", "needs a layer");
  for (std::size_t h : hidden_dims) {
    if (h == 0) throw ConfigError("model.hidden_dims", "layer widths must be >= 1");
  }
  if (dataset.kind == DatasetConfig::Kind::kSynthetic) {
    if (dataset.num_classes < 2 || dataset.num_classes > kPrototypeCount) {
      throw ConfigError("dataset.num_classes",
                        "must lie in [2, " + std::to_string(kPrototypeCount) + "]");
    }
    if (dataset.side < 4) throw ConfigError("dataset.side", "must be >= 4");
    if (dataset.samples_per_class < 1) {
      throw ConfigError("dataset.samples_per_class", "must be >= 1");
    }
    if (!(dataset.noise_std >= 0.0)) throw ConfigError("dataset.noise_std", "must be >= 0");
  }
  try {
    split.validate();
  } catch (const ValueError& e) {
    throw ConfigError("split", e.what());
  }
  try {
    augmentation.validate();
  } catch (const ValueError& e) {
    throw ConfigError("augmentation", e.what());
  }
  const std::size_t n = strategy.kind == StrategyKind::kCentralized
                            ? 1
                            : angles_deg.size() * split.num_clients_per_domain;
  strategy.validate(n);
}

ExperimentConfig parse_experiment(const json& doc) {
  ObjectReader r(doc, "");
  ExperimentConfig c;
  if (const json* v = r.take("seed")) c.seed = as_count(*v, "seed");
  if (const json* v = r.take("dataset")) c.dataset = parse_dataset(*v, "dataset");
  if (const json* v = r.take("angles_deg")) c.angles_deg = parse_reals(*v, "angles_deg");
  r.real("ood_angle_deg", c.ood_angle_deg);
  r.real("validation_fraction", c.validation_fraction);
  if (const json* v = r.take("split")) {
    ObjectReader s(*v, "split");
    s.real("dirichlet_alpha", c.split.dirichlet_alpha);
    s.count("num_clients_per_domain", c.split.num_clients_per_domain);
    s.finish();
  }
  if (const json* v = r.take("augmentation")) {
    c.augmentation = augmentation_from_json(*v, "augmentation");
  }
  if (const json* v = r.take("strategy")) c.strategy = parse_strategy(*v, "strategy");
  if (const json* v = r.take("model")) {
    ObjectReader m(*v, "model");
    if (const json* h = m.take("hidden_dims")) {
      c.hidden_dims = parse_counts(*h, "model.hidden_dims");
    }
    m.finish();
  }
  r.count("eval_every_rounds", c.eval_every_rounds);
  r.string("output_dir", c.output_dir);
  r.finish();
  c.validate();
  return c;
}

ExperimentConfig load_experiment(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config", "cannot read " + path.string());
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError("config", std::string("invalid JSON: ") + e.what());
  }
  return parse_experiment(doc);
}

json to_json(const ExperimentConfig& c, bool with_output_dir) {
  json j = {{"seed", c.seed},
            {"dataset", dataset_to_json(c.dataset)},
            {"angles_deg", c.angles_deg},
            {"ood_angle_deg", c.ood_angle_deg},
            {"validation_fraction", c.validation_fraction},
            {"split",
             {{"dirichlet_alpha", c.split.dirichlet_alpha},
              {"num_clients_per_domain", c.split.num_clients_per_domain}}},
            {"augmentation", augmentation_to_json(c.augmentation)},
            {"strategy", strategy_to_json(c.strategy)},
            {"model", {{"hidden_dims", c.hidden_dims}}},
            {"eval_every_rounds", c.eval_every_rounds}};
  if (with_output_dir) j["output_dir"] = c.output_dir;
  return j;
}

SweepConfig parse_sweep(const json& doc) {
  ObjectReader r(doc, "");
  SweepConfig s;
  const json* base = r.take("base");
  if (!base) throw ConfigError("base", "required");
  s.base = parse_experiment(*base);
  const json* axes = r.take("axes");
  if (!axes) throw ConfigError("axes", "required");
  const json& arr = as_array(*axes, "axes");
  if (arr.empty()) throw ConfigError("axes", "must not be empty");
  for (std::size_t i = 0; i < arr.size(); ++i) {
    const std::string p = "axes[" + std::to_string(i) + "]";
    ObjectReader a(arr[i], p);
    SweepAxis axis;
    a.string("path", axis.path);
    if (axis.path.empty()) throw ConfigError(p + ".path", "required");
    const json* values = a.take("values");
    if (!values) throw ConfigError(p + ".values", "required");
    const json& va = as_array(*values, p + ".values");
    if (va.empty()) throw ConfigError(p + ".values", "must not be empty");
    axis.values.assign(va.begin(), va.end());
    a.finish();
    s.axes.push_back(std::move(axis));
  }
  if (const json* v = r.take("fixed_budget")) {
    if (!v->is_null()) {
      s.fixed_budget = as_count(*v, "fixed_budget");
      if (*s.fixed_budget == 0) throw ConfigError("fixed_budget", "must be >= 1");
    }
  }
  r.count("max_points", s.max_points);
  r.string("output_dir", s.output_dir);
  r.finish();
  return s;
}

std::vector<SweepPoint> expand_sweep(const SweepConfig& sweep) {
  if (sweep.axes.empty()) throw ConfigError("axes", "must not be empty");
  std::size_t total = 1;
  for (const auto& a : sweep.axes) {
    total *= a.values.size();
    if (total > sweep.max_points) {
      throw ConfigError("axes", "grid exceeds max_points = " +
                                    std::to_string(sweep.max_points));
    }
  }
  const json base = to_json(sweep.base, false);
  std::vector<SweepPoint> out;
  out.reserve(total);
  std::vector<std::size_t> idx(sweep.axes.size(), 0);
  for (std::size_t p = 0; p < total; ++p) {
    std::size_t rem = p;
    for (std::size_t k = sweep.axes.size(); k-- > 0;) {
      idx[k] = rem % sweep.axes[k].values.size();
      rem /= sweep.axes[k].values.size();
    }
    json doc = base;
    SweepPoint point;
    for (std::size_t k = 0; k < sweep.axes.size(); ++k) {
      const std::string& path = sweep.axes[k].path;
      std::string pointer = "/" + path;
      for (char& ch : pointer) {
        if (ch == '.') ch = '/';
      }
      const json::json_pointer ptr(pointer);
      if (!doc.contains(ptr)) {
        throw ConfigError("axes[" + std::to_string(k) + "].path",
                          "no config field '" + path + "'");
      }
      doc[ptr] = sweep.axes[k].values[idx[k]];
      point.axis_values.push_back(sweep.axes[k].values[idx[k]]);
    }
    try {
      if (sweep.fixed_budget) {
        const json e = doc["strategy"]["local_steps_E"];
        const std::size_t steps = as_count(e, "strategy.local_steps_E");
        if (steps == 0 || *sweep.fixed_budget % steps != 0) {
          throw ConfigError("fixed_budget", std::to_string(*sweep.fixed_budget) +
                                                " is not a multiple of E = " +
                                                std::to_string(steps));
        }
        doc["strategy"]["rounds_T"] = *sweep.fixed_budget / steps;
      }
      point.config = parse_experiment(doc);
      point.config->output_dir = sweep.output_dir;
    } catch (const ConfigError& e) {
      point.error = e.what();
    }
    out.push_back(std::move(point));
  }
  return out;
}

}  // namespace fedaug
