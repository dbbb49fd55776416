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

#include "fedaug/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>

#include "fedaug/error.hpp"

namespace fedaug {

namespace {

using nlohmann::json;
namespace fs = std::filesystem;

void write_file(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << text;
  if (!out) throw std::runtime_error("write failed for " + path.string());
}

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValueError("cannot read " + path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

json read_json(const fs::path& path, const char* field) {
  std::ifstream in(path);
  if (!in) throw ConfigError(field, "cannot read " + path.string());
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError(field, std::string("invalid JSON: ") + e.what());
  }
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

std::string axis_value_text(const json& v) {
  return v.is_string() ? v.get<std::string>() : v.dump();
}

std::vector<Glyph> load_bank(const ExperimentConfig& cfg, const RngStream& root) {
  const DatasetConfig& d = cfg.dataset;
  if (d.kind == DatasetConfig::Kind::kSynthetic) {
    return make_glyph_bank(d.num_classes, d.side, d.samples_per_class, d.noise_std,
                           root.derive("bank"));
  }
  std::vector<Glyph> bank = load_idx_dataset(d.images_path, d.labels_path);
  if (d.max_samples > 0 && bank.size() > d.max_samples) {
    bank.erase(bank.begin() + static_cast<std::ptrdiff_t>(d.max_samples), bank.end());
  }
  return bank;
}

double mean_of(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return v.empty() ? 0.0 : s / static_cast<double>(v.size());
}

std::string optional_real(const std::vector<double>& v) {
  return v.empty() ? std::string() : format_real(mean_of(v));
}

}  // namespace

BuiltExperiment build_experiment(const ExperimentConfig& cfg) {
  cfg.validate();
  const RngStream root(cfg.seed, 0);
  const std::vector<Glyph> bank = load_bank(cfg, root);
  if (bank.empty()) throw ValueError("dataset is empty");

  std::vector<Environment> envs =
      make_environments(bank, cfg.angles_deg, cfg.ood_angle_deg, root.derive("environments"));
  FederatedData data{{}, {}, std::move(envs.back())};
  envs.pop_back();
  const RngStream holdout = root.derive("holdout");
  const RngStream split = root.derive("split");
  for (std::size_t i = 0; i < envs.size(); ++i) {
    auto [train, val] = holdout_split(envs[i], cfg.validation_fraction, holdout.derive(i));
    data.validation.push_back(std::move(val));
    for (Environment& c : dirichlet_split(train, cfg.split, split.derive(i))) {
      data.clients.push_back(std::move(c));
    }
  }

  int max_label = 0;
  for (const Glyph& g : bank) max_label = std::max(max_label, g.label);
  const RealMatrix& px = bank.front().pixels;
  ModelSpec model{px.rows() * px.cols(), cfg.hidden_dims,
                  static_cast<std::size_t>(max_label) + 1, Activation::kRelu};
  model.validate();
  ParamVector theta = init_params(model, root.derive("init"));
  return {std::move(data), std::move(model), std::move(theta)};
}

RunResult run_experiment(const ExperimentConfig& cfg, std::size_t threads,
                         const RunHooks& hooks) {
  BuiltExperiment built = build_experiment(cfg);
  FederationSetup setup{built.model,        std::move(built.initial_theta),
                        cfg.strategy,       cfg.augmentation,
                        cfg.eval_every_rounds, threads, true};
  return run_federation(built.data, setup, RngStream(cfg.seed, 0).derive("train"), hooks);
}

RunArtifacts render_artifacts(const ExperimentConfig& cfg, const RunResult& result) {
  json records = json::array();
  for (const RoundRecord& r : result.records) records.push_back(to_json(r));
  json doc = {{"config", to_json(cfg, false)},
              {"records", records},
              {"final_lambda", result.final_state.lambda.values()}};
  return {doc.dump(2) + "\n", rounds_csv(result.records),
          heterogeneity_csv(result.records), to_json(cfg, true).dump(2) + "\n"};
}

void write_artifacts(const fs::path& dir, const RunArtifacts& a) {
  fs::create_directories(dir);
  write_file(dir / "results.json", a.results_json);
  write_file(dir / "rounds.csv", a.rounds_csv);
  write_file(dir / "heterogeneity.csv", a.heterogeneity_csv);
  write_file(dir / "resolved-config.json", a.resolved_config_json);
}

int cmd_run(const fs::path& config_path, const RunOptions& opts, std::ostream& out,
            std::ostream& err) {
  ExperimentConfig cfg;
  try {
    cfg = load_experiment(config_path);
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << "\n";
    return kExitConfig;
  }
  if (opts.seed) cfg.seed = *opts.seed;
  if (opts.output_dir) cfg.output_dir = *opts.output_dir;
  try {
    const RunResult result = run_experiment(cfg, opts.threads);
    write_artifacts(cfg.output_dir, render_artifacts(cfg, result));
    const RoundRecord& last = result.records.back();
    out << "wrote " << cfg.output_dir << ": id_accuracy " << format_real(last.id_accuracy)
        << ", ood_accuracy " << format_real(last.ood_accuracy) << "\n";
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::exception& e) {
    err << "runtime error: " << e.what() << "\n";
    return kExitRuntime;
  }
  return kExitOk;
}

int cmd_sweep(const fs::path& sweep_path, const RunOptions& opts, std::ostream& out,
              std::ostream& err) {
  SweepConfig sweep;
  std::vector<SweepPoint> points;
  try {
    sweep = parse_sweep(read_json(sweep_path, "sweep"));
    if (opts.seed) sweep.base.seed = *opts.seed;
    if (opts.output_dir) sweep.output_dir = *opts.output_dir;
    points = expand_sweep(sweep);
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << "\n";
    return kExitConfig;
  }

  std::string summary = "point";
  for (const auto& a : sweep.axes) summary += "," + csv_field(a.path);
  summary +=
      ",rounds_T,local_steps_E,final_id_accuracy,final_ood_accuracy,"
      "grad_sq_norm_mean,grad_sq_norm_std\n";
  std::string failures = "point,error\n";
  std::size_t failed = 0;
  try {
    fs::create_directories(sweep.output_dir);
  } catch (const std::exception& e) {
    err << "runtime error: " << e.what() << "\n";
    return kExitRuntime;
  }

  for (std::size_t p = 0; p < points.size(); ++p) {
    const SweepPoint& point = points[p];
    char name[32];
    std::snprintf(name, sizeof(name), "point-%03zu", p);
    std::string error = point.error;
    if (point.config) {
      ExperimentConfig cfg = *point.config;
      cfg.output_dir = (fs::path(sweep.output_dir) / name).string();
      try {
        const RunResult result = run_experiment(cfg, opts.threads);
        write_artifacts(cfg.output_dir, render_artifacts(cfg, result));
        const RoundRecord& last = result.records.back();
        summary += std::to_string(p);
        for (const json& v : point.axis_values) summary += "," + csv_field(axis_value_text(v));
        summary += "," + std::to_string(cfg.strategy.rounds_T) + "," +
                   std::to_string(cfg.strategy.local_steps_E) + "," +
                   format_real(last.id_accuracy) + "," + format_real(last.ood_accuracy);
        if (last.grad_sq_norms) {
          summary += "," + format_real(last.grad_sq_norms->mean) + "," +
                     format_real(last.grad_sq_norms->std);
        } else {
          summary += ",,";
        }
        summary += "\n";
        out << name << ": ood_accuracy " << format_real(last.ood_accuracy) << "\n";
      } catch (const std::exception& e) {
        error = e.what();
      }
    }
    if (!error.empty()) {
      ++failed;
      failures += std::to_string(p) + "," + csv_field(error) + "\n";
      err << name << " failed: " << error << "\n";
    }
  }

  try {
    write_file(fs::path(sweep.output_dir) / "summary.csv", summary);
    write_file(fs::path(sweep.output_dir) / "failures.csv", failures);
  } catch (const std::exception& e) {
    err << "runtime error: " << e.what() << "\n";
    return kExitRuntime;
  }
  out << (points.size() - failed) << " of " << points.size() << " points succeeded\n";
  return failed == 0 ? kExitOk : kExitPartial;
}

std::vector<LoadedRun> load_runs(const fs::path& dir) {
  std::vector<fs::path> dirs;
  if (fs::exists(dir / "results.json")) {
    dirs.push_back(dir);
  } else if (fs::is_directory(dir)) {
    for (const auto& entry : fs::directory_iterator(dir)) {
      if (entry.is_directory() && fs::exists(entry.path() / "results.json")) {
        dirs.push_back(entry.path());
      }
    }
    std::sort(dirs.begin(), dirs.end());
  }
  if (dirs.empty()) throw ValueError("no results.json under " + dir.string());
  std::vector<LoadedRun> runs;
  for (const fs::path& d : dirs) {
    LoadedRun run;
    run.dir = d;
    try {
      const json doc = json::parse(read_file(d / "results.json"));
      run.config = doc.at("config");
      for (const json& r : doc.at("records")) run.records.push_back(round_record_from_json(r));
    } catch (const json::exception& e) {
      throw ValueError("corrupt " + (d / "results.json").string() + ": " + e.what());
    }
    if (run.records.empty()) {
      throw ValueError("corrupt " + (d / "results.json").string() + ": no records");
    }
    runs.push_back(std::move(run));
  }
  return runs;
}

std::string augmentation_table(const std::vector<LoadedRun>& runs) {
  struct Group {
    std::vector<double> ood, id, sigma_mean, sigma_std;
  };
  std::vector<std::string> order;
  std::map<std::string, Group> groups;
  for (const LoadedRun& run : runs) {
    std::string label;
    try {
      label = augmentation_from_json(run.config.at("augmentation"), "augmentation").describe();
    } catch (const std::exception& e) {
      throw ValueError("corrupt config in " + run.dir.string() + ": " + e.what());
    }
    if (!groups.count(label)) order.push_back(label);
    Group& g = groups[label];
    const RoundRecord& last = run.records.back();
    g.ood.push_back(last.ood_accuracy);
    g.id.push_back(last.id_accuracy);
    if (last.grad_sq_norms) {
      g.sigma_mean.push_back(last.grad_sq_norms->mean);
      g.sigma_std.push_back(last.grad_sq_norms->std);
    }
  }
  std::string out =
      "augmentation,runs,final_ood_accuracy,final_id_accuracy,grad_sq_norm_mean,"
      "grad_sq_norm_std\n";
  for (const std::string& label : order) {
    const Group& g = groups[label];
    out += csv_field(label) + "," + std::to_string(g.ood.size()) + "," +
           format_real(mean_of(g.ood)) + "," + format_real(mean_of(g.id)) + "," +
           optional_real(g.sigma_mean) + "," + optional_real(g.sigma_std) + "\n";
  }
  return out;
}

std::string gap_table(const std::vector<GapPoint>& gaps) {
  std::string out = "round,steps,gap\n";
  for (const GapPoint& g : gaps) {
    out += std::to_string(g.round) + "," + std::to_string(g.steps) + "," +
           format_real(g.gap) + "\n";
  }
  return out;
}

int cmd_analyze(const AnalyzeQuery& q, std::ostream& out, std::ostream& err) {
  try {
    if (q.tv_dirac) {
      out << format_real(tv_analytic(TvQuery::dirac_pair(q.tv_dirac->first,
                                                         q.tv_dirac->second)))
          << "\n";
    }
    if (q.tv_uniform) out << format_real(tv_analytic(*q.tv_uniform)) << "\n";
    if (!q.results_dir) {
      if (q.tv_dirac || q.tv_uniform) return kExitOk;
      err << "config error: analyze needs a results directory or a tv query\n";
      return kExitConfig;
    }
    const std::vector<LoadedRun> runs = load_runs(*q.results_dir);
    const std::string aug = augmentation_table(runs);
    out << aug;
    std::string gap;
    if (q.gap_against) {
      const std::vector<LoadedRun> central = load_runs(*q.gap_against);
      if (runs.size() != 1 || central.size() != 1) {
        throw ValueError("gap table needs exactly one run on each side");
      }
      gap = gap_table(gap_report(runs.front().records, central.front().records));
      out << gap;
    }
    if (q.output_dir) {
      fs::create_directories(*q.output_dir);
      write_file(*q.output_dir / "augmentation.csv", aug);
      if (q.gap_against) write_file(*q.output_dir / "gap.csv", gap);
    }
  } catch (const std::exception& e) {
    err << "runtime error: " << e.what() << "\n";
    return kExitRuntime;
  }
  return kExitOk;
}

}  // namespace fedaug
