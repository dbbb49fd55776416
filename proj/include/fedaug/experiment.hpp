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

#ifndef FEDAUG_EXPERIMENT_HPP_
#define FEDAUG_EXPERIMENT_HPP_

#include <cstdint>
#include <filesystem>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "fedaug/data.hpp"
#include "fedaug/federation.hpp"
#include "json.hpp"

namespace fedaug {

struct DatasetConfig {
  enum class Kind { kSynthetic, kIdx };
  Kind kind = Kind::kSynthetic;
  // synthetic
  std::size_t num_classes = 10;
  std::size_t side = 16;
  std::size_t samples_per_class = 300;
  double noise_std = 0.15;
  // idx
  std::string images_path;
  std::string labels_path;
  std::size_t max_samples = 0;  // 0 keeps every sample
};

struct ExperimentConfig {
  std::uint64_t seed = 0;
  DatasetConfig dataset;
  std::vector<double> angles_deg{0.0, 15.0, 30.0, 45.0, 60.0};
  double ood_angle_deg = 75.0;
  double validation_fraction = 0.1;
  SplitSpec split;
  AugmentationSpec augmentation;
  StrategyConfig strategy;
  std::vector<std::size_t> hidden_dims{64};
  std::size_t eval_every_rounds = 1;
  std::string output_dir = "out";

  // Field-level checks that do not need the data.
  void validate() const;
};

// Strict parse: unknown or mistyped fields throw ConfigError naming the
// dotted field path. Missing fields take their defaults.
ExperimentConfig parse_experiment(const nlohmann::json& doc);
ExperimentConfig load_experiment(const std::filesystem::path& path);

// Every field, defaults included. output_dir is left out when asked, so the
// document can be embedded in results without depending on where they live.
nlohmann::json to_json(const ExperimentConfig& cfg, bool with_output_dir = true);

nlohmann::json augmentation_to_json(const AugmentationSpec& spec);
AugmentationSpec augmentation_from_json(const nlohmann::json& doc,
                                        const std::string& path);

struct BuiltExperiment {
  FederatedData data;
  ModelSpec model;
  ParamVector initial_theta;
};

// bank -> environments -> validation holdout -> Dirichlet clients, and the
// initial model, all from streams derived from the config seed.
BuiltExperiment build_experiment(const ExperimentConfig& cfg);

RunResult run_experiment(const ExperimentConfig& cfg, std::size_t threads = 1,
                         const RunHooks& hooks = {});

struct RunArtifacts {
  std::string results_json;
  std::string rounds_csv;
  std::string heterogeneity_csv;
  std::string resolved_config_json;
};

RunArtifacts render_artifacts(const ExperimentConfig& cfg, const RunResult& result);
void write_artifacts(const std::filesystem::path& dir, const RunArtifacts& artifacts);

struct SweepAxis {
  std::string path;  // dotted path into the experiment config
  std::vector<nlohmann::json> values;
};

struct SweepConfig {
  ExperimentConfig base;
  std::vector<SweepAxis> axes;
  // When set, every point runs rounds_T = fixed_budget / local_steps_E.
  std::optional<std::size_t> fixed_budget;
  std::size_t max_points = 256;
  std::string output_dir = "sweep";
};

SweepConfig parse_sweep(const nlohmann::json& doc);

// One grid point. `config` is empty when the point's values do not form a
// valid experiment; `error` then says why.
struct SweepPoint {
  std::vector<nlohmann::json> axis_values;
  std::optional<ExperimentConfig> config;
  std::string error;
};

// Every grid point in row-major axis order (last axis fastest). Throws
// ConfigError on unknown paths or a grid larger than max_points.
std::vector<SweepPoint> expand_sweep(const SweepConfig& sweep);

// Process exit codes.
inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitRuntime = 3;
inline constexpr int kExitPartial = 4;

struct RunOptions {
  std::optional<std::uint64_t> seed;
  std::optional<std::string> output_dir;
  std::size_t threads = 1;
};

int cmd_run(const std::filesystem::path& config_path, const RunOptions& opts,
            std::ostream& out, std::ostream& err);
int cmd_sweep(const std::filesystem::path& sweep_path, const RunOptions& opts,
              std::ostream& out, std::ostream& err);

struct AnalyzeQuery {
  std::optional<std::filesystem::path> results_dir;
  std::optional<std::filesystem::path> gap_against;  // centralized results
  std::optional<std::pair<double, double>> tv_dirac;
  std::optional<TvQuery> tv_uniform;
  std::optional<std::filesystem::path> output_dir;
};

// One finished run loaded back from results.json.
struct LoadedRun {
  std::filesystem::path dir;
  nlohmann::json config;
  std::vector<RoundRecord> records;
};

// results.json in `dir` itself, else in its immediate subdirectories
// (sorted by name). Throws ValueError when none exist or one is corrupt.
std::vector<LoadedRun> load_runs(const std::filesystem::path& dir);

// Header "augmentation,runs,final_ood_accuracy,final_id_accuracy,
// grad_sq_norm_mean,grad_sq_norm_std"; one row per augmentation, averaged
// over runs, in order of first appearance.
std::string augmentation_table(const std::vector<LoadedRun>& runs);
// Header "round,steps,gap".
std::string gap_table(const std::vector<GapPoint>& gaps);

int cmd_analyze(const AnalyzeQuery& query, std::ostream& out, std::ostream& err);

}  // namespace fedaug

#endif  // FEDAUG_EXPERIMENT_HPP_
