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

#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "fedaug/experiment.hpp"

int main(int argc, char** argv) {
  CLI::App app{"fedaug: federated domain generalization simulator"};
  app.require_subcommand(1);

  std::string config;
  std::string out_dir;
  std::optional<std::uint64_t> seed;
  std::size_t threads = 1;

  auto add_common = [&](CLI::App* cmd) {
    cmd->add_option("--config", config, "JSON config file")->required();
    cmd->add_option("--out", out_dir, "output directory (overrides output_dir)");
    cmd->add_option("--seed", seed, "seed (overrides the config)");
    cmd->add_option("--threads", threads, "worker threads; never changes results")
        ->check(CLI::PositiveNumber);
  };
  CLI::App* run = app.add_subcommand("run", "run one experiment");
  add_common(run);
  CLI::App* sweep = app.add_subcommand("sweep", "run a grid of experiments");
  add_common(sweep);

  CLI::App* analyze = app.add_subcommand("analyze", "derived tables and tv queries");
  std::string results_dir;
  std::string gap_against;
  std::string analyze_out;
  std::vector<double> tv_dirac;
  std::vector<double> tv_uniform;
  analyze->add_option("results", results_dir, "directory from run or sweep");
  analyze->add_option("--gap-against", gap_against,
                      "centralized run directory for the gap table");
  analyze->add_option("--out", analyze_out, "also write tables here");
  analyze->add_option("--tv-dirac", tv_dirac, "t1 t2")->expected(2);
  analyze->add_option("--tv-uniform", tv_uniform, "t1 t2 alpha")->expected(3);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : fedaug::kExitConfig;
  }

  fedaug::RunOptions opts;
  opts.seed = seed;
  if (!out_dir.empty()) opts.output_dir = out_dir;
  opts.threads = threads;

  if (run->parsed()) return fedaug::cmd_run(config, opts, std::cout, std::cerr);
  if (sweep->parsed()) return fedaug::cmd_sweep(config, opts, std::cout, std::cerr);

  fedaug::AnalyzeQuery q;
  if (!results_dir.empty()) q.results_dir = results_dir;
  if (!gap_against.empty()) q.gap_against = gap_against;
  if (!analyze_out.empty()) q.output_dir = analyze_out;
  if (!tv_dirac.empty()) q.tv_dirac = std::make_pair(tv_dirac[0], tv_dirac[1]);
  if (!tv_uniform.empty()) {
    q.tv_uniform = fedaug::TvQuery::uniform_pair(tv_uniform[0], tv_uniform[1], tv_uniform[2]);
  }
  return fedaug::cmd_analyze(q, std::cout, std::cerr);
}
