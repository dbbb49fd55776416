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

#include <sys/wait.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "doctest.h"
#include "json.hpp"

#include "fedaug/experiment.hpp"

namespace fs = std::filesystem;
using fedaug::ExperimentConfig;
using nlohmann::json;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / "fedaug_cli_test" / name;
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

void dump(const fs::path& p, const json& j) {
  std::ofstream(p) << j.dump(2);
}

// Small enough to run in well under a second.
json tiny_config(const fs::path& out) {
  return {{"seed", 4},
          {"dataset", {{"num_classes", 3}, {"side", 10}, {"samples_per_class", 40}}},
          {"angles_deg", {0, 30, 60}},
          {"ood_angle_deg", 90},
          {"augmentation", {{"kind", "random_rotation"}, {"alpha_deg", 30}}},
          {"strategy", {{"kind", "fedavg"}, {"rounds_T", 3}, {"local_steps_E", 4}}},
          {"model", {{"hidden_dims", {8}}}},
          {"output_dir", out.string()}};
}

struct Shell {
  int status = 0;
  std::string out;
};

Shell shell(const std::string& args) {
  Shell r;
  const std::string cmd = std::string(FEDAUG_BIN) + " " + args + " 2>&1";
  FILE* pipe = popen(cmd.c_str(), "r");
  REQUIRE(pipe != nullptr);
  char buf[512];
  while (fgets(buf, sizeof(buf), pipe)) r.out += buf;
  const int status = pclose(pipe);
  r.status = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

}  // namespace

TEST_CASE("shipped configs parse and validate") {
  for (const char* name : {"fedavg_rot45.json", "fedavg_none.json", "gen_afl.json"}) {
    CAPTURE(name);
    const ExperimentConfig c = fedaug::load_experiment(fs::path(FEDAUG_CONFIG_DIR) / name);
    CHECK_NOTHROW(c.validate());
  }
  std::ifstream in(fs::path(FEDAUG_CONFIG_DIR) / "local_steps_sweep.json");
  const fedaug::SweepConfig sweep = fedaug::parse_sweep(json::parse(in));
  const auto points = fedaug::expand_sweep(sweep);
  REQUIRE(points.size() == 3);
  for (const auto& p : points) {
    REQUIRE(p.config);
    CHECK(p.config->strategy.rounds_T * p.config->strategy.local_steps_E == 2000);
  }
}

TEST_CASE("lambda_min above 1/n is a config error naming the field") {
  const fs::path dir = scratch("lambda");
  json cfg = tiny_config(dir / "out");
  cfg["strategy"]["kind"] = "gen_afl";
  cfg["strategy"]["lambda_min"] = 0.9;
  dump(dir / "c.json", cfg);
  const Shell r = shell("run --config " + (dir / "c.json").string());
  CHECK(r.status == fedaug::kExitConfig);
  CHECK(r.out.find("strategy.lambda_min") != std::string::npos);
  CHECK(r.out.find("lambda_min must be < 1/n (lambda_min = 0.9, n = 3)") != std::string::npos);
  CHECK_FALSE(fs::exists(dir / "out"));
}

TEST_CASE("unknown fields are rejected with their path") {
  const fs::path dir = scratch("unknown");
  json cfg = tiny_config(dir / "out");
  cfg["strategy"]["rounds"] = 3;
  dump(dir / "c.json", cfg);
  std::ostringstream out, err;
  CHECK(fedaug::cmd_run(dir / "c.json", {}, out, err) == fedaug::kExitConfig);
  CHECK(err.str().find("strategy.rounds") != std::string::npos);
}

TEST_CASE("missing config file is a config error") {
  std::ostringstream out, err;
  CHECK(fedaug::cmd_run("/nonexistent/c.json", {}, out, err) == fedaug::kExitConfig);
}

TEST_CASE("rerun and resolved-config rerun are byte-identical") {
  const fs::path dir = scratch("rerun");
  dump(dir / "c.json", tiny_config(dir / "a"));
  std::ostringstream out, err;
  REQUIRE(fedaug::cmd_run(dir / "c.json", {}, out, err) == fedaug::kExitOk);
  fedaug::RunOptions opts;
  opts.output_dir = (dir / "b").string();
  opts.threads = 3;
  REQUIRE(fedaug::cmd_run(dir / "c.json", opts, out, err) == fedaug::kExitOk);
  fedaug::RunOptions again;
  again.output_dir = (dir / "c").string();
  REQUIRE(fedaug::cmd_run(dir / "a" / "resolved-config.json", again, out, err) == fedaug::kExitOk);
  for (const char* name : {"results.json", "rounds.csv", "heterogeneity.csv"}) {
    CAPTURE(name);
    const std::string a = slurp(dir / "a" / name);
    CHECK_FALSE(a.empty());
    CHECK(a == slurp(dir / "b" / name));
    CHECK(a == slurp(dir / "c" / name));
  }
  const ExperimentConfig resolved = fedaug::load_experiment(dir / "a" / "resolved-config.json");
  CHECK(fedaug::to_json(resolved) == fedaug::to_json(fedaug::load_experiment(dir / "c.json")));
}

TEST_CASE("seed override changes results") {
  const fs::path dir = scratch("seed");
  dump(dir / "c.json", tiny_config(dir / "a"));
  std::ostringstream out, err;
  REQUIRE(fedaug::cmd_run(dir / "c.json", {}, out, err) == fedaug::kExitOk);
  fedaug::RunOptions opts;
  opts.seed = 5;
  opts.output_dir = (dir / "b").string();
  REQUIRE(fedaug::cmd_run(dir / "c.json", opts, out, err) == fedaug::kExitOk);
  CHECK(slurp(dir / "a" / "results.json") != slurp(dir / "b" / "results.json"));
}

TEST_CASE("sweep with a fixed budget writes one row per point") {
  const fs::path dir = scratch("sweep");
  const json sweep = {{"base", tiny_config(dir / "unused")},
                      {"axes", {{{"path", "strategy.local_steps_E"}, {"values", {2, 4, 6}}}}},
                      {"fixed_budget", 12},
                      {"output_dir", (dir / "s").string()}};
  dump(dir / "s.json", sweep);
  std::ostringstream out, err;
  REQUIRE(fedaug::cmd_sweep(dir / "s.json", {}, out, err) == fedaug::kExitOk);
  std::istringstream summary(slurp(dir / "s" / "summary.csv"));
  std::string line;
  std::getline(summary, line);
  CHECK(line ==
        "point,strategy.local_steps_E,rounds_T,local_steps_E,final_id_accuracy,"
        "final_ood_accuracy,grad_sq_norm_mean,grad_sq_norm_std");
  int rows = 0;
  const char* expect[] = {"0,2,6,2,", "1,4,3,4,", "2,6,2,6,"};
  while (std::getline(summary, line)) {
    REQUIRE(rows < 3);
    CHECK(line.rfind(expect[rows], 0) == 0);
    ++rows;
  }
  CHECK(rows == 3);
  CHECK(fs::exists(dir / "s" / "point-000" / "results.json"));
}

TEST_CASE("sweep point that fails validation yields partial exit code") {
  const fs::path dir = scratch("sweep_partial");
  const json sweep = {{"base", tiny_config(dir / "unused")},
                      {"axes", {{{"path", "strategy.local_steps_E"}, {"values", {4, 5}}}}},
                      {"fixed_budget", 12},
                      {"output_dir", (dir / "s").string()}};
  dump(dir / "s.json", sweep);
  std::ostringstream out, err;
  CHECK(fedaug::cmd_sweep(dir / "s.json", {}, out, err) == fedaug::kExitPartial);
  const std::string failures = slurp(dir / "s" / "failures.csv");
  CHECK(failures.rfind("point,error\n1,", 0) == 0);
}

TEST_CASE("sweep with empty axes is a config error") {
  const fs::path dir = scratch("sweep_empty");
  dump(dir / "s.json", {{"base", tiny_config(dir / "unused")}, {"axes", json::array()}});
  std::ostringstream out, err;
  CHECK(fedaug::cmd_sweep(dir / "s.json", {}, out, err) == fedaug::kExitConfig);
  CHECK(err.str().find("axes") != std::string::npos);
}

TEST_CASE("sweep with an unknown axis path is a config error") {
  const fs::path dir = scratch("sweep_path");
  dump(dir / "s.json", {{"base", tiny_config(dir / "unused")},
                        {"axes", {{{"path", "strategy.nope"}, {"values", {1}}}}}});
  std::ostringstream out, err;
  CHECK(fedaug::cmd_sweep(dir / "s.json", {}, out, err) == fedaug::kExitConfig);
  CHECK(err.str().find("axes[0].path") != std::string::npos);
}

TEST_CASE("analyze answers tv queries from the command line") {
  const Shell u = shell("analyze --tv-uniform 0 15 30");
  CHECK(u.status == 0);
  CHECK(u.out == "0.5\n");
  const Shell d = shell("analyze --tv-dirac 0 15");
  CHECK(d.status == 0);
  CHECK(d.out == "2\n");
  const Shell bad = shell("analyze --tv-dirac 0");
  CHECK(bad.status == fedaug::kExitConfig);
}

TEST_CASE("analyze gap of a run against itself is zero") {
  const fs::path dir = scratch("analyze");
  dump(dir / "c.json", tiny_config(dir / "a"));
  std::ostringstream out, err;
  REQUIRE(fedaug::cmd_run(dir / "c.json", {}, out, err) == fedaug::kExitOk);
  fedaug::AnalyzeQuery q;
  q.results_dir = dir / "a";
  q.gap_against = dir / "a";
  q.output_dir = dir / "report";
  std::ostringstream aout;
  REQUIRE(fedaug::cmd_analyze(q, aout, err) == fedaug::kExitOk);
  CHECK(slurp(dir / "report" / "gap.csv") == "round,steps,gap\n0,4,0\n1,8,0\n2,12,0\n");
  const std::string aug = slurp(dir / "report" / "augmentation.csv");
  CHECK(aug.rfind("augmentation,runs,final_ood_accuracy,final_id_accuracy,grad_sq_norm_mean,"
                  "grad_sq_norm_std\n",
                  0) == 0);
  CHECK(aug.find("\nrotation(30),1,") != std::string::npos);
}

TEST_CASE("analyze on a missing directory is a runtime error") {
  fedaug::AnalyzeQuery q;
  q.results_dir = "/nonexistent/results";
  std::ostringstream out, err;
  CHECK(fedaug::cmd_analyze(q, out, err) == fedaug::kExitRuntime);
}
