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
#include <vector>

#include "doctest.h"
#include "fedaug/diagnostics.hpp"
#include "fedaug/error.hpp"
#include "oracles.hpp"

using namespace fedaug;

namespace {

std::vector<Environment> small_envs() {
  const auto bank = make_glyph_bank(3, 6, 12, 0.2, RngStream(1, 0));
  return make_environments(bank, {0.0, 30.0}, 60.0, RngStream(1, 1));
}

DensityGrid uniform_grid(double c, double a, double start, double h, std::size_t nodes) {
  // Node i carries the average density of the cell centred on it.
  return {start, h, oracle::uniform_cell_density(c, a, start - 0.5 * h, h, nodes)};
}

}  // namespace

TEST_CASE("heterogeneity is the squared full-batch gradient norm per environment") {
  const auto envs = small_envs();
  const ModelSpec spec{36, {5}, 3};
  const ParamVector theta = init_params(spec, RngStream(2, 0));
  const HeterogeneityReport rep = heterogeneity(envs, theta, spec);
  REQUIRE(rep.per_env_grad_sq_norm.size() == 3);
  std::vector<double> expected;
  for (const Environment& e : envs) {
    expected.push_back(squared_norm(loss_and_grad(spec, theta, to_batch(e.samples)).grad));
  }
  double mean = 0.0;
  for (std::size_t i = 0; i < 3; ++i) {
    CHECK(rep.per_env_grad_sq_norm[i] == doctest::Approx(expected[i]).epsilon(1e-12));
    CHECK(rep.env_ids[i] == i);
    mean += expected[i] / 3.0;
  }
  double ss = 0.0;
  for (double v : expected) ss += (v - mean) * (v - mean);
  CHECK(rep.mean == doctest::Approx(mean));
  CHECK(rep.std == doctest::Approx(std::sqrt(ss / 2.0)));
  CHECK(rep.evaluated_at == "final global model");
}

TEST_CASE("heterogeneity rejects empty input") {
  const ModelSpec spec{36, {5}, 3};
  CHECK_THROWS_AS(heterogeneity({}, zero_params(spec), spec), ValueError);
  std::vector<Environment> envs{Environment{}};
  CHECK_THROWS_AS(heterogeneity(envs, zero_params(spec), spec), ValueError);
}

TEST_CASE("single environment has zero spread") {
  const auto envs = small_envs();
  const ModelSpec spec{36, {5}, 3};
  const HeterogeneityReport rep =
      heterogeneity({envs[0]}, init_params(spec, RngStream(1, 0)), spec);
  CHECK(rep.std == 0.0);
}

TEST_CASE("analytic total variation") {
  CHECK(tv_analytic(TvQuery::dirac_pair(0.0, 15.0)) == 2.0);
  CHECK(tv_analytic(TvQuery::dirac_pair(15.0, 15.0)) == 0.0);
  CHECK(tv_analytic(TvQuery::uniform_pair(0.0, 15.0, 30.0)) == doctest::Approx(0.5));
  // The supports just touch at alpha = (t2 - t1) / 2.
  CHECK(tv_analytic(TvQuery::uniform_pair(0.0, 15.0, 7.5)) == 2.0);
  CHECK(tv_analytic(TvQuery::uniform_pair(0.0, 15.0, 1.0)) == 2.0);
  CHECK(tv_analytic(TvQuery::uniform_pair(10.0, 10.0, 5.0)) == 0.0);
  CHECK_THROWS_AS(tv_analytic(TvQuery::uniform_pair(0.0, 1.0, 0.0)), ValueError);
}

TEST_CASE("analytic total variation is non-increasing in alpha") {
  double prev = 2.0;
  for (double a = 0.5; a < 200.0; a += 0.5) {
    const double tv = tv_analytic(TvQuery::uniform_pair(0.0, 45.0, a));
    CHECK(tv <= prev);
    prev = tv;
  }
}

TEST_CASE("numeric total variation agrees with the closed form") {
  const double h = 0.01;
  for (double a : {5.0, 10.0, 20.0, 40.0}) {
    const double start = -a - 1.0;
    const std::size_t nodes = static_cast<std::size_t>((15.0 + 2.0 * a + 2.0) / h) + 2;
    const DensityGrid p1 = uniform_grid(0.0, a, start, h, nodes);
    const DensityGrid p2 = uniform_grid(15.0, a, start, h, nodes);
    CHECK(tv_numeric(p1, p2) == doctest::Approx(tv_analytic(TvQuery::uniform_pair(0.0, 15.0, a))).epsilon(1e-3));
  }
}

TEST_CASE("numeric total variation input checks") {
  const DensityGrid p{0.0, 0.5, {0.0, 1.0, 1.0, 0.0}};
  const DensityGrid shifted{0.5, 0.5, {0.0, 1.0, 1.0, 0.0}};
  CHECK(tv_numeric(p, p) == 0.0);
  CHECK_THROWS_AS(tv_numeric(p, shifted), DimensionError);
  const DensityGrid heavy{0.0, 0.5, {0.0, 2.0, 2.0, 0.0}};
  CHECK_THROWS_AS(tv_numeric(p, heavy), ValueError);
  const DensityGrid negative{0.0, 0.5, {0.5, 1.5, -0.5, 0.5}};
  CHECK_THROWS_AS(tv_numeric(p, negative), ValueError);
}

TEST_CASE("gap report pairs records at equal step counts") {
  std::vector<RoundRecord> fed(2);
  fed[0].round = 0;
  fed[0].steps = 10;
  fed[0].ood_accuracy = 0.5;
  fed[1].round = 1;
  fed[1].steps = 20;
  fed[1].ood_accuracy = 0.6;
  std::vector<RoundRecord> central(20);
  for (std::size_t i = 0; i < 20; ++i) {
    central[i].round = i;
    central[i].steps = i + 1;
    central[i].ood_accuracy = 0.7;
  }
  const auto gaps = gap_report(fed, central);
  REQUIRE(gaps.size() == 2);
  CHECK(gaps[0].gap == doctest::Approx(0.2));
  CHECK(gaps[1].steps == 20);
  for (const GapPoint& g : gap_report(fed, fed)) CHECK(g.gap == 0.0);
  central.resize(15);
  CHECK_THROWS_AS(gap_report(fed, central), ValueError);
}

TEST_CASE("shortest round-trip number formatting") {
  CHECK(format_real(0.1) == "0.1");
  CHECK(format_real(2.0) == "2");
  CHECK(format_real(-1.5e-300) == "-1.5e-300");
  CHECK(std::stod(format_real(1.0 / 3.0)) == 1.0 / 3.0);
}

TEST_CASE("round records survive a JSON round-trip") {
  RoundRecord r;
  r.round = 3;
  r.steps = 200;
  r.id_accuracy = 0.9;
  r.ood_accuracy = 0.7;
  r.per_client_loss = {0.1, 0.2};
  r.lambda = {0.4, 0.6};
  r.objective = 0.15;
  r.grad_sq_norms = HeterogeneityReport{{0, 1}, {1.0, 2.0}, 1.5, 0.7, "final global model"};
  const RoundRecord back = round_record_from_json(nlohmann::json::parse(to_json(r).dump()));
  CHECK(back.round == 3);
  CHECK(back.steps == 200);
  CHECK(back.lambda == r.lambda);
  REQUIRE(back.grad_sq_norms.has_value());
  CHECK(back.grad_sq_norms->per_env_grad_sq_norm == r.grad_sq_norms->per_env_grad_sq_norm);
  r.grad_sq_norms.reset();
  CHECK_FALSE(round_record_from_json(to_json(r)).grad_sq_norms.has_value());
}

TEST_CASE("long-format CSV layout") {
  RoundRecord r;
  r.round = 0;
  r.steps = 5;
  r.id_accuracy = 1.0;
  r.ood_accuracy = 0.5;
  r.per_client_loss = {0.25};
  r.lambda = {1.0};
  r.objective = 0.125;
  const std::string csv = rounds_csv({r});
  CHECK(csv ==
        "round,env_id,metric,value\n"
        "0,-1,steps,5\n"
        "0,-1,id_accuracy,1\n"
        "0,-1,ood_accuracy,0.5\n"
        "0,-1,objective,0.125\n"
        "0,0,client_loss,0.25\n"
        "0,0,lambda,1\n");
  CHECK(heterogeneity_csv({r}) == "round,env_id,metric,value\n");
  r.grad_sq_norms = HeterogeneityReport{{0, 5}, {1.0, 3.0}, 2.0, 1.5, "x"};
  CHECK(heterogeneity_csv({r}) ==
        "round,env_id,metric,value\n"
        "0,0,grad_sq_norm,1\n"
        "0,5,grad_sq_norm,3\n"
        "0,-1,grad_sq_norm_mean,2\n"
        "0,-1,grad_sq_norm_std,1.5\n");
}
