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
#include "fedaug/error.hpp"
#include "fedaug/rng.hpp"
#include "fedaug/simplex.hpp"
#include "oracles.hpp"

using namespace fedaug;

namespace {

double distance(const RealVector& a, const std::vector<double>& b) {
  double d = 0.0;
  for (std::size_t i = 0; i < b.size(); ++i) d += (a[i] - b[i]) * (a[i] - b[i]);
  return std::sqrt(d);
}

double sum_of(const RealVector& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return s;
}

}  // namespace

TEST_CASE("simplex projection of a point already on the simplex") {
  const RealVector v{0.2, 0.3, 0.5};
  const RealVector p = project_simplex(v);
  for (std::size_t i = 0; i < 3; ++i) CHECK(p[i] == doctest::Approx(v[i]).epsilon(1e-15));
}

TEST_CASE("simplex projection of hand-worked inputs") {
  // (0.5, 0.5, 0.5): tau = 1/6, every coordinate becomes 1/3.
  RealVector p = project_simplex(RealVector{0.5, 0.5, 0.5});
  for (double x : p) CHECK(x == doctest::Approx(1.0 / 3.0));
  // (2, 0, 0): only the first coordinate survives.
  p = project_simplex(RealVector{2.0, 0.0, 0.0});
  CHECK(p == RealVector{1.0, 0.0, 0.0});
  // (1, 1): tau = 0.5.
  p = project_simplex(RealVector{1.0, 1.0});
  CHECK(p[0] == doctest::Approx(0.5));
  CHECK(p[1] == doctest::Approx(0.5));
  // (-1, -1, 3): single active coordinate.
  p = project_simplex(RealVector{-1.0, -1.0, 3.0});
  CHECK(p == RealVector{0.0, 0.0, 1.0});
}

TEST_CASE("simplex projection matches the support-enumeration oracle") {
  RngStream rng(17, 0);
  for (int trial = 0; trial < 300; ++trial) {
    const std::size_t n = 1 + rng.uniform_index(5);
    std::vector<double> v(n);
    for (double& x : v) x = rng.uniform(-2.0, 2.0);
    const RealVector p = project_simplex(RealVector(v));
    CHECK(distance(p, oracle::project_bounded_simplex(v, 0.0)) < 1e-12);
    CHECK(std::abs(sum_of(p) - 1.0) < 1e-12);
    for (double x : p) CHECK(x >= 0.0);
  }
}

TEST_CASE("simplex projection is idempotent") {
  RngStream rng(3, 3);
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<double> v(4);
    for (double& x : v) x = rng.uniform(-5.0, 5.0);
    const RealVector p = project_simplex(RealVector(v));
    const RealVector q = project_simplex(p);
    for (std::size_t i = 0; i < 4; ++i) CHECK(std::abs(p[i] - q[i]) < 1e-12);
  }
}

TEST_CASE("generalized projection with lambda_min = 0 equals the plain projection") {
  const RealVector v{0.9, -0.3, 0.7, 0.1};
  CHECK(project_generalized(v, 0.0) == project_simplex(v));
}

TEST_CASE("generalized projection allows negative weights") {
  // (1.5, -0.5) already sums to 1 and respects lambda_min = -1.
  const RealVector p = project_generalized(RealVector{1.5, -0.5}, -1.0);
  CHECK(p[0] == doctest::Approx(1.5));
  CHECK(p[1] == doctest::Approx(-0.5));
  // (3, -3) must be clipped at -1 on the second coordinate.
  const RealVector q = project_generalized(RealVector{3.0, -3.0}, -1.0);
  CHECK(q[0] == doctest::Approx(2.0));
  CHECK(q[1] == doctest::Approx(-1.0));
}

TEST_CASE("generalized projection matches the bounded oracle") {
  RngStream rng(23, 0);
  for (int trial = 0; trial < 300; ++trial) {
    const std::size_t n = 2 + rng.uniform_index(4);
    const double lmin = rng.uniform(-2.0, 1.0 / static_cast<double>(n) - 1e-3);
    std::vector<double> v(n);
    for (double& x : v) x = rng.uniform(-3.0, 3.0);
    const RealVector p = project_generalized(RealVector(v), lmin);
    CHECK(distance(p, oracle::project_bounded_simplex(v, lmin)) < 1e-10);
    CHECK(std::abs(sum_of(p) - 1.0) < 1e-12);
    for (double x : p) CHECK(x >= lmin - 1e-12);
  }
}

TEST_CASE("generalized projection rejects lambda_min at or above 1/n") {
  CHECK_THROWS_AS(project_generalized(RealVector{0.1, 0.2, 0.3}, 1.0 / 3.0), ValueError);
  CHECK_THROWS_AS(project_generalized(RealVector{0.1, 0.2}, 0.9), ValueError);
  CHECK_NOTHROW(project_generalized(RealVector{0.1, 0.2}, 0.5 - 1e-9));
}

TEST_CASE("lambda_min just below 1/n pins the weights to uniform") {
  const double n = 4.0;
  const RealVector p = project_generalized(RealVector{5.0, -2.0, 0.3, 1.0}, 1.0 / n - 1e-12);
  for (double x : p) CHECK(std::abs(x - 0.25) < 1e-10);
}
