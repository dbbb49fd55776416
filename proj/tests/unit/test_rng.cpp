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
#include <random>
#include <set>
#include <vector>

#include "doctest.h"
#include "fedaug/error.hpp"
#include "fedaug/rng.hpp"

using namespace fedaug;

TEST_CASE("streams are reproducible and copies share position") {
  RngStream a(42, 7);
  RngStream b(42, 7);
  for (int i = 0; i < 100; ++i) CHECK(a.next_u64() == b.next_u64());
  RngStream c = a;
  CHECK(c.next_u64() == a.next_u64());
  CHECK(a.position() == 101);
}

TEST_CASE("different seeds, ids and derived tags give different streams") {
  std::set<std::uint64_t> firsts;
  for (std::uint64_t s = 0; s < 4; ++s) {
    for (std::uint64_t id = 0; id < 4; ++id) firsts.insert(RngStream(s, id).next_u64());
  }
  CHECK(firsts.size() == 16);
  const RngStream root(1, 0);
  CHECK(root.derive("a").next_u64() != root.derive("b").next_u64());
  CHECK(root.derive(std::uint64_t{0}).next_u64() != root.derive(std::uint64_t{1}).next_u64());
  CHECK(root.derive("a") == root.derive("a"));
}

TEST_CASE("derive does not advance the parent") {
  RngStream root(3, 0);
  (void)root.derive("x");
  CHECK(root.position() == 0);
}

TEST_CASE("uniform01 moments over many draws") {
  RngStream r(9, 0);
  const int n = 200000;
  double sum = 0.0;
  double sq = 0.0;
  for (int i = 0; i < n; ++i) {
    const double u = r.uniform01();
    CHECK_MESSAGE((u >= 0.0 && u < 1.0), "u out of range");
    sum += u;
    sq += u * u;
  }
  const double mean = sum / n;
  const double var = sq / n - mean * mean;
  // Standard errors: 1/sqrt(12 n) for the mean.
  CHECK(std::abs(mean - 0.5) < 5.0 / std::sqrt(12.0 * n));
  CHECK(std::abs(var - 1.0 / 12.0) < 2e-3);
}

TEST_CASE("uniform on a degenerate interval and bad bounds") {
  RngStream r(1, 1);
  CHECK(r.uniform(2.0, 2.0) == 2.0);
  CHECK(r.position() == 1);
  CHECK_THROWS_AS(r.uniform(1.0, 0.0), ValueError);
  CHECK_THROWS_AS(rng_uniform(r, 1.0, 0.0), ValueError);
}

TEST_CASE("rng_uniform returns the advanced stream") {
  const RngStream r(5, 5);
  auto [x, next] = rng_uniform(r, -1.0, 1.0);
  CHECK(x >= -1.0);
  CHECK(x < 1.0);
  CHECK(next.position() == r.position() + 1);
  RngStream copy = r;
  CHECK(copy.uniform(-1.0, 1.0) == x);
}

TEST_CASE("uniform_index covers the range evenly") {
  RngStream r(11, 0);
  std::vector<int> counts(7, 0);
  const int n = 70000;
  for (int i = 0; i < n; ++i) ++counts[r.uniform_index(7)];
  for (int c : counts) CHECK(std::abs(c - n / 7) < 5 * std::sqrt(n / 7.0));
}

TEST_CASE("normal draws have the requested moments") {
  RngStream r(2, 2);
  const int n = 100000;
  double sum = 0.0;
  double sq = 0.0;
  for (int i = 0; i < n; ++i) {
    const double z = r.normal(1.0, 2.0);
    sum += z;
    sq += z * z;
  }
  const double mean = sum / n;
  CHECK(std::abs(mean - 1.0) < 5.0 * 2.0 / std::sqrt(n));
  CHECK(std::abs(sq / n - mean * mean - 4.0) < 0.1);
  CHECK(r.position() == 2 * static_cast<std::uint64_t>(n));
}

TEST_CASE("gamma draws have mean equal to the shape") {
  RngStream r(4, 4);
  for (double shape : {0.5, 2.0, 200.0}) {
    const int n = 50000;
    double sum = 0.0;
    for (int i = 0; i < n; ++i) sum += r.gamma(shape);
    CHECK(std::abs(sum / n - shape) < 5.0 * std::sqrt(shape / n));
  }
}

TEST_CASE("works as a standard random bit generator") {
  RngStream r(8, 0);
  std::uniform_int_distribution<int> d(1, 6);
  const int x = d(r);
  CHECK(x >= 1);
  CHECK(x <= 6);
}

TEST_CASE("fnv1a64 matches published test vectors") {
  CHECK(fnv1a64("") == 0xcbf29ce484222325ULL);
  CHECK(fnv1a64("a") == 0xaf63dc4c8601ec8cULL);
  CHECK(fnv1a64("foobar") == 0x85944171f73967e8ULL);
}
