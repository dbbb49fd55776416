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
#include <limits>

#include "doctest.h"
#include "fedaug/error.hpp"
#include "fedaug/linalg.hpp"

using namespace fedaug;

TEST_CASE("vector construction rejects empty and non-finite input") {
  CHECK_THROWS_AS(RealVector(std::size_t{0}), DimensionError);
  CHECK_THROWS_AS(RealVector({1.0, std::nan("")}), NumericError);
  CHECK_THROWS_AS(RealVector({std::numeric_limits<double>::infinity()}), NumericError);
  const RealVector v(3, 2.5);
  CHECK(v.size() == 3);
  CHECK(v[2] == 2.5);
}

TEST_CASE("axpy computes alpha x + y") {
  const RealVector x{1.0, -2.0, 3.0};
  const RealVector y{0.5, 0.5, 0.5};
  const RealVector z = axpy(2.0, x, y);
  CHECK(z == RealVector{2.5, -3.5, 6.5});
}

TEST_CASE("axpy rejects length mismatch and overflow") {
  CHECK_THROWS_AS(axpy(1.0, RealVector{1.0, 2.0}, RealVector{1.0}), DimensionError);
  const RealVector big{1e308};
  CHECK_THROWS_AS(axpy(10.0, big, big), NumericError);
}

TEST_CASE("dot, norms and subtraction") {
  const RealVector a{1.0, 2.0, 3.0};
  const RealVector b{4.0, -5.0, 6.0};
  CHECK(dot(a, b) == doctest::Approx(12.0));
  CHECK(squared_norm(a) == doctest::Approx(14.0));
  CHECK(max_abs(b) == 6.0);
  CHECK(subtract(b, a) == RealVector{3.0, -7.0, 3.0});
  CHECK(scale(-1.0, a) == RealVector{-1.0, -2.0, -3.0});
  CHECK_THROWS_AS(dot(a, RealVector{1.0}), DimensionError);
}

TEST_CASE("matvec against a hand-computed product") {
  const RealMatrix m(2, 3, std::vector<double>{1, 2, 3, 4, 5, 6});
  const RealVector y = matvec(m, RealVector{1.0, 0.0, -1.0});
  CHECK(y == RealVector{-2.0, -2.0});
  CHECK_THROWS_AS(matvec(m, RealVector{1.0, 2.0}), DimensionError);
  const RealMatrix id = RealMatrix::identity(3);
  CHECK(matvec(id, RealVector{7.0, 8.0, 9.0}) == RealVector{7.0, 8.0, 9.0});
}

TEST_CASE("matrix storage is row-major") {
  RealMatrix m(2, 2);
  m(1, 0) = 5.0;
  CHECK(m.span()[2] == 5.0);
  CHECK(m.row(1)[0] == 5.0);
  CHECK_THROWS(RealMatrix(2, 2, std::vector<double>{1.0}));
}
