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

#ifndef FEDAUG_SIMPLEX_HPP_
#define FEDAUG_SIMPLEX_HPP_

#include "fedaug/linalg.hpp"

namespace fedaug {

// Client weights. After a projection onto {sum = 1, lambda >= lambda_min}
// the constraints hold to 1e-12.
using WeightVector = RealVector;

// Euclidean projection onto the probability simplex {sum = 1, lambda >= 0}.
//
// Sort descending (ties by original index), take the largest k with
// u_k - (sum_{j<=k} u_j - 1) / k > 0, and clip v - tau at zero where tau is
// that running average.
WeightVector project_simplex(const RealVector& v);

// Euclidean projection onto {sum = 1, lambda >= lambda_min}, reduced to the
// plain simplex by the affine map lambda = (1 - n lambda_min) t + lambda_min.
// Requires lambda_min < 1/n; throws ValueError otherwise.
WeightVector project_generalized(const RealVector& v, double lambda_min);

}  // namespace fedaug

#endif  // FEDAUG_SIMPLEX_HPP_
