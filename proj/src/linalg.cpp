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

#include "fedaug/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "fedaug/error.hpp"

namespace fedaug {

namespace {

void require_same_length(const RealVector& x, const RealVector& y,
                         const char* op) {
  if (x.size() != y.size()) {
    throw DimensionError(std::string(op) + ": length mismatch (" +
                         std::to_string(x.size()) + " vs " +
                         std::to_string(y.size()) + ")");
  }
}

}  // namespace

RealVector::RealVector(std::size_t length, double fill) : data_(length, fill) {
  if (length == 0) throw DimensionError("RealVector: length must be > 0");
  check_finite("RealVector");
}

RealVector::RealVector(std::vector<double> values) : data_(std::move(values)) {
  if (data_.empty()) throw DimensionError("RealVector: length must be > 0");
  check_finite("RealVector");
}

RealVector::RealVector(std::initializer_list<double> values)
    : RealVector(std::vector<double>(values)) {}

void RealVector::check_finite(const char* context) const {
  for (std::size_t i = 0; i < data_.size(); ++i) {
    if (!std::isfinite(data_[i])) {
      throw NumericError(std::string(context) + ": non-finite value at index " +
                         std::to_string(i));
    }
  }
}

RealMatrix::RealMatrix(std::size_t rows, std::size_t cols, double fill)
    : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

RealMatrix::RealMatrix(std::size_t rows, std::size_t cols,
                       std::vector<double> data)
    : rows_(rows), cols_(cols), data_(std::move(data)) {
  if (data_.size() != rows_ * cols_) {
    throw DimensionError("RealMatrix: data length " +
                         std::to_string(data_.size()) + " != rows*cols " +
                         std::to_string(rows_ * cols_));
  }
}

RealMatrix RealMatrix::identity(std::size_t n) {
  RealMatrix m(n, n);
  for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
  return m;
}

RealVector axpy(double alpha, const RealVector& x, const RealVector& y) {
  require_same_length(x, y, "axpy");
  RealVector out = y;
  axpy_inplace(alpha, x.span(), out.span());
  out.check_finite("axpy");
  return out;
}

void axpy_inplace(double alpha, std::span<const double> x,
                  std::span<double> y) {
  const std::size_t n = x.size();
  for (std::size_t i = 0; i < n; ++i) y[i] += alpha * x[i];
}

RealVector scale(double alpha, const RealVector& x) {
  RealVector out = x;
  for (double& v : out.span()) v *= alpha;
  out.check_finite("scale");
  return out;
}

RealVector subtract(const RealVector& x, const RealVector& y) {
  require_same_length(x, y, "subtract");
  RealVector out = x;
  for (std::size_t i = 0; i < out.size(); ++i) out[i] -= y[i];
  out.check_finite("subtract");
  return out;
}

double dot(const RealVector& x, const RealVector& y) {
  require_same_length(x, y, "dot");
  double acc = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) acc += x[i] * y[i];
  return acc;
}

double squared_norm(const RealVector& x) {
  double acc = 0.0;
  for (double v : x) acc += v * v;
  return acc;
}

double max_abs(const RealVector& x) {
  double m = 0.0;
  for (double v : x) m = std::max(m, std::abs(v));
  return m;
}

RealVector matvec(const RealMatrix& a, const RealVector& x) {
  if (a.cols() != x.size()) {
    throw DimensionError("matvec: matrix has " + std::to_string(a.cols()) +
                         " columns, vector has length " +
                         std::to_string(x.size()));
  }
  RealVector out(a.rows());
  for (std::size_t r = 0; r < a.rows(); ++r) {
    double acc = 0.0;
    auto row = a.row(r);
    for (std::size_t c = 0; c < a.cols(); ++c) acc += row[c] * x[c];
    out[r] = acc;
  }
  out.check_finite("matvec");
  return out;
}

}  // namespace fedaug
