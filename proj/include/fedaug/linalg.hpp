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

#ifndef FEDAUG_LINALG_HPP_
#define FEDAUG_LINALG_HPP_

#include <cstddef>
#include <initializer_list>
#include <span>
#include <vector>

namespace fedaug {

// Dense vector of doubles. Never empty, never holds NaN/Inf once a public
// operation has returned.
class RealVector {
 public:
  explicit RealVector(std::size_t length, double fill = 0.0);
  explicit RealVector(std::vector<double> values);
  RealVector(std::initializer_list<double> values);

  std::size_t size() const { return data_.size(); }
  double operator[](std::size_t i) const { return data_[i]; }
  double& operator[](std::size_t i) { return data_[i]; }

  std::span<const double> span() const { return data_; }
  std::span<double> span() { return data_; }
  const std::vector<double>& values() const { return data_; }

  auto begin() const { return data_.begin(); }
  auto end() const { return data_.end(); }

  // Throws NumericError if any element is NaN or infinite.
  void check_finite(const char* context) const;

  friend bool operator==(const RealVector&, const RealVector&) = default;

 private:
  std::vector<double> data_;
};

// Row-major dense matrix.
class RealMatrix {
 public:
  RealMatrix(std::size_t rows, std::size_t cols, double fill = 0.0);
  RealMatrix(std::size_t rows, std::size_t cols, std::vector<double> data);

  static RealMatrix identity(std::size_t n);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }

  double operator()(std::size_t r, std::size_t c) const {
    return data_[r * cols_ + c];
  }
  double& operator()(std::size_t r, std::size_t c) {
    return data_[r * cols_ + c];
  }

  std::span<const double> row(std::size_t r) const {
    return {data_.data() + r * cols_, cols_};
  }
  std::span<double> row(std::size_t r) { return {data_.data() + r * cols_, cols_}; }

  std::span<const double> span() const { return data_; }
  std::span<double> span() { return data_; }

  friend bool operator==(const RealMatrix&, const RealMatrix&) = default;

 private:
  std::size_t rows_;
  std::size_t cols_;
  std::vector<double> data_;
};

// alpha * x + y.
RealVector axpy(double alpha, const RealVector& x, const RealVector& y);

// In-place y += alpha * x; for hot loops that already own `y`.
void axpy_inplace(double alpha, std::span<const double> x, std::span<double> y);

RealVector scale(double alpha, const RealVector& x);
RealVector subtract(const RealVector& x, const RealVector& y);

double dot(const RealVector& x, const RealVector& y);
double squared_norm(const RealVector& x);
double max_abs(const RealVector& x);

RealVector matvec(const RealMatrix& a, const RealVector& x);

}  // namespace fedaug

#endif  // FEDAUG_LINALG_HPP_
