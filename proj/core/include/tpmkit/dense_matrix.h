//
// Copyright 2026 The tpmkit Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
//

#ifndef TPMKIT_DENSE_MATRIX_H_
#define TPMKIT_DENSE_MATRIX_H_

#include <cstddef>
#include <span>
#include <vector>

#include "tpmkit/vector_ops.h"

namespace tpmkit {

// Row-major rows x cols matrix of doubles.
class DenseMatrix {
 public:
  DenseMatrix() = default;
  DenseMatrix(int rows, int cols)
      : rows_(rows), cols_(cols),
        data_(static_cast<size_t>(rows) * static_cast<size_t>(cols), 0.0) {}

  static DenseMatrix Identity(int n);

  // Matrix whose columns are the given equal-length vectors.
  static DenseMatrix FromColumns(const std::vector<Vector>& columns, int rows);

  int rows() const { return rows_; }
  int cols() const { return cols_; }

  double& operator()(int i, int j) {
    return data_[static_cast<size_t>(i) * cols_ + j];
  }
  double operator()(int i, int j) const {
    return data_[static_cast<size_t>(i) * cols_ + j];
  }

  std::span<double> row(int i) {
    return {data_.data() + static_cast<size_t>(i) * cols_,
            static_cast<size_t>(cols_)};
  }
  std::span<const double> row(int i) const {
    return {data_.data() + static_cast<size_t>(i) * cols_,
            static_cast<size_t>(cols_)};
  }

  Vector Column(int j) const;

  DenseMatrix Transpose() const;

  // Largest |a_ij - a_ji|; 0 for symmetric matrices.
  double AsymmetryNorm() const;

  double FrobeniusNorm() const;

 private:
  int rows_ = 0;
  int cols_ = 0;
  std::vector<double> data_;
};

DenseMatrix operator*(const DenseMatrix& a, const DenseMatrix& b);
DenseMatrix operator-(const DenseMatrix& a, const DenseMatrix& b);
Vector operator*(const DenseMatrix& a, std::span<const double> x);

}  // namespace tpmkit

#endif  // TPMKIT_DENSE_MATRIX_H_
