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

#include "tpmkit/dense_matrix.h"

#include <cassert>
#include <cmath>

namespace tpmkit {

DenseMatrix DenseMatrix::Identity(int n) {
  DenseMatrix m(n, n);
  for (int i = 0; i < n; ++i) m(i, i) = 1.0;
  return m;
}

DenseMatrix DenseMatrix::FromColumns(const std::vector<Vector>& columns,
                                     int rows) {
  DenseMatrix m(rows, static_cast<int>(columns.size()));
  for (int j = 0; j < m.cols(); ++j) {
    assert(static_cast<int>(columns[j].size()) == rows);
    for (int i = 0; i < rows; ++i) m(i, j) = columns[j][i];
  }
  return m;
}

Vector DenseMatrix::Column(int j) const {
  Vector c(rows_);
  for (int i = 0; i < rows_; ++i) c[i] = (*this)(i, j);
  return c;
}

DenseMatrix DenseMatrix::Transpose() const {
  DenseMatrix t(cols_, rows_);
  for (int i = 0; i < rows_; ++i)
    for (int j = 0; j < cols_; ++j) t(j, i) = (*this)(i, j);
  return t;
}

double DenseMatrix::AsymmetryNorm() const {
  if (rows_ != cols_) return INFINITY;
  double m = 0.0;
  for (int i = 0; i < rows_; ++i)
    for (int j = i + 1; j < cols_; ++j)
      m = std::max(m, std::abs((*this)(i, j) - (*this)(j, i)));
  return m;
}

double DenseMatrix::FrobeniusNorm() const { return Norm2(data_); }

DenseMatrix operator*(const DenseMatrix& a, const DenseMatrix& b) {
  assert(a.cols() == b.rows());
  DenseMatrix c(a.rows(), b.cols());
  for (int i = 0; i < a.rows(); ++i)
    for (int l = 0; l < a.cols(); ++l) {
      const double ail = a(i, l);
      if (ail == 0.0) continue;
      for (int j = 0; j < b.cols(); ++j) c(i, j) += ail * b(l, j);
    }
  return c;
}

DenseMatrix operator-(const DenseMatrix& a, const DenseMatrix& b) {
  assert(a.rows() == b.rows() && a.cols() == b.cols());
  DenseMatrix c = a;
  for (int i = 0; i < a.rows(); ++i)
    for (int j = 0; j < a.cols(); ++j) c(i, j) -= b(i, j);
  return c;
}

Vector operator*(const DenseMatrix& a, std::span<const double> x) {
  assert(static_cast<int>(x.size()) == a.cols());
  Vector y(a.rows());
  for (int i = 0; i < a.rows(); ++i) y[i] = Dot(a.row(i), x);
  return y;
}

}  // namespace tpmkit
