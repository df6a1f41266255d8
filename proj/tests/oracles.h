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

// Reference implementations used only by tests. They are written from the
// definitions with plain loops (or Eigen / Boost) and share no kernels with
// the library.

#ifndef TPMKIT_TESTS_ORACLES_H_
#define TPMKIT_TESTS_ORACLES_H_

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

#include <Eigen/Dense>

#include "tpmkit/dense_matrix.h"
#include "tpmkit/symmetric_tensor.h"
#include "tpmkit/vector_ops.h"

namespace tpmkit::oracle {

// Full d^3 array, row-major.
struct Dense3 {
  int d = 0;
  std::vector<double> a;

  explicit Dense3(int dim)
      : d(dim), a(static_cast<size_t>(dim) * dim * dim, 0.0) {}
  double& at(int i, int j, int k) {
    return a[(static_cast<size_t>(i) * d + j) * d + k];
  }
  double at(int i, int j, int k) const {
    return a[(static_cast<size_t>(i) * d + j) * d + k];
  }
};

inline Dense3 ToDense(const SymmetricTensor3& t) {
  Dense3 out(t.dim());
  for (int i = 0; i < t.dim(); ++i)
    for (int j = 0; j < t.dim(); ++j)
      for (int k = 0; k < t.dim(); ++k) out.at(i, j, k) = t(i, j, k);
  return out;
}

// sum_i lambda_i v_i (x) v_i (x) v_i, entry by entry.
inline Dense3 RankOneSum(int d, const std::vector<double>& lambdas,
                         const std::vector<Vector>& vs) {
  Dense3 out(d);
  for (size_t c = 0; c < vs.size(); ++c)
    for (int i = 0; i < d; ++i)
      for (int j = 0; j < d; ++j)
        for (int k = 0; k < d; ++k)
          out.at(i, j, k) += lambdas[c] * vs[c][i] * vs[c][j] * vs[c][k];
  return out;
}

// T(I, u, u)_i = sum_{j,k} T_ijk u_j u_k.
inline Vector ContractVector(const Dense3& t, const Vector& u) {
  Vector out(t.d, 0.0);
  for (int i = 0; i < t.d; ++i)
    for (int j = 0; j < t.d; ++j)
      for (int k = 0; k < t.d; ++k) out[i] += t.at(i, j, k) * u[j] * u[k];
  return out;
}

// T(u, u, u) = sum_{i,j,k} T_ijk u_i u_j u_k.
inline double ContractScalar(const Dense3& t, const Vector& u) {
  double s = 0.0;
  for (int i = 0; i < t.d; ++i)
    for (int j = 0; j < t.d; ++j)
      for (int k = 0; k < t.d; ++k) s += t.at(i, j, k) * u[i] * u[j] * u[k];
  return s;
}

// Averages the six index permutations of every entry.
inline Dense3 SymmetrizeByAverage(const Dense3& raw) {
  Dense3 out(raw.d);
  for (int i = 0; i < raw.d; ++i)
    for (int j = 0; j < raw.d; ++j)
      for (int k = 0; k < raw.d; ++k)
        out.at(i, j, k) = (raw.at(i, j, k) + raw.at(i, k, j) + raw.at(j, i, k) +
                           raw.at(j, k, i) + raw.at(k, i, j) + raw.at(k, j, i)) /
                          6.0;
  return out;
}

inline SymmetricTensor3 FromDense(const Dense3& t) {
  std::vector<double> unique;
  SymmetricTensor3::ForEachUniqueTriple(
      t.d, [&](int i, int j, int k) { unique.push_back(t.at(i, j, k)); });
  return *SymmetricTensor3::FromUniqueEntries(t.d, unique);
}

// Symmetric tensor with N(0, 1) raw entries averaged over permutations, drawn
// with the standard library generator.
inline SymmetricTensor3 RandomSymmetric(int d, std::mt19937_64& gen) {
  std::normal_distribution<double> normal;
  Dense3 raw(d);
  for (double& x : raw.a) x = normal(gen);
  return FromDense(SymmetrizeByAverage(raw));
}

inline Vector RandomUnit(int d, std::mt19937_64& gen) {
  std::normal_distribution<double> normal;
  Vector v(d);
  double s = 0.0;
  for (double& x : v) {
    x = normal(gen);
    s += x * x;
  }
  for (double& x : v) x /= std::sqrt(s);
  return v;
}

// k orthonormal vectors in R^d from a Householder QR of a Gaussian matrix.
inline std::vector<Vector> RandomOrthonormal(int d, int k,
                                             std::mt19937_64& gen) {
  std::normal_distribution<double> normal;
  Eigen::MatrixXd g(d, k);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < k; ++j) g(i, j) = normal(gen);
  const Eigen::MatrixXd q =
      Eigen::HouseholderQR<Eigen::MatrixXd>(g).householderQ() *
      Eigen::MatrixXd::Identity(d, k);
  std::vector<Vector> out(k, Vector(d));
  for (int j = 0; j < k; ++j)
    for (int i = 0; i < d; ++i) out[j][i] = q(i, j);
  return out;
}

inline Eigen::MatrixXd ToEigen(const DenseMatrix& m) {
  Eigen::MatrixXd out(m.rows(), m.cols());
  for (int i = 0; i < m.rows(); ++i)
    for (int j = 0; j < m.cols(); ++j) out(i, j) = m(i, j);
  return out;
}

inline DenseMatrix FromEigen(const Eigen::MatrixXd& m) {
  DenseMatrix out(static_cast<int>(m.rows()), static_cast<int>(m.cols()));
  for (int i = 0; i < out.rows(); ++i)
    for (int j = 0; j < out.cols(); ++j) out(i, j) = m(i, j);
  return out;
}

inline double MaxAbsDiff(const Vector& a, const Vector& b) {
  double m = 0.0;
  for (size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

}  // namespace tpmkit::oracle

#endif  // TPMKIT_TESTS_ORACLES_H_
