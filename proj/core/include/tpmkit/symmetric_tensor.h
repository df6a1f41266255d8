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

// Dense symmetric third-order tensors, their multilinear contractions, and
// the spectral containers shared by the decomposition engines.

#ifndef TPMKIT_SYMMETRIC_TENSOR_H_
#define TPMKIT_SYMMETRIC_TENSOR_H_

#include <cstddef>
#include <span>
#include <vector>

#include "absl/status/status.h"
#include "absl/status/statusor.h"
#include "tpmkit/dense_matrix.h"
#include "tpmkit/random.h"
#include "tpmkit/vector_ops.h"

namespace tpmkit {

// A (lambda, v) pair. For ground truth and for algorithm output alike, v is
// unit-norm and lambda is non-negative.
struct EigenPair {
  double value = 0.0;
  Vector vector;
};

// Ordered list of eigenpairs in dimension `dim`. Ground-truth spectra have
// mutually orthogonal vectors; spectra returned by the decomposition engines
// are in extraction order and carry no orthogonality guarantee.
struct Spectrum {
  int dim = 0;
  std::vector<EigenPair> pairs;

  int size() const { return static_cast<int>(pairs.size()); }

  // Checks dimension consistency and unit norms (1e-12), and, when
  // `require_orthogonal`, pairwise |v_i . v_j| <= 1e-10.
  absl::Status Validate(bool require_orthogonal) const;
};

// Already-extracted estimates subtracted lazily during contraction.
using DeflationList = std::vector<EigenPair>;

// Unconstrained d x d x d array, row-major in (i, j, k). Used for raw inputs
// before symmetrization.
class Cube {
 public:
  explicit Cube(int dim) : dim_(dim), data_(Size(dim), 0.0) {}

  int dim() const { return dim_; }
  double& operator()(int i, int j, int k) { return data_[Index(i, j, k)]; }
  double operator()(int i, int j, int k) const { return data_[Index(i, j, k)]; }
  std::span<double> data() { return data_; }
  std::span<const double> data() const { return data_; }

 private:
  static size_t Size(int d) {
    return static_cast<size_t>(d) * static_cast<size_t>(d) *
           static_cast<size_t>(d);
  }
  size_t Index(int i, int j, int k) const {
    return (static_cast<size_t>(i) * dim_ + j) * dim_ + k;
  }

  int dim_;
  std::vector<double> data_;
};

// Dense symmetric tensor: entry (i, j, k) equals the entry at every
// permutation of its indices. All factories establish this exactly; the
// object is immutable afterwards, so instances can be shared across threads.
class SymmetricTensor3 {
 public:
  // Zero tensor of dimension d >= 1.
  static absl::StatusOr<SymmetricTensor3> Zero(int d);

  // Builds from the unique triples i <= j <= k; `values` lists them in the
  // order produced by ForEachUniqueTriple().
  static absl::StatusOr<SymmetricTensor3> FromUniqueEntries(
      int d, std::span<const double> values);

  int dim() const { return dim_; }
  double operator()(int i, int j, int k) const {
    return data_[(static_cast<size_t>(i) * dim_ + j) * dim_ + k];
  }
  std::span<const double> data() const { return data_; }

  double FrobeniusNorm() const;

  SymmetricTensor3 Scaled(double s) const;

  // a * x + b * y for tensors of equal dimension.
  static absl::StatusOr<SymmetricTensor3> LinearCombination(
      double a, const SymmetricTensor3& x, double b, const SymmetricTensor3& y);

  // Unchecked kernels. `u` and `out` must have length dim().
  //   ContractVector: out = T(I, u, u)
  //   ContractScalar: returns T(u, u, u)
  //   ContractVectorAndScalar: both, sharing one pass over the entries.
  void ContractVector(std::span<const double> u, std::span<double> out) const;
  double ContractScalar(std::span<const double> u) const;
  double ContractVectorAndScalar(std::span<const double> u,
                                 std::span<double> out) const;

  // Calls f(i, j, k) for every i <= j <= k in lexicographic order.
  template <typename F>
  static void ForEachUniqueTriple(int d, F&& f) {
    for (int i = 0; i < d; ++i)
      for (int j = i; j < d; ++j)
        for (int k = j; k < d; ++k) f(i, j, k);
  }

 private:
  friend class SymmetricTensorBuilder;
  SymmetricTensor3(int d, std::vector<double> data)
      : dim_(d), data_(std::move(data)) {}

  int dim_;
  std::vector<double> data_;
};

// Accumulates symmetric contributions without exposing a mutable tensor.
// Every Add* call writes all index permutations, so Build() is symmetric.
class SymmetricTensorBuilder {
 public:
  explicit SymmetricTensorBuilder(int d);
  explicit SymmetricTensorBuilder(const SymmetricTensor3& start);

  int dim() const { return dim_; }

  // Adds `value` at (i, j, k) and every distinct permutation of it.
  void AddAtAllPermutations(int i, int j, int k, double value);

  // Adds weight * a (x) b (x) c summed over the six slot permutations,
  // i.e. the permutation-sum symmetrization of the outer product.
  void AddSymmetrizedOuter(double weight, std::span<const double> a,
                           std::span<const double> b,
                           std::span<const double> c);

  // Adds weight * v (x) v (x) v.
  void AddRankOne(double weight, std::span<const double> v);

  SymmetricTensor3 Build() &&;

 private:
  int dim_;
  std::vector<double> data_;
};

// Sum_i lambda_i v_i (x) v_i (x) v_i.
absl::StatusOr<SymmetricTensor3> FromComponents(const Spectrum& spectrum);

// T(I, u, u).
absl::StatusOr<Vector> ContractToVector(const SymmetricTensor3& t,
                                        std::span<const double> u);

// T(u, u, u).
absl::StatusOr<double> ContractToScalar(const SymmetricTensor3& t,
                                        std::span<const double> u);

// The d x d matrix T(I, I, theta).
absl::StatusOr<DenseMatrix> CollapseToMatrix(const SymmetricTensor3& t,
                                             std::span<const double> theta);

// out(i,j,k) = sum over the six slot permutations sigma of raw(sigma(i,j,k)).
absl::StatusOr<SymmetricTensor3> PermSumSymmetrize(const Cube& raw);

// PermSumSymmetrize(raw) / 6; leaves symmetric inputs unchanged.
absl::StatusOr<SymmetricTensor3> PermAvgSymmetrize(const Cube& raw);

// Shifted symmetric higher-order power method. Each restart draws a start
// vector and runs u <- normalize(S(I,u,u) + shift * u) for S = T and S = -T;
// the result is the largest |T(u*,u*,u*)| over all runs, a lower estimate of
// the operator norm.
struct OperatorNormOptions {
  int restarts = 20;
  int max_iterations = 500;
  double tolerance = 1e-10;
  // Shift; a negative value selects the default 1 + ||T||_F.
  double shift = -1.0;
};

struct OperatorNormEstimate {
  double value = 0.0;
  // False if some run exhausted max_iterations before ||u_{t+1} - u_t|| fell
  // below the tolerance. The value is still the best found.
  bool converged = true;
  Vector maximizer;
};

absl::StatusOr<OperatorNormEstimate> EstimateOperatorNorm(
    const SymmetricTensor3& t, const OperatorNormOptions& options, Rng& rng);

// T * (target / EstimateOperatorNorm(T)). target == 0 returns the zero tensor
// without running the estimator.
absl::StatusOr<SymmetricTensor3> RescaleToOperatorNorm(
    const SymmetricTensor3& t, double target,
    const OperatorNormOptions& options, Rng& rng);

struct DeflatedContraction {
  Vector vector;  // (T - D)(I, u, u)
  double scalar;  // (T - D)(u, u, u)
};

// Contracts T - sum_j lambda_j v_j^{(x)3} against u without materializing
// the deflated tensor.
absl::StatusOr<DeflatedContraction> ContractDeflated(
    const SymmetricTensor3& t, const DeflationList& deflation,
    std::span<const double> u);

// Unchecked variant writing into `out`; returns the scalar.
double ContractDeflatedInto(const SymmetricTensor3& t,
                            const DeflationList& deflation,
                            std::span<const double> u, std::span<double> out);

// (d / k) * max_i ||V^T e_i||^2 for a d x k matrix with orthonormal columns.
absl::StatusOr<double> Coherence(const DenseMatrix& v);

// Stacks the spectrum's vectors as the columns of a d x k matrix.
DenseMatrix StackVectors(const Spectrum& spectrum);

}  // namespace tpmkit

#endif  // TPMKIT_SYMMETRIC_TENSOR_H_
