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

#include "tpmkit/symmetric_tensor.h"

#include <algorithm>
#include <array>
#include <cmath>
#include <utility>

#include "absl/strings/str_cat.h"

namespace tpmkit {
namespace {

size_t CubeSize(int d) {
  return static_cast<size_t>(d) * static_cast<size_t>(d) *
         static_cast<size_t>(d);
}

// Four independent partial sums so the compiler can pipeline the loop
// without reassociating floating-point adds on its own.
inline double DotUnrolled(const double* a, const double* b, int n) {
  double s0 = 0.0, s1 = 0.0, s2 = 0.0, s3 = 0.0;
  int i = 0;
  for (; i + 4 <= n; i += 4) {
    s0 += a[i] * b[i];
    s1 += a[i + 1] * b[i + 1];
    s2 += a[i + 2] * b[i + 2];
    s3 += a[i + 3] * b[i + 3];
  }
  for (; i < n; ++i) s0 += a[i] * b[i];
  return (s0 + s1) + (s2 + s3);
}

bool AllFinite(std::span<const double> xs) {
  return std::all_of(xs.begin(), xs.end(),
                     [](double x) { return std::isfinite(x); });
}

absl::Status CheckDim(const SymmetricTensor3& t, size_t n, const char* what) {
  if (n != static_cast<size_t>(t.dim())) {
    return absl::InvalidArgumentError(absl::StrCat(
        what, " has length ", n, " but the tensor dimension is ", t.dim()));
  }
  return absl::OkStatus();
}

// Writes `value` to (i,j,k) and all of its distinct permutations.
inline void ScatterAllPermutations(std::vector<double>& data, int d, int i,
                                   int j, int k, double value, bool add) {
  const std::array<std::array<int, 3>, 6> perms = {{{i, j, k},
                                                    {i, k, j},
                                                    {j, i, k},
                                                    {j, k, i},
                                                    {k, i, j},
                                                    {k, j, i}}};
  std::array<size_t, 6> seen{};
  int n_seen = 0;
  for (const auto& p : perms) {
    const size_t idx = (static_cast<size_t>(p[0]) * d + p[1]) * d + p[2];
    if (std::find(seen.begin(), seen.begin() + n_seen, idx) !=
        seen.begin() + n_seen) {
      continue;
    }
    seen[n_seen++] = idx;
    if (add) {
      data[idx] += value;
    } else {
      data[idx] = value;
    }
  }
}

}  // namespace

absl::Status Spectrum::Validate(bool require_orthogonal) const {
  if (dim < 1) return absl::InvalidArgumentError("spectrum dimension < 1");
  for (size_t p = 0; p < pairs.size(); ++p) {
    const EigenPair& e = pairs[p];
    if (static_cast<int>(e.vector.size()) != dim) {
      return absl::InvalidArgumentError(
          absl::StrCat("eigenvector ", p, " has length ", e.vector.size(),
                       ", expected ", dim));
    }
    if (!std::isfinite(e.value) || e.value < 0.0 || !AllFinite(e.vector)) {
      return absl::InvalidArgumentError(
          absl::StrCat("eigenpair ", p, " is not finite and non-negative"));
    }
    if (std::abs(Norm2(e.vector) - 1.0) > 1e-12) {
      return absl::InvalidArgumentError(
          absl::StrCat("eigenvector ", p, " is not unit norm"));
    }
  }
  if (require_orthogonal) {
    for (size_t p = 0; p < pairs.size(); ++p)
      for (size_t q = p + 1; q < pairs.size(); ++q)
        if (std::abs(Dot(pairs[p].vector, pairs[q].vector)) > 1e-10) {
          return absl::InvalidArgumentError(absl::StrCat(
              "eigenvectors ", p, " and ", q, " are not orthogonal"));
        }
  }
  return absl::OkStatus();
}

absl::StatusOr<SymmetricTensor3> SymmetricTensor3::Zero(int d) {
  if (d < 1) return absl::InvalidArgumentError("tensor dimension must be >= 1");
  return SymmetricTensor3(d, std::vector<double>(CubeSize(d), 0.0));
}

absl::StatusOr<SymmetricTensor3> SymmetricTensor3::FromUniqueEntries(
    int d, std::span<const double> values) {
  if (d < 1) return absl::InvalidArgumentError("tensor dimension must be >= 1");
  const size_t expected = static_cast<size_t>(d) * (d + 1) * (d + 2) / 6;
  if (values.size() != expected) {
    return absl::InvalidArgumentError(absl::StrCat(
        "expected ", expected, " unique entries, got ", values.size()));
  }
  if (!AllFinite(values)) {
    return absl::InvalidArgumentError("tensor entries must be finite");
  }
  std::vector<double> data(CubeSize(d), 0.0);
  size_t n = 0;
  ForEachUniqueTriple(d, [&](int i, int j, int k) {
    ScatterAllPermutations(data, d, i, j, k, values[n++], /*add=*/false);
  });
  return SymmetricTensor3(d, std::move(data));
}

double SymmetricTensor3::FrobeniusNorm() const { return Norm2(data_); }

SymmetricTensor3 SymmetricTensor3::Scaled(double s) const {
  std::vector<double> data = data_;
  for (double& x : data) x *= s;
  return SymmetricTensor3(dim_, std::move(data));
}

absl::StatusOr<SymmetricTensor3> SymmetricTensor3::LinearCombination(
    double a, const SymmetricTensor3& x, double b, const SymmetricTensor3& y) {
  if (x.dim() != y.dim()) {
    return absl::InvalidArgumentError(absl::StrCat(
        "dimension mismatch: ", x.dim(), " vs ", y.dim()));
  }
  std::vector<double> data(x.data_.size());
  for (size_t i = 0; i < data.size(); ++i)
    data[i] = a * x.data_[i] + b * y.data_[i];
  return SymmetricTensor3(x.dim(), std::move(data));
}

double SymmetricTensor3::ContractVectorAndScalar(std::span<const double> u,
                                                 std::span<double> out) const {
  const int d = dim_;
  assert(static_cast<int>(u.size()) == d && static_cast<int>(out.size()) == d);
  std::fill(out.begin(), out.end(), 0.0);
  // w_ij = sum_k T_ijk u_k is symmetric in (i, j), so only j >= i is formed.
  for (int i = 0; i < d; ++i) {
    const double* slab = data_.data() + static_cast<size_t>(i) * d * d;
    double acc_i = 0.0;
    for (int j = i; j < d; ++j) {
      const double w = DotUnrolled(slab + static_cast<size_t>(j) * d, u.data(), d);
      if (j == i) {
        acc_i += u[i] * w;
      } else {
        acc_i += u[j] * w;
        out[j] += u[i] * w;
      }
    }
    out[i] += acc_i;
  }
  return DotUnrolled(u.data(), out.data(), d);
}

void SymmetricTensor3::ContractVector(std::span<const double> u,
                                      std::span<double> out) const {
  ContractVectorAndScalar(u, out);
}

double SymmetricTensor3::ContractScalar(std::span<const double> u) const {
  Vector tmp(dim_);
  return ContractVectorAndScalar(u, tmp);
}

SymmetricTensorBuilder::SymmetricTensorBuilder(int d)
    : dim_(d), data_(CubeSize(d), 0.0) {}

SymmetricTensorBuilder::SymmetricTensorBuilder(const SymmetricTensor3& start)
    : dim_(start.dim()), data_(start.data().begin(), start.data().end()) {}

void SymmetricTensorBuilder::AddAtAllPermutations(int i, int j, int k,
                                                  double value) {
  ScatterAllPermutations(data_, dim_, i, j, k, value, /*add=*/true);
}

void SymmetricTensorBuilder::AddSymmetrizedOuter(double weight,
                                                 std::span<const double> a,
                                                 std::span<const double> b,
                                                 std::span<const double> c) {
  SymmetricTensor3::ForEachUniqueTriple(dim_, [&](int i, int j, int k) {
    const double s = a[i] * b[j] * c[k] + a[i] * c[j] * b[k] +
                     b[i] * a[j] * c[k] + b[i] * c[j] * a[k] +
                     c[i] * a[j] * b[k] + c[i] * b[j] * a[k];
    if (s != 0.0) AddAtAllPermutations(i, j, k, weight * s);
  });
}

void SymmetricTensorBuilder::AddRankOne(double weight,
                                        std::span<const double> v) {
  SymmetricTensor3::ForEachUniqueTriple(dim_, [&](int i, int j, int k) {
    const double s = weight * v[i] * v[j] * v[k];
    if (s != 0.0) AddAtAllPermutations(i, j, k, s);
  });
}

SymmetricTensor3 SymmetricTensorBuilder::Build() && {
  return SymmetricTensor3(dim_, std::move(data_));
}

absl::StatusOr<SymmetricTensor3> FromComponents(const Spectrum& spectrum) {
  if (spectrum.dim < 1) {
    return absl::InvalidArgumentError("spectrum dimension must be >= 1");
  }
  for (size_t p = 0; p < spectrum.pairs.size(); ++p) {
    if (static_cast<int>(spectrum.pairs[p].vector.size()) != spectrum.dim) {
      return absl::InvalidArgumentError(absl::StrCat(
          "component ", p, " has length ", spectrum.pairs[p].vector.size(),
          ", expected ", spectrum.dim));
    }
  }
  SymmetricTensorBuilder builder(spectrum.dim);
  for (const EigenPair& e : spectrum.pairs) builder.AddRankOne(e.value, e.vector);
  return std::move(builder).Build();
}

absl::StatusOr<Vector> ContractToVector(const SymmetricTensor3& t,
                                        std::span<const double> u) {
  if (absl::Status s = CheckDim(t, u.size(), "vector"); !s.ok()) return s;
  Vector out(t.dim());
  t.ContractVector(u, out);
  return out;
}

absl::StatusOr<double> ContractToScalar(const SymmetricTensor3& t,
                                        std::span<const double> u) {
  if (absl::Status s = CheckDim(t, u.size(), "vector"); !s.ok()) return s;
  return t.ContractScalar(u);
}

absl::StatusOr<DenseMatrix> CollapseToMatrix(const SymmetricTensor3& t,
                                             std::span<const double> theta) {
  if (absl::Status s = CheckDim(t, theta.size(), "theta"); !s.ok()) return s;
  const int d = t.dim();
  DenseMatrix m(d, d);
  const double* base = t.data().data();
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j)
      m(i, j) = DotUnrolled(base + (static_cast<size_t>(i) * d + j) * d,
                            theta.data(), d);
  return m;
}

absl::StatusOr<SymmetricTensor3> PermSumSymmetrize(const Cube& raw) {
  const int d = raw.dim();
  if (d < 1) return absl::InvalidArgumentError("tensor dimension must be >= 1");
  if (!AllFinite(raw.data())) {
    return absl::InvalidArgumentError("raw entries must be finite");
  }
  std::vector<double> unique;
  unique.reserve(static_cast<size_t>(d) * (d + 1) * (d + 2) / 6);
  SymmetricTensor3::ForEachUniqueTriple(d, [&](int i, int j, int k) {
    unique.push_back(raw(i, j, k) + raw(i, k, j) + raw(j, i, k) +
                     raw(j, k, i) + raw(k, i, j) + raw(k, j, i));
  });
  return SymmetricTensor3::FromUniqueEntries(d, unique);
}

absl::StatusOr<SymmetricTensor3> PermAvgSymmetrize(const Cube& raw) {
  absl::StatusOr<SymmetricTensor3> sum = PermSumSymmetrize(raw);
  if (!sum.ok()) return sum.status();
  return sum->Scaled(1.0 / 6.0);
}

absl::StatusOr<OperatorNormEstimate> EstimateOperatorNorm(
    const SymmetricTensor3& t, const OperatorNormOptions& options, Rng& rng) {
  if (options.restarts < 1 || options.max_iterations < 1) {
    return absl::InvalidArgumentError("restarts and iterations must be >= 1");
  }
  const int d = t.dim();
  const double shift =
      options.shift >= 0.0 ? options.shift : 1.0 + t.FrobeniusNorm();
  OperatorNormEstimate best;
  best.maximizer = BasisVector(d, 0);
  Vector g(d);
  for (int r = 0; r < options.restarts; ++r) {
    const Vector start = RandomUnitVector(d, rng);
    for (const double sign : {1.0, -1.0}) {
      Vector u = start;
      bool converged = false;
      for (int it = 0; it < options.max_iterations; ++it) {
        t.ContractVector(u, g);
        for (int i = 0; i < d; ++i) g[i] = sign * g[i] + shift * u[i];
        const double norm = Norm2(g);
        if (norm == 0.0) break;
        Scale(g, 1.0 / norm);
        const double step = Distance(g, u);
        u.swap(g);
        if (step < options.tolerance) {
          converged = true;
          break;
        }
      }
      best.converged = best.converged && converged;
      const double value = t.ContractScalar(u);
      if (std::abs(value) > best.value) {
        best.value = std::abs(value);
        if (value < 0.0) Scale(u, -1.0);
        best.maximizer = u;
      }
    }
  }
  return best;
}

absl::StatusOr<SymmetricTensor3> RescaleToOperatorNorm(
    const SymmetricTensor3& t, double target,
    const OperatorNormOptions& options, Rng& rng) {
  if (!(target >= 0.0) || !std::isfinite(target)) {
    return absl::InvalidArgumentError("target operator norm must be >= 0");
  }
  if (target == 0.0) return t.Scaled(0.0);
  absl::StatusOr<OperatorNormEstimate> norm =
      EstimateOperatorNorm(t, options, rng);
  if (!norm.ok()) return norm.status();
  if (norm->value <= 0.0) {
    return absl::FailedPreconditionError(
        "cannot rescale a tensor whose estimated operator norm is zero");
  }
  return t.Scaled(target / norm->value);
}

double ContractDeflatedInto(const SymmetricTensor3& t,
                            const DeflationList& deflation,
                            std::span<const double> u, std::span<double> out) {
  double scalar = t.ContractVectorAndScalar(u, out);
  for (const EigenPair& e : deflation) {
    const double c = Dot(e.vector, u);
    Axpy(-e.value * c * c, e.vector, out);
    scalar -= e.value * c * c * c;
  }
  return scalar;
}

absl::StatusOr<DeflatedContraction> ContractDeflated(
    const SymmetricTensor3& t, const DeflationList& deflation,
    std::span<const double> u) {
  if (absl::Status s = CheckDim(t, u.size(), "vector"); !s.ok()) return s;
  for (const EigenPair& e : deflation) {
    if (absl::Status s = CheckDim(t, e.vector.size(), "deflation vector");
        !s.ok()) {
      return s;
    }
  }
  DeflatedContraction result{Vector(t.dim()), 0.0};
  result.scalar = ContractDeflatedInto(t, deflation, u, result.vector);
  return result;
}

absl::StatusOr<double> Coherence(const DenseMatrix& v) {
  const int d = v.rows();
  const int k = v.cols();
  if (d < 1 || k < 1 || k > d) {
    return absl::InvalidArgumentError("coherence needs a d x k matrix, k <= d");
  }
  for (int a = 0; a < k; ++a)
    for (int b = a; b < k; ++b) {
      double s = 0.0;
      for (int i = 0; i < d; ++i) s += v(i, a) * v(i, b);
      if (std::abs(s - (a == b ? 1.0 : 0.0)) > 1e-8) {
        return absl::InvalidArgumentError("columns are not orthonormal");
      }
    }
  double max_row = 0.0;
  for (int i = 0; i < d; ++i) max_row = std::max(max_row, Dot(v.row(i), v.row(i)));
  return static_cast<double>(d) / k * max_row;
}

DenseMatrix StackVectors(const Spectrum& spectrum) {
  std::vector<Vector> cols;
  for (const EigenPair& e : spectrum.pairs) cols.push_back(e.vector);
  return DenseMatrix::FromColumns(cols, spectrum.dim);
}

}  // namespace tpmkit
