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

#include "tpmkit/noise_lab.h"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <utility>

#include "absl/strings/str_cat.h"

namespace tpmkit {
namespace {

constexpr double kSymmetryTolerance = 1e-10;
constexpr double kOrthonormalTolerance = 1e-8;
constexpr int kMaxJacobiSweeps = 100;

double OffDiagonalNorm(const DenseMatrix& a) {
  double s = 0.0;
  for (int i = 0; i < a.rows(); ++i)
    for (int j = 0; j < a.cols(); ++j)
      if (i != j) s += a(i, j) * a(i, j);
  return std::sqrt(s);
}

absl::Status CheckOrthonormalColumns(const DenseMatrix& v) {
  const DenseMatrix gram = v.Transpose() * v;
  for (int i = 0; i < gram.rows(); ++i)
    for (int j = 0; j < gram.cols(); ++j) {
      const double want = i == j ? 1.0 : 0.0;
      if (std::abs(gram(i, j) - want) > kOrthonormalTolerance) {
        return absl::InvalidArgumentError("columns are not orthonormal");
      }
    }
  return absl::OkStatus();
}

// Cube with entry v2_i delta_jk + v2_j delta_ik + v2_k delta_ij.
SymmetricTensor3 AdversarialTensor(std::span<const double> v2) {
  const int d = static_cast<int>(v2.size());
  std::vector<double> unique;
  unique.reserve(static_cast<size_t>(d) * (d + 1) * (d + 2) / 6);
  SymmetricTensor3::ForEachUniqueTriple(d, [&](int i, int j, int k) {
    double x = 0.0;
    if (j == k) x += v2[i];
    if (i == k) x += v2[j];
    if (i == j) x += v2[k];
    unique.push_back(x);
  });
  return *SymmetricTensor3::FromUniqueEntries(d, unique);
}

}  // namespace

std::string_view RegimeName(NoiseRegime regime) {
  switch (regime) {
    case NoiseRegime::kGaussian:
      return "gaussian";
    case NoiseRegime::kAdversarial:
      return "adversarial";
    case NoiseRegime::kWeak:
      return "weak";
  }
  return "unknown";
}

absl::StatusOr<NoiseRegime> ParseRegime(std::string_view name) {
  for (NoiseRegime r :
       {NoiseRegime::kGaussian, NoiseRegime::kAdversarial, NoiseRegime::kWeak}) {
    if (name == RegimeName(r)) return r;
  }
  return absl::InvalidArgumentError(absl::StrCat(
      "unknown noise regime '", std::string(name), "' (gaussian, adversarial, weak)"));
}

absl::StatusOr<Spectrum> ReferenceSpectrum(int d) {
  if (d < 3) {
    return absl::InvalidArgumentError("reference signal needs d >= 3");
  }
  return Spectrum{d,
                  {{1.0, BasisVector(d, 0)},
                   {0.75, BasisVector(d, 1)},
                   {0.5, BasisVector(d, 2)}}};
}

absl::StatusOr<SymmetricTensor3> RawNoise(NoiseRegime regime,
                                          const Spectrum& signal,
                                          uint64_t seed) {
  const int d = signal.dim;
  if (d < 1) return absl::InvalidArgumentError("dimension must be >= 1");
  if (regime == NoiseRegime::kGaussian) {
    Cube raw(d);
    Rng rng(seed);
    rng.FillGaussian(raw.data());
    return PermAvgSymmetrize(raw);
  }
  if (d < 3 || signal.size() < 3) {
    return absl::InvalidArgumentError(absl::StrCat(
        std::string(RegimeName(regime)), " noise needs d >= 3 and three signal components"));
  }
  if (absl::Status s = signal.Validate(/*require_orthogonal=*/true); !s.ok()) {
    return s;
  }
  if (regime == NoiseRegime::kAdversarial) {
    return AdversarialTensor(signal.pairs[1].vector);
  }
  const DenseMatrix head = DenseMatrix::FromColumns(
      {signal.pairs[0].vector, signal.pairs[1].vector, signal.pairs[2].vector},
      d);
  if (d == 3) return SymmetricTensor3::Zero(d);
  absl::StatusOr<DenseMatrix> rest = ComplementBasis(head, seed);
  if (!rest.ok()) return rest.status();
  std::vector<double> unique;
  unique.reserve(static_cast<size_t>(d) * (d + 1) * (d + 2) / 6);
  const int m = rest->cols();
  SymmetricTensor3::ForEachUniqueTriple(d, [&](int i, int j, int k) {
    const auto bi = rest->row(i);
    const auto bj = rest->row(j);
    const auto bk = rest->row(k);
    double x = 0.0;
    for (int a = 0; a < m; ++a) x += bi[a] * bj[a] * bk[a];
    unique.push_back(x);
  });
  return SymmetricTensor3::FromUniqueEntries(d, unique);
}

absl::StatusOr<SymmetricTensor3> MakeNoise(const NoiseSpec& spec,
                                           const Spectrum& signal,
                                           const OperatorNormOptions& estimator) {
  if (!(spec.sigma >= 0.0) || !std::isfinite(spec.sigma)) {
    return absl::InvalidArgumentError("sigma must be finite and >= 0");
  }
  if (spec.dim != signal.dim) {
    return absl::InvalidArgumentError("noise and signal dimensions differ");
  }
  absl::StatusOr<SymmetricTensor3> raw =
      RawNoise(spec.regime, signal, DeriveSeed(spec.seed, 0));
  if (!raw.ok()) return raw.status();
  Rng rng(DeriveSeed(spec.seed, 1));
  return RescaleToOperatorNorm(*raw, spec.sigma, estimator, rng);
}

absl::StatusOr<DenseMatrix> ComplementBasis(const DenseMatrix& basis,
                                            uint64_t seed) {
  const int d = basis.rows();
  const int m = basis.cols();
  if (m >= d) {
    return absl::InvalidArgumentError(
        absl::StrCat("basis already has ", m, " columns in dimension ", d));
  }
  if (absl::Status s = CheckOrthonormalColumns(basis); !s.ok()) return s;

  std::vector<Vector> columns;
  for (int j = 0; j < m; ++j) columns.push_back(basis.Column(j));
  Rng rng(seed);
  Vector w(d);
  while (static_cast<int>(columns.size()) < d) {
    rng.FillGaussian(w);
    const double initial = Norm2(w);
    for (int pass = 0; pass < 2; ++pass) {
      for (const Vector& q : columns) Axpy(-Dot(q, w), q, w);
    }
    const double norm = Norm2(w);
    if (!(norm > 1e-6 * initial)) continue;
    Scale(w, 1.0 / norm);
    columns.push_back(w);
  }
  std::vector<Vector> added(columns.begin() + m, columns.end());
  return DenseMatrix::FromColumns(added, d);
}

absl::StatusOr<SymmetricEigenSystem> SymmetricEigs(const DenseMatrix& m) {
  const int n = m.rows();
  if (n < 1 || m.cols() != n) {
    return absl::InvalidArgumentError("matrix must be square and nonempty");
  }
  if (m.AsymmetryNorm() > kSymmetryTolerance) {
    return absl::InvalidArgumentError("matrix is not symmetric");
  }
  DenseMatrix a = m;
  DenseMatrix v = DenseMatrix::Identity(n);
  const double stop = 1e-12 * m.FrobeniusNorm();
  for (int sweep = 0; sweep < kMaxJacobiSweeps; ++sweep) {
    if (OffDiagonalNorm(a) <= stop) break;
    for (int p = 0; p < n - 1; ++p) {
      for (int q = p + 1; q < n; ++q) {
        const double apq = a(p, q);
        if (apq == 0.0) continue;
        const double theta = (a(q, q) - a(p, p)) / (2.0 * apq);
        const double t = (theta >= 0.0 ? 1.0 : -1.0) /
                         (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        for (int r = 0; r < n; ++r) {
          const double arp = a(r, p);
          const double arq = a(r, q);
          a(r, p) = c * arp - s * arq;
          a(r, q) = s * arp + c * arq;
        }
        for (int r = 0; r < n; ++r) {
          const double apr = a(p, r);
          const double aqr = a(q, r);
          a(p, r) = c * apr - s * aqr;
          a(q, r) = s * apr + c * aqr;
        }
        for (int r = 0; r < n; ++r) {
          const double vrp = v(r, p);
          const double vrq = v(r, q);
          v(r, p) = c * vrp - s * vrq;
          v(r, q) = s * vrp + c * vrq;
        }
      }
    }
  }

  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int x, int y) {
    return std::abs(a(x, x)) > std::abs(a(y, y));
  });
  SymmetricEigenSystem out{std::vector<double>(n), DenseMatrix(n, n)};
  for (int j = 0; j < n; ++j) {
    out.values[j] = a(order[j], order[j]);
    for (int r = 0; r < n; ++r) out.vectors(r, j) = v(r, order[j]);
  }
  return out;
}

absl::StatusOr<SymmetricEigenSystem> SymmetricTopkEigs(const DenseMatrix& m,
                                                       int k) {
  if (k < 1 || k > m.rows()) {
    return absl::InvalidArgumentError(
        absl::StrCat("k must be in [1, ", m.rows(), "], got ", k));
  }
  absl::StatusOr<SymmetricEigenSystem> full = SymmetricEigs(m);
  if (!full.ok()) return full.status();
  SymmetricEigenSystem top{
      std::vector<double>(full->values.begin(), full->values.begin() + k),
      DenseMatrix(m.rows(), k)};
  for (int r = 0; r < m.rows(); ++r)
    for (int j = 0; j < k; ++j) top.vectors(r, j) = full->vectors(r, j);
  return top;
}

absl::StatusOr<double> WhiteningCompare(const SymmetricTensor3& t,
                                        const Spectrum& truth,
                                        std::span<const double> theta) {
  const int d = t.dim();
  const int k = truth.size();
  if (truth.dim != d) {
    return absl::InvalidArgumentError("tensor and truth dimensions differ");
  }
  if (k < 1 || k > d) {
    return absl::InvalidArgumentError(
        absl::StrCat("truth must have between 1 and ", d, " components"));
  }
  if (absl::Status s = truth.Validate(/*require_orthogonal=*/true); !s.ok()) {
    return s;
  }
  absl::StatusOr<DenseMatrix> collapsed = CollapseToMatrix(t, theta);
  if (!collapsed.ok()) return collapsed.status();
  absl::StatusOr<SymmetricEigenSystem> top = SymmetricTopkEigs(*collapsed, k);
  if (!top.ok()) return top.status();

  const DenseMatrix w = StackVectors(truth);
  const DenseMatrix diff =
      w * w.Transpose() - top->vectors * top->vectors.Transpose();
  // Round-off can leave the difference a hair off symmetric.
  DenseMatrix sym(d, d);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) sym(i, j) = 0.5 * (diff(i, j) + diff(j, i));
  absl::StatusOr<SymmetricEigenSystem> eig = SymmetricEigs(sym);
  if (!eig.ok()) return eig.status();
  return std::clamp(std::abs(eig->values.front()), 0.0, 1.0);
}

}  // namespace tpmkit
