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

// Noise tensors with a controlled operator norm, and the matrix-collapse
// (whitening) baseline for recovering the component subspace.

#ifndef TPMKIT_NOISE_LAB_H_
#define TPMKIT_NOISE_LAB_H_

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "absl/status/status.h"
#include "absl/status/statusor.h"
#include "tpmkit/dense_matrix.h"
#include "tpmkit/random.h"
#include "tpmkit/symmetric_tensor.h"

namespace tpmkit {

enum class NoiseRegime {
  // iid N(0, 1) entries, averaged over the six slot permutations.
  kGaussian,
  // sum_i (v2 (x) e_i (x) e_i + e_i (x) v2 (x) e_i + e_i (x) e_i (x) v2),
  // aligned with the second signal component. Deterministic.
  kAdversarial,
  // sum of b^{(x)3} over an orthonormal basis b of the complement of the
  // first three signal components.
  kWeak,
};

std::string_view RegimeName(NoiseRegime regime);
absl::StatusOr<NoiseRegime> ParseRegime(std::string_view name);

// The three-component reference signal used by the noise experiments:
// {(1, e_1), (0.75, e_2), (0.5, e_3)} in dimension d >= 3.
absl::StatusOr<Spectrum> ReferenceSpectrum(int d);

struct NoiseSpec {
  NoiseRegime regime = NoiseRegime::kGaussian;
  int dim = 0;
  double sigma = 0.0;  // target operator norm
  uint64_t seed = 0;
};

// Regime tensor before rescaling. The adversarial and weak regimes read the
// first three components of `signal`. Seeded draws come from `seed`.
absl::StatusOr<SymmetricTensor3> RawNoise(NoiseRegime regime,
                                          const Spectrum& signal,
                                          uint64_t seed);

// RawNoise(spec.regime, signal, DeriveSeed(spec.seed, 0)) rescaled so its
// estimated operator norm is spec.sigma. The estimator draws from
// DeriveSeed(spec.seed, 1).
absl::StatusOr<SymmetricTensor3> MakeNoise(
    const NoiseSpec& spec, const Spectrum& signal,
    const OperatorNormOptions& estimator = {});

// Completes the orthonormal columns of `basis` (d x m, m < d) to an
// orthonormal basis of R^d; returns the d x (d - m) completion. Candidates are
// seeded Gaussian vectors, orthogonalized twice by Gram-Schmidt.
absl::StatusOr<DenseMatrix> ComplementBasis(const DenseMatrix& basis,
                                            uint64_t seed);

struct SymmetricEigenSystem {
  std::vector<double> values;
  DenseMatrix vectors;  // column j pairs with values[j]
};

// Full diagonalization by cyclic Jacobi rotations; sweeps stop once the
// off-diagonal Frobenius norm falls below 1e-12 ||M||_F. Pairs are sorted by
// decreasing |value|.
absl::StatusOr<SymmetricEigenSystem> SymmetricEigs(const DenseMatrix& m);

// The k pairs of SymmetricEigs with the largest |value|.
absl::StatusOr<SymmetricEigenSystem> SymmetricTopkEigs(const DenseMatrix& m,
                                                       int k);

// Spectral norm of P_W - P_What, where W spans the truth vectors and What is
// the top-k eigenspace of T(I, I, theta). Always in [0, 1].
absl::StatusOr<double> WhiteningCompare(const SymmetricTensor3& t,
                                        const Spectrum& truth,
                                        std::span<const double> theta);

}  // namespace tpmkit

#endif  // TPMKIT_NOISE_LAB_H_
