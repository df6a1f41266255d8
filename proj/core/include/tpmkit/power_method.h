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

// Robust tensor power method: random sphere initialization, L restarts per
// component with the best restart kept, R power steps per restart, and lazy
// deflation of the components already extracted.

#ifndef TPMKIT_POWER_METHOD_H_
#define TPMKIT_POWER_METHOD_H_

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "absl/status/status.h"
#include "absl/status/statusor.h"
#include "tpmkit/random.h"
#include "tpmkit/symmetric_tensor.h"

namespace tpmkit {

struct TpmConfig {
  int components = 1;   // k
  int restarts = 10;    // L
  int iterations = 50;  // R
  uint64_t seed = 0;

  absl::Status Validate(int dim) const;
};

// Schedules used when the caller does not pick L and R:
//   R = ceil(10 * log2(d * max(scale, 1) / 1e-6)),
//   L = max(10, ceil(4 k ln(k + 1))),
// where scale is ||T||_F, an upper bound on the largest eigenvalue.
TpmConfig DefaultTpmConfig(const SymmetricTensor3& t, int components,
                           uint64_t seed);

// Start vectors are drawn from an independent stream per (component,
// restart): Rng(DeriveSeed(seed, component, restart)). Every engine in the
// library (robust, streaming, private) uses this scheme, so equal seeds give
// equal start vectors across engines.
Rng RestartRng(uint64_t seed, int component, int restart);

// Called with every normalized iterate, starting with u_0 (step 0).
using IterateObserver = std::function<void(
    int component, int restart, int step, std::span<const double> iterate)>;

struct PowerIterationResult {
  Vector vector;  // u_R
  double value;   // (T - D)(u_R, u_R, u_R)
};

// Runs `iterations` normalized deflated power steps from u0. Fails with
// FailedPrecondition if ||(T - D)(I, u, u)|| < 1e-14 at some step; such a
// restart carries no direction and is discarded by the callers.
absl::StatusOr<PowerIterationResult> PowerIterate(
    const SymmetricTensor3& t, const DeflationList& deflation,
    std::span<const double> u0, int iterations,
    const std::function<void(int, std::span<const double>)>& observer = {});

// Extracts cfg.components pairs in order. For each component the restart
// with the largest deflated T(u,u,u) wins (lowest restart index on exact
// ties); a negative winner is flipped so that lambda >= 0. Fails with
// Aborted, naming the component, when every restart for it is degenerate.
absl::StatusOr<Spectrum> RobustTpm(const SymmetricTensor3& t,
                                   const TpmConfig& cfg,
                                   const IterateObserver& observer = {});

enum class Matching {
  // Error-minimizing assignment: exhaustive for k <= 8, greedy on |v^T v|
  // otherwise.
  kOptimal,
  // Truth component i is compared with the i-th extracted pair.
  kExtractionOrder,
};

struct RecoveryReport {
  // permutation[i] is the index in the estimate matched to truth pair i.
  std::vector<int> permutation;
  std::vector<double> eigenvalue_errors;   // |lambda_i - lambda_hat_pi(i)|
  std::vector<double> eigenvector_errors;  // sign-resolved ||v_i - v_hat||
  std::vector<double> alignments;          // |v_hat_pi(i)^T v_i|
  std::vector<bool> success;               // alignments[i] >= threshold

  bool AllSucceeded() const;
  double MaxEigenvalueError() const;
  double MaxEigenvectorError() const;
};

absl::StatusOr<RecoveryReport> ScoreRecovery(
    const Spectrum& truth, const Spectrum& estimate, double threshold,
    Matching matching = Matching::kOptimal);

}  // namespace tpmkit

#endif  // TPMKIT_POWER_METHOD_H_
