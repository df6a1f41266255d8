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

// Differentially private tensor power method. Every power step releases
// (T - D)(I, u, u) through a Gaussian mechanism whose scale tracks
// ||u||_inf^2, and every restart releases its score through one more
// mechanism with scale ||u||_inf^3. The budget is split across the
// K = k L (R + 1) releases by advanced composition.
//
// The noise generator is a seeded, replayable PRNG. That makes runs
// reproducible for testing; it is NOT a cryptographically secure entropy
// source and must be replaced for any deployment that needs real privacy.

#ifndef TPMKIT_DP_H_
#define TPMKIT_DP_H_

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "absl/status/status.h"
#include "absl/status/statusor.h"
#include "tpmkit/power_method.h"
#include "tpmkit/random.h"
#include "tpmkit/symmetric_tensor.h"

namespace tpmkit {

struct PrivacyBudget {
  double epsilon = 0.0;
  double delta = 0.0;
  int components = 0;  // k
  int restarts = 0;    // L
  int iterations = 0;  // R
  int64_t releases = 0;        // K = k L (R + 1)
  double epsilon_prime = 0.0;  // epsilon / sqrt(K (4 + ln(2 / delta)))
  double delta_prime = 0.0;    // delta / (2 K)
  double noise_scale = 0.0;    // nu = 6 sqrt(2 ln(1.25 / delta')) / epsilon'
};

absl::StatusOr<PrivacyBudget> DeriveBudget(double epsilon, double delta,
                                           int components, int restarts,
                                           int iterations);

// T' - T = sign * (sum of e_a (x) e_b (x) e_c over the six orderings of
// (i, j, k)).
struct NeighborPerturbation {
  int i = 0;
  int j = 0;
  int k = 0;
  int sign = 1;
};

absl::StatusOr<SymmetricTensor3> ApplyNeighbor(const SymmetricTensor3& t,
                                               const NeighborPerturbation& p);

// l2-sensitivity bounds of u -> T(I, u, u) and u -> T(u, u, u) over
// neighboring tensors.
double QuerySensitivityF1(std::span<const double> u);
double QuerySensitivityF2(std::span<const double> u);

struct PrivateTpmOptions {
  int components = 1;
  int restarts = 10;
  int iterations = 20;
  double epsilon = 1.0;
  double delta = 1e-5;
  uint64_t seed = 0;
  // Replaces the calibrated nu. Zero turns the mechanism off; the noise
  // streams are still advanced, so draw counts are unchanged.
  std::optional<double> noise_scale_override;
  // Record ||u_t||_inf for every iterate.
  bool trace = false;
};

struct InfinityNormSample {
  int component;
  int restart;
  int step;
  double value;  // ||u_step||_inf of the normalized iterate
};

struct PrivateTpmRun {
  Spectrum spectrum;
  PrivacyBudget budget;
  double noise_scale = 0.0;  // the nu actually used
  // Gaussian draws per component, in extraction order.
  std::vector<int64_t> noise_draws;
  bool traced = false;
  std::vector<InfinityNormSample> trace;
};

// Start vectors come from RestartRng, exactly as in RobustTpm. Noise for
// (component, restart) comes from its own stream, NoiseRng, so a zero noise
// scale reproduces RobustTpm bit for bit.
absl::StatusOr<PrivateTpmRun> PrivateRtpm(const SymmetricTensor3& t,
                                          const PrivateTpmOptions& options);

Rng NoiseRng(uint64_t seed, int component, int restart);

// ||u_t||_inf for every traced iterate, in (component, restart, step)
// order. Unavailable if the run was not traced.
absl::StatusOr<std::vector<double>> InfinityRatioTrace(const PrivateTpmRun& run);

}  // namespace tpmkit

#endif  // TPMKIT_DP_H_
