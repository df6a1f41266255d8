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

#include "tpmkit/dp.h"

#include <cmath>
#include <optional>
#include <utility>

#include "absl/strings/str_cat.h"

namespace tpmkit {
namespace {

constexpr double kDegenerateNorm = 1e-14;
// Separates noise streams from start-vector streams derived from one seed.
constexpr uint64_t kNoiseStreamTag = 0x6e6f697365ULL;

struct RestartOutcome {
  Vector vector;
  double value;
};

}  // namespace

absl::StatusOr<PrivacyBudget> DeriveBudget(double epsilon, double delta,
                                           int components, int restarts,
                                           int iterations) {
  if (!(epsilon > 0.0) || !std::isfinite(epsilon)) {
    return absl::InvalidArgumentError("epsilon must be positive and finite");
  }
  if (!(delta > 0.0 && delta < 1.0)) {
    return absl::InvalidArgumentError("delta must be in (0, 1)");
  }
  if (components < 1 || restarts < 1 || iterations < 1) {
    return absl::InvalidArgumentError("k, L and R must all be >= 1");
  }
  PrivacyBudget b;
  b.epsilon = epsilon;
  b.delta = delta;
  b.components = components;
  b.restarts = restarts;
  b.iterations = iterations;
  b.releases = static_cast<int64_t>(components) * restarts * (iterations + 1);
  const double k = static_cast<double>(b.releases);
  b.epsilon_prime = epsilon / std::sqrt(k * (4.0 + std::log(2.0 / delta)));
  b.delta_prime = delta / (2.0 * k);
  b.noise_scale =
      6.0 * std::sqrt(2.0 * std::log(1.25 / b.delta_prime)) / b.epsilon_prime;
  return b;
}

absl::StatusOr<SymmetricTensor3> ApplyNeighbor(const SymmetricTensor3& t,
                                               const NeighborPerturbation& p) {
  const int d = t.dim();
  for (int idx : {p.i, p.j, p.k}) {
    if (idx < 0 || idx >= d) {
      return absl::InvalidArgumentError(
          absl::StrCat("neighbor index ", idx, " outside [0, ", d, ")"));
    }
  }
  if (p.sign != 1 && p.sign != -1) {
    return absl::InvalidArgumentError("neighbor sign must be +1 or -1");
  }
  SymmetricTensorBuilder b(t);
  const Vector ei = BasisVector(d, p.i);
  const Vector ej = BasisVector(d, p.j);
  const Vector ek = BasisVector(d, p.k);
  b.AddSymmetrizedOuter(static_cast<double>(p.sign), ei, ej, ek);
  return std::move(b).Build();
}

double QuerySensitivityF1(std::span<const double> u) {
  const double m = NormInf(u);
  return 6.0 * m * m;
}

double QuerySensitivityF2(std::span<const double> u) {
  const double m = NormInf(u);
  return 6.0 * m * m * m;
}

Rng NoiseRng(uint64_t seed, int component, int restart) {
  return Rng(DeriveSeed(DeriveSeed(seed, kNoiseStreamTag),
                        static_cast<uint64_t>(component),
                        static_cast<uint64_t>(restart)));
}

absl::StatusOr<PrivateTpmRun> PrivateRtpm(const SymmetricTensor3& t,
                                          const PrivateTpmOptions& options) {
  const int d = t.dim();
  TpmConfig shape{options.components, options.restarts, options.iterations,
                  options.seed};
  if (absl::Status s = shape.Validate(d); !s.ok()) return s;
  absl::StatusOr<PrivacyBudget> budget =
      DeriveBudget(options.epsilon, options.delta, options.components,
                   options.restarts, options.iterations);
  if (!budget.ok()) return budget.status();
  if (options.noise_scale_override.has_value() &&
      !(*options.noise_scale_override >= 0.0)) {
    return absl::InvalidArgumentError("noise scale override must be >= 0");
  }

  PrivateTpmRun run;
  run.budget = *budget;
  run.noise_scale = options.noise_scale_override.value_or(budget->noise_scale);
  run.traced = options.trace;
  run.spectrum.dim = d;
  const double nu = run.noise_scale;

  DeflationList deflation;
  Vector next(d);
  Vector z(d);
  for (int i = 0; i < options.components; ++i) {
    std::optional<RestartOutcome> best;
    int64_t draws = 0;
    for (int tau = 0; tau < options.restarts; ++tau) {
      Rng start = RestartRng(options.seed, i, tau);
      Rng noise = NoiseRng(options.seed, i, tau);
      Vector u = RandomUnitVector(d, start);
      if (options.trace) run.trace.push_back({i, tau, 0, NormInf(u)});
      bool degenerate = false;
      for (int step = 1; step <= options.iterations; ++step) {
        ContractDeflatedInto(t, deflation, u, next);
        const double inf = NormInf(u);
        noise.FillGaussian(z);
        draws += d;
        if (nu != 0.0) Axpy(nu * inf * inf, z, next);
        const double norm = Norm2(next);
        if (!(norm >= kDegenerateNorm)) {
          degenerate = true;
          break;
        }
        Scale(next, 1.0 / norm);
        u.swap(next);
        if (options.trace) run.trace.push_back({i, tau, step, NormInf(u)});
      }
      if (degenerate) continue;
      double value = ContractDeflatedInto(t, deflation, u, next);
      const double inf = NormInf(u);
      const double zs = noise.NextGaussian();
      ++draws;
      if (nu != 0.0) value += nu * inf * inf * inf * zs;
      if (!best.has_value() || value > best->value) {
        best = RestartOutcome{std::move(u), value};
      }
    }
    run.noise_draws.push_back(draws);
    if (!best.has_value()) {
      return absl::AbortedError(absl::StrCat(
          "component ", i, ": all ", options.restarts, " restarts degenerate"));
    }
    EigenPair pair{best->value, std::move(best->vector)};
    if (pair.value < 0.0) {
      pair.value = -pair.value;
      Scale(pair.vector, -1.0);
    }
    deflation.push_back(pair);
    run.spectrum.pairs.push_back(std::move(pair));
  }
  return run;
}

absl::StatusOr<std::vector<double>> InfinityRatioTrace(
    const PrivateTpmRun& run) {
  if (!run.traced) {
    return absl::UnavailableError("run was made without tracing");
  }
  std::vector<double> out;
  out.reserve(run.trace.size());
  for (const InfinityNormSample& s : run.trace) out.push_back(s.value);
  return out;
}

}  // namespace tpmkit
