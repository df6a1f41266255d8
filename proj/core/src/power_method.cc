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

#include "tpmkit/power_method.h"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <optional>
#include <utility>

#include "absl/strings/str_cat.h"

namespace tpmkit {
namespace {

constexpr double kDegenerateNorm = 1e-14;
constexpr int kExhaustiveMatchingLimit = 8;

}  // namespace

absl::Status TpmConfig::Validate(int dim) const {
  if (components < 1 || components > dim) {
    return absl::InvalidArgumentError(absl::StrCat(
        "components must be in [1, ", dim, "], got ", components));
  }
  if (restarts < 1) return absl::InvalidArgumentError("restarts must be >= 1");
  if (iterations < 1) {
    return absl::InvalidArgumentError("iterations must be >= 1");
  }
  return absl::OkStatus();
}

TpmConfig DefaultTpmConfig(const SymmetricTensor3& t, int components,
                           uint64_t seed) {
  const double scale = std::max(t.FrobeniusNorm(), 1.0);
  TpmConfig cfg;
  cfg.components = components;
  cfg.seed = seed;
  cfg.iterations =
      static_cast<int>(std::ceil(10.0 * std::log2(t.dim() * scale / 1e-6)));
  cfg.restarts = std::max(
      10, static_cast<int>(std::ceil(4.0 * components *
                                     std::log(components + 1.0))));
  return cfg;
}

Rng RestartRng(uint64_t seed, int component, int restart) {
  return Rng(DeriveSeed(seed, static_cast<uint64_t>(component),
                        static_cast<uint64_t>(restart)));
}

absl::StatusOr<PowerIterationResult> PowerIterate(
    const SymmetricTensor3& t, const DeflationList& deflation,
    std::span<const double> u0, int iterations,
    const std::function<void(int, std::span<const double>)>& observer) {
  if (static_cast<int>(u0.size()) != t.dim()) {
    return absl::InvalidArgumentError("start vector has the wrong dimension");
  }
  if (iterations < 1) {
    return absl::InvalidArgumentError("iterations must be >= 1");
  }
  Vector u(u0.begin(), u0.end());
  Vector next(t.dim());
  if (observer) observer(0, u);
  for (int step = 1; step <= iterations; ++step) {
    ContractDeflatedInto(t, deflation, u, next);
    const double norm = Norm2(next);
    if (!(norm >= kDegenerateNorm)) {
      return absl::FailedPreconditionError(
          absl::StrCat("degenerate direction at power step ", step));
    }
    Scale(next, 1.0 / norm);
    u.swap(next);
    if (observer) observer(step, u);
  }
  const double value = ContractDeflatedInto(t, deflation, u, next);
  return PowerIterationResult{std::move(u), value};
}

absl::StatusOr<Spectrum> RobustTpm(const SymmetricTensor3& t,
                                   const TpmConfig& cfg,
                                   const IterateObserver& observer) {
  if (absl::Status s = cfg.Validate(t.dim()); !s.ok()) return s;
  const int d = t.dim();
  Spectrum out{d, {}};
  DeflationList deflation;
  for (int i = 0; i < cfg.components; ++i) {
    std::optional<PowerIterationResult> best;
    for (int tau = 0; tau < cfg.restarts; ++tau) {
      Rng rng = RestartRng(cfg.seed, i, tau);
      const Vector u0 = RandomUnitVector(d, rng);
      std::function<void(int, std::span<const double>)> step_observer;
      if (observer) {
        step_observer = [&](int step, std::span<const double> u) {
          observer(i, tau, step, u);
        };
      }
      absl::StatusOr<PowerIterationResult> run =
          PowerIterate(t, deflation, u0, cfg.iterations, step_observer);
      if (!run.ok()) continue;
      if (!best.has_value() || run->value > best->value) best = *std::move(run);
    }
    if (!best.has_value()) {
      return absl::AbortedError(absl::StrCat(
          "component ", i, ": all ", cfg.restarts, " restarts degenerate"));
    }
    EigenPair pair{best->value, std::move(best->vector)};
    if (pair.value < 0.0) {
      pair.value = -pair.value;
      Scale(pair.vector, -1.0);
    }
    deflation.push_back(pair);
    out.pairs.push_back(std::move(pair));
  }
  return out;
}

bool RecoveryReport::AllSucceeded() const {
  return std::all_of(success.begin(), success.end(), [](bool b) { return b; });
}

double RecoveryReport::MaxEigenvalueError() const {
  return eigenvalue_errors.empty()
             ? 0.0
             : *std::max_element(eigenvalue_errors.begin(),
                                 eigenvalue_errors.end());
}

double RecoveryReport::MaxEigenvectorError() const {
  return eigenvector_errors.empty()
             ? 0.0
             : *std::max_element(eigenvector_errors.begin(),
                                 eigenvector_errors.end());
}

absl::StatusOr<RecoveryReport> ScoreRecovery(const Spectrum& truth,
                                             const Spectrum& estimate,
                                             double threshold,
                                             Matching matching) {
  const int k = truth.size();
  if (estimate.size() != k) {
    return absl::InvalidArgumentError(absl::StrCat(
        "truth has ", k, " components but the estimate has ", estimate.size()));
  }
  if (truth.dim != estimate.dim) {
    return absl::InvalidArgumentError("truth and estimate dimensions differ");
  }
  if (!(threshold > 0.0 && threshold <= 1.0)) {
    return absl::InvalidArgumentError("threshold must be in (0, 1]");
  }

  // align[i][j] = |v_i^T v_hat_j|; err[i][j] = ||v_i -/+ v_hat_j|| for the
  // better sign.
  std::vector<std::vector<double>> align(k, std::vector<double>(k));
  std::vector<std::vector<double>> err(k, std::vector<double>(k));
  for (int i = 0; i < k; ++i)
    for (int j = 0; j < k; ++j) {
      const auto& v = truth.pairs[i].vector;
      const auto& w = estimate.pairs[j].vector;
      const double dot = Dot(v, w);
      align[i][j] = std::abs(dot);
      double s = 0.0;
      const double sign = dot < 0.0 ? -1.0 : 1.0;
      for (size_t c = 0; c < v.size(); ++c) {
        const double diff = v[c] - sign * w[c];
        s += diff * diff;
      }
      err[i][j] = std::sqrt(s);
    }

  std::vector<int> perm(k);
  std::iota(perm.begin(), perm.end(), 0);
  if (matching == Matching::kOptimal && k <= kExhaustiveMatchingLimit) {
    std::vector<int> candidate = perm;
    double best_cost = INFINITY;
    do {
      double cost = 0.0;
      for (int i = 0; i < k; ++i) cost += err[i][candidate[i]];
      if (cost < best_cost) {
        best_cost = cost;
        perm = candidate;
      }
    } while (std::next_permutation(candidate.begin(), candidate.end()));
  } else if (matching == Matching::kOptimal) {
    std::vector<bool> used_truth(k, false), used_est(k, false);
    for (int round = 0; round < k; ++round) {
      int bi = -1, bj = -1;
      for (int i = 0; i < k; ++i) {
        if (used_truth[i]) continue;
        for (int j = 0; j < k; ++j) {
          if (used_est[j]) continue;
          if (bi < 0 || align[i][j] > align[bi][bj]) {
            bi = i;
            bj = j;
          }
        }
      }
      used_truth[bi] = used_est[bj] = true;
      perm[bi] = bj;
    }
  }

  RecoveryReport report;
  report.permutation = perm;
  for (int i = 0; i < k; ++i) {
    const int j = perm[i];
    report.eigenvalue_errors.push_back(
        std::abs(truth.pairs[i].value - estimate.pairs[j].value));
    report.eigenvector_errors.push_back(err[i][j]);
    report.alignments.push_back(align[i][j]);
    report.success.push_back(align[i][j] >= threshold);
  }
  return report;
}

}  // namespace tpmkit
