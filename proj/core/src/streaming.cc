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

#include "tpmkit/streaming.h"

#include <algorithm>
#include <cmath>
#include <utility>

#include "absl/strings/str_cat.h"

namespace tpmkit {
namespace {

constexpr double kDegenerateNorm = 1e-14;

}  // namespace

absl::StatusOr<std::vector<Vector>> SampleStream::NextBatch(int n) {
  if (n < 0) return absl::InvalidArgumentError("batch size must be >= 0");
  std::vector<Vector> batch(n, Vector(dim()));
  for (Vector& x : batch) {
    if (absl::Status s = Next(x); !s.ok()) return s;
  }
  return batch;
}

SingleTopicGenerator::SingleTopicGenerator(Spectrum spectrum,
                                           std::vector<double> probabilities,
                                           std::vector<double> amplitudes,
                                           uint64_t seed)
    : spectrum_(std::move(spectrum)),
      probabilities_(std::move(probabilities)),
      amplitudes_(std::move(amplitudes)),
      seed_(seed),
      rng_(seed) {
  double acc = 0.0;
  for (double p : probabilities_) {
    acc += p;
    cumulative_.push_back(acc);
  }
}

absl::StatusOr<SingleTopicGenerator> SingleTopicGenerator::Create(
    const Spectrum& spectrum, std::vector<double> probabilities,
    uint64_t seed) {
  if (absl::Status s = spectrum.Validate(/*require_orthogonal=*/true); !s.ok()) {
    return s;
  }
  if (spectrum.size() < 1) {
    return absl::InvalidArgumentError("spectrum must have a component");
  }
  if (static_cast<int>(probabilities.size()) != spectrum.size()) {
    return absl::InvalidArgumentError(
        "need one probability per spectrum component");
  }
  double total = 0.0;
  for (double p : probabilities) {
    if (!(p > 0.0)) {
      return absl::InvalidArgumentError("probabilities must be positive");
    }
    total += p;
  }
  if (std::abs(total - 1.0) > 1e-9) {
    return absl::InvalidArgumentError("probabilities must sum to 1");
  }
  std::vector<double> amplitudes;
  for (int i = 0; i < spectrum.size(); ++i) {
    amplitudes.push_back(std::cbrt(spectrum.pairs[i].value / probabilities[i]));
  }
  return SingleTopicGenerator(spectrum, std::move(probabilities),
                              std::move(amplitudes), seed);
}

absl::Status SingleTopicGenerator::Next(std::span<double> out) {
  if (static_cast<int>(out.size()) != dim()) {
    return absl::InvalidArgumentError("output buffer has the wrong length");
  }
  const double r = rng_.NextUniform() * cumulative_.back();
  const int topic = static_cast<int>(
      std::min<size_t>(std::upper_bound(cumulative_.begin(), cumulative_.end(), r) -
                           cumulative_.begin(),
                       cumulative_.size() - 1));
  const Vector& v = spectrum_.pairs[topic].vector;
  const double a = amplitudes_[topic];
  for (size_t c = 0; c < out.size(); ++c) out[c] = a * v[c];
  return absl::OkStatus();
}

SingleTopicGenerator SingleTopicGenerator::Split(uint64_t index) const {
  return SingleTopicGenerator(spectrum_, probabilities_, amplitudes_,
                              DeriveSeed(seed_, index));
}

absl::StatusOr<ReplayStream> ReplayStream::Create(int dim,
                                                  std::vector<Vector> samples) {
  if (dim < 1) return absl::InvalidArgumentError("dimension must be >= 1");
  for (const Vector& x : samples) {
    if (static_cast<int>(x.size()) != dim) {
      return absl::InvalidArgumentError("sample has the wrong dimension");
    }
    for (double c : x)
      if (!std::isfinite(c)) {
        return absl::InvalidArgumentError("sample entries must be finite");
      }
  }
  return ReplayStream(dim, std::move(samples));
}

absl::Status ReplayStream::Next(std::span<double> out) {
  if (position_ >= samples_.size()) {
    return absl::OutOfRangeError(
        absl::StrCat("stream exhausted after ", samples_.size(), " samples"));
  }
  const Vector& x = samples_[position_++];
  std::copy(x.begin(), x.end(), out.begin());
  return absl::OkStatus();
}

absl::Status StreamConfig::Validate(int dim) const {
  TpmConfig tpm{components, restarts, iterations, seed};
  if (absl::Status s = tpm.Validate(dim); !s.ok()) return s;
  if (batch_size < 1) {
    return absl::InvalidArgumentError("batch size must be >= 1");
  }
  return absl::OkStatus();
}

absl::StatusOr<DataAssociationResult> DataAssociation(
    std::span<const Vector> batch, std::span<const double> u) {
  if (batch.empty()) return absl::InvalidArgumentError("empty batch");
  DataAssociationResult r{Vector(u.size(), 0.0), 0.0};
  for (const Vector& x : batch) {
    if (x.size() != u.size()) {
      return absl::InvalidArgumentError("sample and iterate lengths differ");
    }
    const double c = Dot(x, u);
    Axpy(c * c, x, r.vector);
    r.scalar += c * c * c;
  }
  const double inv_n = 1.0 / static_cast<double>(batch.size());
  Scale(r.vector, inv_n);
  r.scalar *= inv_n;
  return r;
}

absl::StatusOr<Spectrum> OnlineRtpm(SampleStream& stream,
                                    const StreamConfig& cfg,
                                    const IterateObserver& observer) {
  const int d = stream.dim();
  if (absl::Status s = cfg.Validate(d); !s.ok()) return s;
  const int L = cfg.restarts;
  const double inv_n = 1.0 / static_cast<double>(cfg.batch_size);

  Spectrum out{d, {}};
  std::vector<Vector> iterate(L, Vector(d));
  std::vector<Vector> accum(L, Vector(d));
  std::vector<double> lambda(L);
  std::vector<bool> alive(L);
  Vector x(d);

  auto associate = [&](int tau) {
    const double c = Dot(x, iterate[tau]);
    Axpy(c * c, x, accum[tau]);
    lambda[tau] += c * c * c;
  };

  for (int i = 0; i < cfg.components; ++i) {
    for (int tau = 0; tau < L; ++tau) {
      Rng rng = RestartRng(cfg.seed, i, tau);
      iterate[tau] = RandomUnitVector(d, rng);
      alive[tau] = true;
      if (observer) observer(i, tau, 0, iterate[tau]);
    }
    for (int t = 0; t < cfg.iterations; ++t) {
      for (int tau = 0; tau < L; ++tau) {
        std::fill(accum[tau].begin(), accum[tau].end(), 0.0);
        lambda[tau] = 0.0;
      }
      if (cfg.shared_batch) {
        for (int l = 0; l < cfg.batch_size; ++l) {
          if (absl::Status s = stream.Next(x); !s.ok()) return s;
          for (int tau = 0; tau < L; ++tau)
            if (alive[tau]) associate(tau);
        }
      } else {
        for (int tau = 0; tau < L; ++tau) {
          if (!alive[tau]) continue;
          for (int l = 0; l < cfg.batch_size; ++l) {
            if (absl::Status s = stream.Next(x); !s.ok()) return s;
            associate(tau);
          }
        }
      }
      for (int tau = 0; tau < L; ++tau) {
        if (!alive[tau]) continue;
        Vector& acc = accum[tau];
        Scale(acc, inv_n);
        lambda[tau] *= inv_n;
        for (const EigenPair& e : out.pairs) {
          const double xi = Dot(e.vector, iterate[tau]);
          Axpy(-e.value * xi * xi, e.vector, acc);
          lambda[tau] -= e.value * xi * xi * xi;
        }
        const double norm = Norm2(acc);
        if (!(norm >= kDegenerateNorm)) {
          alive[tau] = false;
          continue;
        }
        for (int c = 0; c < d; ++c) iterate[tau][c] = acc[c] / norm;
        if (observer) observer(i, tau, t + 1, iterate[tau]);
      }
    }
    int best = -1;
    for (int tau = 0; tau < L; ++tau) {
      if (alive[tau] && (best < 0 || lambda[tau] > lambda[best])) best = tau;
    }
    if (best < 0) {
      return absl::AbortedError(
          absl::StrCat("component ", i, ": all ", L, " restarts degenerate"));
    }
    EigenPair pair{lambda[best], iterate[best]};
    if (pair.value < 0.0) {
      pair.value = -pair.value;
      Scale(pair.vector, -1.0);
    }
    out.pairs.push_back(std::move(pair));
  }
  return out;
}

absl::StatusOr<SymmetricTensor3> EmpiricalMoment(
    std::span<const Vector> batch) {
  if (batch.empty()) return absl::InvalidArgumentError("empty batch");
  const int d = static_cast<int>(batch.front().size());
  if (d < 1) return absl::InvalidArgumentError("dimension must be >= 1");
  if (d > kEmpiricalMomentMaxDim) {
    return absl::ResourceExhaustedError(
        absl::StrCat("empirical moment limited to d <= ",
                     kEmpiricalMomentMaxDim, ", got ", d));
  }
  // Sum sample by sample, then scale, mirroring DataAssociation.
  std::vector<double> unique;
  unique.reserve(static_cast<size_t>(d) * (d + 1) * (d + 2) / 6);
  SymmetricTensor3::ForEachUniqueTriple(d, [&](int, int, int) {
    unique.push_back(0.0);
  });
  for (const Vector& x : batch) {
    if (static_cast<int>(x.size()) != d) {
      return absl::InvalidArgumentError("samples have different dimensions");
    }
    size_t n = 0;
    SymmetricTensor3::ForEachUniqueTriple(d, [&](int i, int j, int k) {
      unique[n++] += x[i] * x[j] * x[k];
    });
  }
  const double inv_n = 1.0 / static_cast<double>(batch.size());
  for (double& v : unique) v *= inv_n;
  return SymmetricTensor3::FromUniqueEntries(d, unique);
}

}  // namespace tpmkit
