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

// Online tensor power method over a stream of samples x with
// E[x (x) x (x) x] = sum_i lambda_i v_i^{(x)3}. The moment tensor is never
// formed: each power step reads a batch and accumulates
// (1/n) sum (x^T u)^2 x, so working memory is O(d (k + L)).

#ifndef TPMKIT_STREAMING_H_
#define TPMKIT_STREAMING_H_

#include <cstdint>
#include <memory>
#include <span>
#include <vector>

#include "absl/status/status.h"
#include "absl/status/statusor.h"
#include "tpmkit/power_method.h"
#include "tpmkit/random.h"
#include "tpmkit/symmetric_tensor.h"

namespace tpmkit {

// Pull interface over a sequence of fixed-dimension samples.
class SampleStream {
 public:
  virtual ~SampleStream() = default;

  virtual int dim() const = 0;

  // Writes the next sample into `out` (length dim()). Returns OutOfRange once
  // the stream is exhausted; streams never recycle samples.
  virtual absl::Status Next(std::span<double> out) = 0;

  absl::StatusOr<std::vector<Vector>> NextBatch(int n);
};

// Emits x = a_i v_i with i drawn from p, where p_i a_i^3 = lambda_i, so the
// population third moment is exactly FromComponents(spectrum). Samples have
// bounded support.
class SingleTopicGenerator : public SampleStream {
 public:
  static absl::StatusOr<SingleTopicGenerator> Create(
      const Spectrum& spectrum, std::vector<double> probabilities,
      uint64_t seed);

  int dim() const override { return spectrum_.dim; }
  absl::Status Next(std::span<double> out) override;

  const Spectrum& spectrum() const { return spectrum_; }
  const std::vector<double>& probabilities() const { return probabilities_; }
  const std::vector<double>& amplitudes() const { return amplitudes_; }

  // Fresh generator over the same distribution with seed
  // DeriveSeed(seed, index).
  SingleTopicGenerator Split(uint64_t index) const;

 private:
  SingleTopicGenerator(Spectrum spectrum, std::vector<double> probabilities,
                       std::vector<double> amplitudes, uint64_t seed);

  Spectrum spectrum_;
  std::vector<double> probabilities_;
  std::vector<double> cumulative_;
  std::vector<double> amplitudes_;
  uint64_t seed_;
  Rng rng_;
};

// Replays a recorded, finite list of samples.
class ReplayStream : public SampleStream {
 public:
  static absl::StatusOr<ReplayStream> Create(int dim,
                                             std::vector<Vector> samples);

  int dim() const override { return dim_; }
  absl::Status Next(std::span<double> out) override;

  size_t remaining() const { return samples_.size() - position_; }

 private:
  ReplayStream(int dim, std::vector<Vector> samples)
      : dim_(dim), samples_(std::move(samples)) {}

  int dim_;
  std::vector<Vector> samples_;
  size_t position_ = 0;
};

struct StreamConfig {
  int components = 1;    // k
  int restarts = 10;     // L
  int iterations = 30;   // R
  int batch_size = 1000; // n
  uint64_t seed = 0;
  // false: every (step, restart) pair reads its own n samples (n k L R in
  // total). true: one batch of n per step is shared by all L restarts.
  bool shared_batch = false;

  absl::Status Validate(int dim) const;
};

struct DataAssociationResult {
  Vector vector;  // (1/n) sum (x^T u)^2 x
  double scalar;  // (1/n) sum (x^T u)^3
};

absl::StatusOr<DataAssociationResult> DataAssociation(
    std::span<const Vector> batch, std::span<const double> u);

// Deflation subtracts lambda_j (v_j^T u)^2 v_j using the normalized iterate
// u; the eigenvalue released for a component is the scalar accumulated in its
// last power step. Fails with OutOfRange if the stream runs dry and with
// Aborted if every restart of a component degenerates.
absl::StatusOr<Spectrum> OnlineRtpm(SampleStream& stream,
                                    const StreamConfig& cfg,
                                    const IterateObserver& observer = {});

// Dense (1/n) sum x^{(x)3}; test oracle only, limited to d <= 50.
absl::StatusOr<SymmetricTensor3> EmpiricalMoment(std::span<const Vector> batch);

inline constexpr int kEmpiricalMomentMaxDim = 50;

}  // namespace tpmkit

#endif  // TPMKIT_STREAMING_H_
