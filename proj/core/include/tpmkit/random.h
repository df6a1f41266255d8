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

#ifndef TPMKIT_RANDOM_H_
#define TPMKIT_RANDOM_H_

#include <array>
#include <cstdint>
#include <span>
#include <vector>

namespace tpmkit {

// Counter-based seed derivation. The child seed is a SplitMix64 finalization
// of the parent seed combined with the stream index, so any
// (parent, index) pair can be regenerated without replaying siblings.
uint64_t DeriveSeed(uint64_t parent, uint64_t index);

// Convenience for nested derivations: DeriveSeed(DeriveSeed(p, a), b).
inline uint64_t DeriveSeed(uint64_t parent, uint64_t a, uint64_t b) {
  return DeriveSeed(DeriveSeed(parent, a), b);
}

// Seeded, splittable pseudo-random generator (xoshiro256**, state expanded
// from the seed with SplitMix64). There is no global generator anywhere in the
// library; every randomized routine takes one of these by reference.
//
// Gaussian variates use the Box-Muller transform on two uniforms, one variate
// per call and no cached spare, so the number of normal draws consumed by an
// algorithm equals the number of NextGaussian() calls. This makes runs
// replayable bit-for-bit. It is NOT a cryptographically secure source; the
// private decomposition needs a CSPRNG-backed generator in production.
class Rng {
 public:
  explicit Rng(uint64_t seed);

  uint64_t seed() const { return seed_; }

  uint64_t NextU64();

  // Uniform on the open interval (0, 1).
  double NextUniform();

  // Standard normal.
  double NextGaussian();

  // Fills `out` with i.i.d. standard normals.
  void FillGaussian(std::span<double> out);

  // Independent child generator for stream `index`; does not advance *this.
  Rng Split(uint64_t index) const { return Rng(DeriveSeed(seed_, index)); }

  // Number of NextGaussian() calls made so far.
  uint64_t gaussian_draws() const { return gaussian_draws_; }

 private:
  uint64_t seed_;
  std::array<uint64_t, 4> state_;
  uint64_t gaussian_draws_ = 0;
};

// Normalized standard Gaussian vector of length d >= 1: exactly uniform on
// the unit sphere. Consumes d Gaussian draws; redraws in the (measure-zero)
// event of an all-zero vector.
std::vector<double> RandomUnitVector(int d, Rng& rng);

}  // namespace tpmkit

#endif  // TPMKIT_RANDOM_H_
