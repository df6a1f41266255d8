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

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include <boost/multiprecision/cpp_dec_float.hpp>

#include "gtest/gtest.h"
#include "oracles.h"
#include "tpmkit/power_method.h"
#include "tpmkit/random.h"
#include "tpmkit/symmetric_tensor.h"
#include "tpmkit/vector_ops.h"

namespace tpmkit {
namespace {

using BigFloat = boost::multiprecision::cpp_dec_float_50;

struct BudgetOracle {
  double epsilon_prime;
  double delta_prime;
  double noise_scale;
};

// Closed forms evaluated with 50 significant digits.
BudgetOracle ExactBudget(double epsilon, double delta, int k, int l, int r) {
  const BigFloat big_k = BigFloat(k) * l * (r + 1);
  const BigFloat eps(epsilon), del(delta);
  const BigFloat eps_prime = eps / sqrt(big_k * (4 + log(2 / del)));
  const BigFloat del_prime = del / (2 * big_k);
  const BigFloat nu = 6 * sqrt(2 * log(BigFloat("1.25") / del_prime)) / eps_prime;
  return {eps_prime.convert_to<double>(), del_prime.convert_to<double>(),
          nu.convert_to<double>()};
}

double RelativeError(double got, double want) {
  return std::abs(got - want) / std::abs(want);
}

TEST(DeriveBudgetTest, ReleaseCount) {
  EXPECT_EQ(DeriveBudget(1.0, 1e-5, 3, 30, 20)->releases, 1890);
}

TEST(DeriveBudgetTest, ReferenceNoiseScale) {
  const PrivacyBudget b = *DeriveBudget(1.0, 1e-5, 3, 30, 20);
  EXPECT_NEAR(b.noise_scale, 6636.88, 0.005);
}

TEST(DeriveBudgetTest, MatchesHighPrecisionClosedForm) {
  std::mt19937_64 gen(1);
  std::uniform_real_distribution<double> log_eps(-1.0, 5.0), log_delta(-12.0, -1.0);
  std::uniform_int_distribution<int> small(1, 6), large(1, 60);
  for (int trial = 0; trial < 50; ++trial) {
    const double eps = std::pow(10.0, log_eps(gen));
    const double delta = std::pow(10.0, log_delta(gen));
    const int k = small(gen), l = large(gen), r = large(gen);
    const PrivacyBudget b = *DeriveBudget(eps, delta, k, l, r);
    const BudgetOracle want = ExactBudget(eps, delta, k, l, r);
    EXPECT_EQ(b.releases, static_cast<int64_t>(k) * l * (r + 1));
    EXPECT_LE(RelativeError(b.epsilon_prime, want.epsilon_prime), 1e-12);
    EXPECT_LE(RelativeError(b.delta_prime, want.delta_prime), 1e-12);
    EXPECT_LE(RelativeError(b.noise_scale, want.noise_scale), 1e-12);
    EXPECT_GT(b.epsilon_prime, 0.0);
    EXPECT_GT(b.delta_prime, 0.0);
  }
}

TEST(DeriveBudgetTest, HalvingEpsilonDoublesNoise) {
  for (double eps : {0.1, 1.0, 7.5, 1e4}) {
    const double a = DeriveBudget(eps, 1e-5, 2, 10, 10)->noise_scale;
    const double b = DeriveBudget(eps / 2, 1e-5, 2, 10, 10)->noise_scale;
    EXPECT_NEAR(b / a, 2.0, 1e-12);
  }
}

TEST(DeriveBudgetTest, RejectsOutOfRangeInputs) {
  EXPECT_FALSE(DeriveBudget(0.0, 1e-5, 1, 1, 1).ok());
  EXPECT_FALSE(DeriveBudget(1.0, 0.0, 1, 1, 1).ok());
  EXPECT_FALSE(DeriveBudget(1.0, 1.0, 1, 1, 1).ok());
  EXPECT_FALSE(DeriveBudget(1.0, 1e-5, 0, 1, 1).ok());
  EXPECT_FALSE(DeriveBudget(1.0, 1e-5, 1, 1, 0).ok());
  EXPECT_FALSE(DeriveBudget(NAN, 1e-5, 1, 1, 1).ok());
}

// Adds one to every index permutation of (i, j, k).
oracle::Dense3 PermutationSum(int d, int i, int j, int k) {
  oracle::Dense3 e(d);
  const int idx[3] = {i, j, k};
  int p[3] = {0, 1, 2};
  do {
    e.at(idx[p[0]], idx[p[1]], idx[p[2]]) += 1.0;
  } while (std::next_permutation(p, p + 3));
  return e;
}

TEST(ApplyNeighborTest, MatchesPermutationSumOracle) {
  std::mt19937_64 gen(2);
  const int d = 5;
  const SymmetricTensor3 t = oracle::RandomSymmetric(d, gen);
  const oracle::Dense3 dense = oracle::ToDense(t);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j)
      for (int k = 0; k < d; ++k)
        for (int sign : {1, -1}) {
          const SymmetricTensor3 n = *ApplyNeighbor(t, {i, j, k, sign});
          const oracle::Dense3 e = PermutationSum(d, i, j, k);
          const oracle::Dense3 got = oracle::ToDense(n);
          for (size_t x = 0; x < e.a.size(); ++x)
            ASSERT_NEAR(got.a[x], dense.a[x] + sign * e.a[x], 1e-14);
        }
}

TEST(ApplyNeighborTest, DistinctAndDiagonalChanges) {
  const SymmetricTensor3 zero = *SymmetricTensor3::Zero(4);
  const SymmetricTensor3 a = *ApplyNeighbor(zero, {0, 1, 2, 1});
  double fro = 0.0;
  for (double x : oracle::ToDense(a).a) fro += x * x;
  EXPECT_NEAR(std::sqrt(fro), std::sqrt(6.0), 1e-14);
  const SymmetricTensor3 b = *ApplyNeighbor(zero, {3, 3, 3, -1});
  EXPECT_EQ(b(3, 3, 3), -6.0);
}

TEST(ApplyNeighborTest, OppositeSignsCancel) {
  std::mt19937_64 gen(3);
  const SymmetricTensor3 t = oracle::RandomSymmetric(6, gen);
  const SymmetricTensor3 back =
      *ApplyNeighbor(*ApplyNeighbor(t, {1, 4, 4, 1}), {4, 1, 4, -1});
  for (size_t i = 0; i < t.data().size(); ++i)
    EXPECT_NEAR(back.data()[i], t.data()[i], 1e-14);
}

TEST(ApplyNeighborTest, RejectsBadIndicesAndSign) {
  const SymmetricTensor3 t = *SymmetricTensor3::Zero(3);
  EXPECT_FALSE(ApplyNeighbor(t, {0, 3, 0, 1}).ok());
  EXPECT_FALSE(ApplyNeighbor(t, {-1, 0, 0, 1}).ok());
  EXPECT_FALSE(ApplyNeighbor(t, {0, 0, 0, 0}).ok());
}

TEST(QuerySensitivityTest, BasisAndFlatVectors) {
  const Vector e1 = BasisVector(7, 0);
  EXPECT_EQ(QuerySensitivityF1(e1), 6.0);
  EXPECT_EQ(QuerySensitivityF2(e1), 6.0);
  for (int d : {4, 25, 100}) {
    const Vector flat(d, 1.0 / std::sqrt(d));
    EXPECT_NEAR(QuerySensitivityF1(flat), 6.0 / d, 1e-15);
    EXPECT_NEAR(QuerySensitivityF2(flat), 6.0 / std::pow(d, 1.5), 1e-15);
  }
}

struct QueryChange {
  double f1;  // ||T(I,u,u) - T'(I,u,u)||_2
  double f2;  // |T(u,u,u) - T'(u,u,u)|
};

QueryChange Evaluate(const SymmetricTensor3& t, const SymmetricTensor3& n,
                     const Vector& u) {
  const oracle::Dense3 a = oracle::ToDense(t), b = oracle::ToDense(n);
  const Vector fa = oracle::ContractVector(a, u), fb = oracle::ContractVector(b, u);
  return {Distance(fa, fb),
          std::abs(oracle::ContractScalar(a, u) - oracle::ContractScalar(b, u))};
}

TEST(QuerySensitivityTest, RandomAuditNeverExceedsBound) {
  std::mt19937_64 gen(4);
  const int d = 15;
  std::uniform_int_distribution<int> index(0, d - 1), coin(0, 1);
  for (int trial = 0; trial < 1000; ++trial) {
    const SymmetricTensor3 t = oracle::RandomSymmetric(d, gen);
    const NeighborPerturbation p{index(gen), index(gen), index(gen),
                                 coin(gen) ? 1 : -1};
    // Mix spread-out and peaked directions.
    Vector u = oracle::RandomUnit(d, gen);
    if (trial % 3 == 0) {
      u[p.i] += 3.0;
      Scale(u, 1.0 / Norm2(u));
    }
    const QueryChange c = Evaluate(t, *ApplyNeighbor(t, p), u);
    ASSERT_LE(c.f1, QuerySensitivityF1(u) * (1 + 1e-12));
    ASSERT_LE(c.f2, QuerySensitivityF2(u) * (1 + 1e-12));
  }
}

TEST(QuerySensitivityTest, ExhaustiveNeighborsAtDimensionSix) {
  std::mt19937_64 gen(5);
  const int d = 6;
  const SymmetricTensor3 t = oracle::RandomSymmetric(d, gen);
  int neighbors_per_u = 0;
  for (int trial = 0; trial < 100; ++trial) {
    const Vector u = oracle::RandomUnit(d, gen);
    neighbors_per_u = 0;
    SymmetricTensor3::ForEachUniqueTriple(d, [&](int i, int j, int k) {
      for (int sign : {1, -1}) {
        const QueryChange c = Evaluate(t, *ApplyNeighbor(t, {i, j, k, sign}), u);
        EXPECT_LE(c.f1, QuerySensitivityF1(u) * (1 + 1e-12));
        EXPECT_LE(c.f2, QuerySensitivityF2(u) * (1 + 1e-12));
        ++neighbors_per_u;
      }
    });
  }
  EXPECT_EQ(neighbors_per_u, 2 * 56);
}

Spectrum RankOne(const Vector& v) { return {static_cast<int>(v.size()), {{1.0, v}}}; }

TEST(PrivateRtpmTest, ZeroNoiseIsRobustTpm) {
  std::mt19937_64 gen(6);
  for (int trial = 0; trial < 5; ++trial) {
    const SymmetricTensor3 t = oracle::RandomSymmetric(8 + trial, gen);
    PrivateTpmOptions options{.components = 3, .restarts = 6, .iterations = 15,
                              .epsilon = 1.0, .delta = 1e-5,
                              .seed = static_cast<uint64_t>(trial)};
    options.noise_scale_override = 0.0;
    const PrivateTpmRun run = *PrivateRtpm(t, options);
    const Spectrum want = *RobustTpm(t, {3, 6, 15, static_cast<uint64_t>(trial)});
    for (int i = 0; i < 3; ++i) {
      EXPECT_EQ(run.spectrum.pairs[i].value, want.pairs[i].value);
      EXPECT_EQ(run.spectrum.pairs[i].vector, want.pairs[i].vector);
    }
  }
}

TEST(PrivateRtpmTest, SingleStepMatchesMechanismByHand) {
  std::mt19937_64 gen(7);
  const int d = 9;
  const SymmetricTensor3 t = oracle::RandomSymmetric(d, gen);
  const double nu = 0.3;
  PrivateTpmOptions options{.components = 1, .restarts = 1, .iterations = 1,
                            .epsilon = 1.0, .delta = 1e-5, .seed = 17};
  options.noise_scale_override = nu;
  const PrivateTpmRun run = *PrivateRtpm(t, options);

  Rng start = RestartRng(17, 0, 0);
  Rng noise = NoiseRng(17, 0, 0);
  const Vector u0 = RandomUnitVector(d, start);
  const double m0 = NormInf(u0);
  Vector u1 = oracle::ContractVector(oracle::ToDense(t), u0);
  for (int i = 0; i < d; ++i) u1[i] += nu * m0 * m0 * noise.NextGaussian();
  Scale(u1, 1.0 / Norm2(u1));
  const double m1 = NormInf(u1);
  double value = oracle::ContractScalar(oracle::ToDense(t), u1) +
                 nu * m1 * m1 * m1 * noise.NextGaussian();
  if (value < 0) {
    value = -value;
    Scale(u1, -1.0);
  }
  EXPECT_NEAR(run.spectrum.pairs[0].value, value, 1e-12);
  EXPECT_LE(oracle::MaxAbsDiff(run.spectrum.pairs[0].vector, u1), 1e-12);
}

TEST(PrivateRtpmTest, NoiseStandardDeviationIsCalibrated) {
  const double nu = 2.5;
  for (const Vector& u :
       {BasisVector(10, 0), Vector(10, 1.0 / std::sqrt(10.0))}) {
    const double scale = nu * NormInf(u) * NormInf(u);
    Rng noise = NoiseRng(3, 0, 0);
    Vector z(10);
    const int draws = 100000;
    double s1 = 0.0, s2 = 0.0;
    for (int i = 0; i < draws / 10; ++i) {
      noise.FillGaussian(z);
      for (double x : z) {
        s1 += scale * x;
        s2 += scale * scale * x * x;
      }
    }
    const double mean = s1 / draws;
    const double sd = std::sqrt(s2 / draws - mean * mean);
    EXPECT_NEAR(sd / scale, 1.0, 0.03);
  }
}

TEST(PrivateRtpmTest, DrawCountPerComponent) {
  std::mt19937_64 gen(8);
  const int d = 7, l = 4, r = 6;
  const SymmetricTensor3 t = oracle::RandomSymmetric(d, gen);
  const PrivateTpmRun run =
      *PrivateRtpm(t, {.components = 3, .restarts = l, .iterations = r,
                       .epsilon = 1e3, .delta = 1e-5, .seed = 1});
  ASSERT_EQ(run.noise_draws.size(), 3u);
  for (int64_t n : run.noise_draws) EXPECT_EQ(n, l * r * d + l);
}

TEST(PrivateRtpmTest, IncoherentSignalIsRecoveredAtLargeEpsilon) {
  const int d = 100;
  const Vector v(d, 1.0 / std::sqrt(d));
  const SymmetricTensor3 t = *FromComponents(RankOne(v));
  int good = 0;
  for (uint64_t seed = 0; seed < 20; ++seed) {
    const PrivateTpmRun run =
        *PrivateRtpm(t, {.components = 1, .restarts = 5, .iterations = 10,
                         .epsilon = 1e4, .delta = 1e-5, .seed = seed});
    good += Distance(run.spectrum.pairs[0].vector, v) <= 0.5;
  }
  EXPECT_GE(good, 18);
}

TEST(PrivateRtpmTest, CoherentSignalDegradesAtEqualEpsilon) {
  const int d = 100;
  const Vector flat(d, 1.0 / std::sqrt(d));
  const Vector e1 = BasisVector(d, 0);
  const SymmetricTensor3 incoherent = *FromComponents(RankOne(flat));
  const SymmetricTensor3 coherent = *FromComponents(RankOne(e1));
  std::vector<double> flat_err, e1_err;
  for (uint64_t seed = 0; seed < 20; ++seed) {
    const PrivateTpmOptions options{.components = 1, .restarts = 5,
                                    .iterations = 10, .epsilon = 1e4,
                                    .delta = 1e-5, .seed = seed};
    flat_err.push_back(
        Distance(PrivateRtpm(incoherent, options)->spectrum.pairs[0].vector, flat));
    e1_err.push_back(
        Distance(PrivateRtpm(coherent, options)->spectrum.pairs[0].vector, e1));
  }
  std::sort(flat_err.begin(), flat_err.end());
  std::sort(e1_err.begin(), e1_err.end());
  EXPECT_LT(flat_err[10], e1_err[10]);
}

TEST(InfinityRatioTraceTest, IncoherentIteratesStaySpread) {
  const int d = 400;
  const Vector v(d, 1.0 / std::sqrt(d));
  const SymmetricTensor3 t = *FromComponents(RankOne(v));
  const double bound = 5.0 * std::sqrt(std::log(d) / d);
  double worst = 0.0;
  for (uint64_t seed = 0; seed < 20; ++seed) {
    PrivateTpmOptions options{.components = 1, .restarts = 3, .iterations = 10,
                              .epsilon = 1e4, .delta = 1e-5, .seed = seed};
    options.trace = true;
    const std::vector<double> trace = *InfinityRatioTrace(*PrivateRtpm(t, options));
    ASSERT_EQ(trace.size(), 3u * 11u);
    for (double r : trace) {
      ASSERT_GE(r, 1.0 / std::sqrt(d) - 1e-12);
      ASSERT_LE(r, 1.0 + 1e-12);
      worst = std::max(worst, r);
    }
  }
  EXPECT_LE(worst, bound);
}

TEST(InfinityRatioTraceTest, CoherentSignalReachesOne) {
  const int d = 20;
  const SymmetricTensor3 t = *FromComponents(RankOne(BasisVector(d, 0)));
  PrivateTpmOptions options{.components = 1, .restarts = 2, .iterations = 30,
                            .epsilon = 1.0, .delta = 1e-5, .seed = 2};
  options.noise_scale_override = 0.0;
  options.trace = true;
  const std::vector<double> trace = *InfinityRatioTrace(*PrivateRtpm(t, options));
  EXPECT_NEAR(trace.back(), 1.0, 1e-12);
  EXPECT_EQ(NormInf(BasisVector(d, 3)), 1.0);
}

TEST(InfinityRatioTraceTest, UnavailableWithoutTracing) {
  const SymmetricTensor3 t = *FromComponents(RankOne(BasisVector(3, 0)));
  const PrivateTpmRun run = *PrivateRtpm(
      t, {.components = 1, .restarts = 1, .iterations = 1, .epsilon = 1.0,
          .delta = 1e-5});
  EXPECT_EQ(InfinityRatioTrace(run).status().code(),
            absl::StatusCode::kUnavailable);
}

}  // namespace
}  // namespace tpmkit
