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

#include "tpmkit/symmetric_tensor.h"

#include <cmath>
#include <random>
#include <vector>

#include <Eigen/Dense>

#include "gmock/gmock.h"
#include "gtest/gtest.h"
#include "oracles.h"
#include "tpmkit/random.h"
#include "tpmkit/vector_ops.h"

namespace tpmkit {
namespace {

using ::testing::DoubleNear;
using ::testing::ElementsAre;
using ::testing::Pointwise;

Spectrum ThreeComponent(int d) {
  return {d, {{1.0, BasisVector(d, 0)},
              {0.75, BasisVector(d, 1)},
              {0.5, BasisVector(d, 2)}}};
}

Vector Normalized(Vector v) {
  Scale(v, 1.0 / Norm2(v));
  return v;
}

void ExpectFullySymmetric(const SymmetricTensor3& t, double tol) {
  const int d = t.dim();
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j)
      for (int k = 0; k < d; ++k) {
        const double x = t(i, j, k);
        ASSERT_NEAR(t(i, k, j), x, tol);
        ASSERT_NEAR(t(j, i, k), x, tol);
        ASSERT_NEAR(t(j, k, i), x, tol);
        ASSERT_NEAR(t(k, i, j), x, tol);
        ASSERT_NEAR(t(k, j, i), x, tol);
      }
}

TEST(FromComponentsTest, SingleBasisComponent) {
  absl::StatusOr<SymmetricTensor3> t =
      FromComponents({3, {{1.0, BasisVector(3, 0)}}});
  ASSERT_TRUE(t.ok()) << t.status();
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j)
      for (int k = 0; k < 3; ++k)
        EXPECT_EQ((*t)(i, j, k), i == 0 && j == 0 && k == 0 ? 1.0 : 0.0);
}

TEST(FromComponentsTest, ReferenceTensorHasDiagonalEntriesOnly) {
  absl::StatusOr<SymmetricTensor3> t = FromComponents(ThreeComponent(25));
  ASSERT_TRUE(t.ok()) << t.status();
  EXPECT_EQ((*t)(0, 0, 0), 1.0);
  EXPECT_EQ((*t)(1, 1, 1), 0.75);
  EXPECT_EQ((*t)(2, 2, 2), 0.5);
  int nonzero = 0;
  for (double x : t->data()) nonzero += x != 0.0;
  EXPECT_EQ(nonzero, 3);
}

TEST(FromComponentsTest, SkewedComponentMatchesTripleLoop) {
  const double lambda = 0.8;
  const Vector v = Normalized({1.0, 1.0, 0.0});
  absl::StatusOr<SymmetricTensor3> t = FromComponents({3, {{lambda, v}}});
  ASSERT_TRUE(t.ok()) << t.status();
  EXPECT_NEAR((*t)(0, 0, 0), lambda / (2.0 * std::sqrt(2.0)), 1e-15);
  const oracle::Dense3 want = oracle::RankOneSum(3, {lambda}, {v});
  EXPECT_THAT(oracle::ToDense(*t).a, Pointwise(DoubleNear(1e-15), want.a));
}

TEST(FromComponentsTest, RejectsMismatchedDimensions) {
  EXPECT_FALSE(FromComponents({3, {{1.0, Vector{1.0, 0.0}}}}).ok());
}

TEST(FromComponentsTest, OutputIsSymmetric) {
  std::mt19937_64 gen(7);
  const std::vector<Vector> vs = oracle::RandomOrthonormal(8, 4, gen);
  Spectrum s{8, {}};
  for (int i = 0; i < 4; ++i) s.pairs.push_back({0.3 + 0.2 * i, vs[i]});
  absl::StatusOr<SymmetricTensor3> t = FromComponents(s);
  ASSERT_TRUE(t.ok());
  ExpectFullySymmetric(*t, 1e-12);
}

TEST(ContractTest, RankOneFixedPoint) {
  const SymmetricTensor3 t = *FromComponents({3, {{1.0, BasisVector(3, 0)}}});
  EXPECT_THAT(*ContractToVector(t, BasisVector(3, 0)), ElementsAre(1, 0, 0));
  EXPECT_EQ(*ContractToScalar(t, BasisVector(3, 0)), 1.0);
  EXPECT_EQ(*ContractToScalar(t, BasisVector(3, 1)), 0.0);
}

TEST(ContractTest, TwoComponentHandValues) {
  const SymmetricTensor3 t = *FromComponents(
      {4, {{1.0, BasisVector(4, 0)}, {0.75, BasisVector(4, 1)}}});
  const Vector u = Normalized({1.0, 1.0, 0.0, 0.0});
  EXPECT_THAT(*ContractToVector(t, u),
              Pointwise(DoubleNear(1e-15), Vector{0.5, 0.375, 0.0, 0.0}));
}

TEST(ContractTest, ScalarOffAxis) {
  const SymmetricTensor3 t = *FromComponents({3, {{1.0, BasisVector(3, 0)}}});
  const Vector u = Normalized({1.0, 1.0, 0.0});
  EXPECT_NEAR(*ContractToScalar(t, u), std::pow(1.0 / std::sqrt(2.0), 3),
              1e-15);
  EXPECT_NEAR(*ContractToScalar(t, u), 0.353553, 1e-6);
}

TEST(ContractTest, RejectsDimensionMismatch) {
  const SymmetricTensor3 t = *SymmetricTensor3::Zero(3);
  EXPECT_EQ(ContractToVector(t, Vector{1.0, 0.0}).status().code(),
            absl::StatusCode::kInvalidArgument);
  EXPECT_EQ(ContractToScalar(t, Vector{1.0}).status().code(),
            absl::StatusCode::kInvalidArgument);
}

TEST(ContractPropertyTest, MatchesTripleLoopOnRandomInputs) {
  std::mt19937_64 gen(11);
  for (int trial = 0; trial < 100; ++trial) {
    const int d = 1 + trial % 20;
    const SymmetricTensor3 t = oracle::RandomSymmetric(d, gen);
    const oracle::Dense3 dense = oracle::ToDense(t);
    const Vector u = oracle::RandomUnit(d, gen);
    const Vector got = *ContractToVector(t, u);
    const Vector want = oracle::ContractVector(dense, u);
    EXPECT_LE(oracle::MaxAbsDiff(got, want), 1e-10) << "d=" << d;
    EXPECT_NEAR(*ContractToScalar(t, u), oracle::ContractScalar(dense, u),
                1e-10);
    // u^T T(I, u, u) == T(u, u, u).
    EXPECT_NEAR(Dot(u, got), *ContractToScalar(t, u), 1e-10);
  }
}

TEST(ContractPropertyTest, Linearity) {
  std::mt19937_64 gen(12);
  for (int trial = 0; trial < 20; ++trial) {
    const int d = 2 + trial % 10;
    const SymmetricTensor3 a = oracle::RandomSymmetric(d, gen);
    const SymmetricTensor3 b = oracle::RandomSymmetric(d, gen);
    const double x = 1.7, y = -0.4;
    const SymmetricTensor3 c = *SymmetricTensor3::LinearCombination(x, a, y, b);
    const Vector u = oracle::RandomUnit(d, gen);
    Vector want = *ContractToVector(a, u);
    Scale(want, x);
    Axpy(y, *ContractToVector(b, u), want);
    EXPECT_LE(oracle::MaxAbsDiff(*ContractToVector(c, u), want), 1e-10);
  }
}

TEST(ContractPropertyTest, BoundedByOperatorNormOnOrthogonalTensors) {
  std::mt19937_64 gen(13);
  const std::vector<Vector> vs = oracle::RandomOrthonormal(10, 3, gen);
  const SymmetricTensor3 t =
      *FromComponents({10, {{0.9, vs[0]}, {0.6, vs[1]}, {0.4, vs[2]}}});
  for (int trial = 0; trial < 200; ++trial) {
    const Vector u = oracle::RandomUnit(10, gen);
    EXPECT_LE(Norm2(*ContractToVector(t, u)), 0.9 + 1e-12);
  }
}

TEST(CollapseTest, RankOneCollapse) {
  std::mt19937_64 gen(3);
  const Vector v = oracle::RandomUnit(5, gen);
  const Vector theta = oracle::RandomUnit(5, gen);
  const double c = Dot(v, theta);
  const DenseMatrix m = *CollapseToMatrix(*FromComponents({5, {{1.0, v}}}), theta);
  for (int i = 0; i < 5; ++i)
    for (int j = 0; j < 5; ++j) EXPECT_NEAR(m(i, j), c * v[i] * v[j], 1e-14);
}

TEST(CollapseTest, EigenvaluesAgainstEigenSolver) {
  std::mt19937_64 gen(4);
  const std::vector<Vector> vs = oracle::RandomOrthonormal(6, 3, gen);
  const std::vector<double> lambdas = {1.0, 0.7, 0.4};
  Spectrum s{6, {}};
  for (int i = 0; i < 3; ++i) s.pairs.push_back({lambdas[i], vs[i]});
  const Vector theta = oracle::RandomUnit(6, gen);
  const DenseMatrix m = *CollapseToMatrix(*FromComponents(s), theta);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(oracle::ToEigen(m));
  std::vector<double> got(eig.eigenvalues().data(),
                          eig.eigenvalues().data() + 6);
  std::vector<double> want = {0.0, 0.0, 0.0};
  for (int i = 0; i < 3; ++i) want.push_back(lambdas[i] * Dot(vs[i], theta));
  std::sort(got.begin(), got.end());
  std::sort(want.begin(), want.end());
  EXPECT_THAT(got, Pointwise(DoubleNear(1e-12), want));
}

TEST(CollapseTest, OrthogonalThetaGivesZero) {
  const DenseMatrix m =
      *CollapseToMatrix(*FromComponents(ThreeComponent(5)), BasisVector(5, 4));
  EXPECT_EQ(m.FrobeniusNorm(), 0.0);
}

TEST(SymmetrizeTest, SumOfDistinctTriple) {
  Cube raw(3);
  raw(0, 1, 2) = 1.0;
  const SymmetricTensor3 t = *PermSumSymmetrize(raw);
  EXPECT_EQ(t(0, 1, 2), 1.0);
  EXPECT_EQ(t(2, 1, 0), 1.0);
  EXPECT_EQ(t(1, 2, 0), 1.0);
  EXPECT_NEAR(t.FrobeniusNorm(), std::sqrt(6.0), 1e-15);
  EXPECT_NEAR(t.FrobeniusNorm(), 2.449, 1e-3);
}

TEST(SymmetrizeTest, SumOfDiagonalEntry) {
  Cube raw(3);
  raw(0, 0, 0) = 1.0;
  const SymmetricTensor3 t = *PermSumSymmetrize(raw);
  EXPECT_EQ(t(0, 0, 0), 6.0);
  EXPECT_EQ(t.FrobeniusNorm(), 6.0);
}

TEST(SymmetrizeTest, SumOfSymmetricInputScalesBySix) {
  std::mt19937_64 gen(5);
  const SymmetricTensor3 s = oracle::RandomSymmetric(4, gen);
  Cube raw(4);
  std::copy(s.data().begin(), s.data().end(), raw.data().begin());
  const SymmetricTensor3 t = *PermSumSymmetrize(raw);
  for (size_t i = 0; i < s.data().size(); ++i)
    EXPECT_NEAR(t.data()[i], 6.0 * s.data()[i], 1e-12);
}

TEST(SymmetrizeTest, AverageOfDistinctTriple) {
  Cube raw(3);
  raw(0, 1, 2) = 1.0;
  const SymmetricTensor3 t = *PermAvgSymmetrize(raw);
  EXPECT_NEAR(t(0, 1, 2), 1.0 / 6.0, 1e-16);
  EXPECT_NEAR(t(2, 0, 1), 1.0 / 6.0, 1e-16);
}

TEST(SymmetrizeTest, AverageIsIdempotentAndSumOverSix) {
  std::mt19937_64 gen(6);
  std::normal_distribution<double> normal;
  Cube raw(5);
  for (double& x : raw.data()) x = normal(gen);
  const SymmetricTensor3 avg = *PermAvgSymmetrize(raw);
  const SymmetricTensor3 sum = *PermSumSymmetrize(raw);
  Cube again(5);
  std::copy(avg.data().begin(), avg.data().end(), again.data().begin());
  const SymmetricTensor3 twice = *PermAvgSymmetrize(again);
  oracle::Dense3 dense(5);
  dense.a.assign(raw.data().begin(), raw.data().end());
  const oracle::Dense3 want = oracle::SymmetrizeByAverage(dense);
  for (size_t i = 0; i < avg.data().size(); ++i) {
    EXPECT_NEAR(avg.data()[i], sum.data()[i] / 6.0, 1e-14);
    EXPECT_NEAR(twice.data()[i], avg.data()[i], 1e-14);
    EXPECT_NEAR(avg.data()[i], want.a[i], 1e-14);
  }
  ExpectFullySymmetric(avg, 0.0);
}

TEST(OperatorNormTest, RankOneIsItsWeight) {
  std::mt19937_64 gen(8);
  const Vector v = oracle::RandomUnit(7, gen);
  for (int restarts : {1, 3}) {
    Rng rng(1);
    absl::StatusOr<OperatorNormEstimate> est = EstimateOperatorNorm(
        *FromComponents({7, {{2.5, v}}}), {.restarts = restarts}, rng);
    ASSERT_TRUE(est.ok()) << est.status();
    EXPECT_NEAR(est->value, 2.5, 1e-6);
  }
}

TEST(OperatorNormTest, ReferenceTensorMatchesExhaustiveComponentCheck) {
  const Spectrum s = ThreeComponent(25);
  const SymmetricTensor3 t = *FromComponents(s);
  // For an orthogonal tensor the maximum of |T(u,u,u)| is attained at one
  // of +-v_i.
  double want = 0.0;
  for (const EigenPair& p : s.pairs) {
    for (double sign : {1.0, -1.0}) {
      Vector u = p.vector;
      Scale(u, sign);
      want = std::max(want, std::abs(*ContractToScalar(t, u)));
    }
  }
  Rng rng(2);
  absl::StatusOr<OperatorNormEstimate> est =
      EstimateOperatorNorm(t, {.restarts = 10}, rng);
  ASSERT_TRUE(est.ok());
  EXPECT_NEAR(est->value, want, 1e-6);
  EXPECT_NEAR(est->value, 1.0, 1e-6);
}

TEST(OperatorNormTest, SignSymmetric) {
  std::mt19937_64 gen(9);
  const SymmetricTensor3 t = oracle::RandomSymmetric(6, gen);
  Rng a(3), b(3);
  const double plus = EstimateOperatorNorm(t, {}, a)->value;
  const double minus = EstimateOperatorNorm(t.Scaled(-1.0), {}, b)->value;
  EXPECT_NEAR(plus, minus, 1e-9);
}

TEST(OperatorNormTest, NeverBelowAnySampledValue) {
  std::mt19937_64 gen(10);
  const SymmetricTensor3 t = oracle::RandomSymmetric(6, gen);
  Rng rng(4);
  const double est = EstimateOperatorNorm(t, {}, rng)->value;
  for (int i = 0; i < 2000; ++i) {
    const Vector u = oracle::RandomUnit(6, gen);
    EXPECT_LE(std::abs(*ContractToScalar(t, u)), est + 1e-9);
  }
}

TEST(RescaleTest, HalvesRankOne) {
  const Vector v = BasisVector(4, 2);
  Rng rng(5);
  const SymmetricTensor3 t =
      *RescaleToOperatorNorm(*FromComponents({4, {{2.0, v}}}), 1.0, {}, rng);
  const oracle::Dense3 want = oracle::RankOneSum(4, {1.0}, {v});
  EXPECT_THAT(oracle::ToDense(t).a, Pointwise(DoubleNear(1e-9), want.a));
}

TEST(RescaleTest, ZeroTargetGivesZeroTensor) {
  std::mt19937_64 gen(14);
  Rng rng(6);
  const SymmetricTensor3 t =
      *RescaleToOperatorNorm(oracle::RandomSymmetric(5, gen), 0.0, {}, rng);
  EXPECT_EQ(t.FrobeniusNorm(), 0.0);
}

TEST(RescaleTest, ComposesToSingleRescale) {
  std::mt19937_64 gen(15);
  const SymmetricTensor3 t = oracle::RandomSymmetric(5, gen);
  Rng a(7), b(7), c(7);
  const SymmetricTensor3 once = *RescaleToOperatorNorm(t, 0.3, {}, a);
  const SymmetricTensor3 first = *RescaleToOperatorNorm(t, 2.0, {}, b);
  const SymmetricTensor3 twice = *RescaleToOperatorNorm(first, 0.3, {}, c);
  for (size_t i = 0; i < once.data().size(); ++i)
    EXPECT_NEAR(twice.data()[i], once.data()[i], 1e-9);
}

TEST(RescaleTest, RejectsZeroTensorAndNegativeTarget) {
  Rng rng(8);
  EXPECT_FALSE(
      RescaleToOperatorNorm(*SymmetricTensor3::Zero(3), 1.0, {}, rng).ok());
  EXPECT_FALSE(
      RescaleToOperatorNorm(*SymmetricTensor3::Zero(3), -1.0, {}, rng).ok());
}

TEST(ContractDeflatedTest, EmptyDeflationIsPlainContraction) {
  std::mt19937_64 gen(16);
  const SymmetricTensor3 t = oracle::RandomSymmetric(6, gen);
  const Vector u = oracle::RandomUnit(6, gen);
  const DeflatedContraction got = *ContractDeflated(t, {}, u);
  EXPECT_EQ(got.vector, *ContractToVector(t, u));
  EXPECT_EQ(got.scalar, *ContractToScalar(t, u));
}

TEST(ContractDeflatedTest, ExactDeflationAnnihilatesComponent) {
  const Spectrum s = ThreeComponent(8);
  const DeflatedContraction got = *ContractDeflated(
      *FromComponents(s), {s.pairs[0]}, s.pairs[0].vector);
  EXPECT_LE(Norm2(got.vector), 1e-12);
  EXPECT_LE(std::abs(got.scalar), 1e-12);
}

TEST(ContractDeflatedTest, MatchesMaterializedResidual) {
  std::mt19937_64 gen(17);
  for (int trial = 0; trial < 20; ++trial) {
    const int d = 3 + trial % 18;
    const SymmetricTensor3 t = oracle::RandomSymmetric(d, gen);
    DeflationList deflation;
    std::vector<double> lambdas;
    std::vector<Vector> vs;
    for (int j = 0; j < 1 + trial % 3; ++j) {
      deflation.push_back({0.5 + j, oracle::RandomUnit(d, gen)});
      lambdas.push_back(deflation.back().value);
      vs.push_back(deflation.back().vector);
    }
    oracle::Dense3 residual = oracle::ToDense(t);
    const oracle::Dense3 removed = oracle::RankOneSum(d, lambdas, vs);
    for (size_t i = 0; i < residual.a.size(); ++i) residual.a[i] -= removed.a[i];
    const Vector u = oracle::RandomUnit(d, gen);
    const DeflatedContraction got = *ContractDeflated(t, deflation, u);
    EXPECT_LE(oracle::MaxAbsDiff(got.vector, oracle::ContractVector(residual, u)),
              1e-10);
    EXPECT_NEAR(got.scalar, oracle::ContractScalar(residual, u), 1e-10);
  }
}

TEST(CoherenceTest, FullBasisIsOne) {
  EXPECT_NEAR(*Coherence(DenseMatrix::Identity(6)), 1.0, 1e-15);
}

TEST(CoherenceTest, LeadingBasisVectorsAreMaximallyCoherent) {
  const DenseMatrix v = DenseMatrix::FromColumns(
      {BasisVector(10, 0), BasisVector(10, 1), BasisVector(10, 2)}, 10);
  EXPECT_NEAR(*Coherence(v), 10.0 / 3.0, 1e-15);
}

TEST(CoherenceTest, RandomBasisWithinRangeAndRotationInvariant) {
  std::mt19937_64 gen(18);
  for (int trial = 0; trial < 20; ++trial) {
    const int d = 12, k = 1 + trial % 5;
    const DenseMatrix v =
        DenseMatrix::FromColumns(oracle::RandomOrthonormal(d, k, gen), d);
    const double mu = *Coherence(v);
    EXPECT_GE(mu, 1.0 - 1e-12);
    EXPECT_LE(mu, static_cast<double>(d) / k + 1e-12);
    const std::vector<Vector> rot = oracle::RandomOrthonormal(k, k, gen);
    const DenseMatrix rotated = v * DenseMatrix::FromColumns(rot, k);
    EXPECT_NEAR(*Coherence(rotated), mu, 1e-8);
  }
}

TEST(CoherenceTest, RejectsNonOrthonormalColumns) {
  const DenseMatrix v = DenseMatrix::FromColumns({Vector{1.0, 1.0}}, 2);
  EXPECT_FALSE(Coherence(v).ok());
}

TEST(BuilderTest, AddAtAllPermutationsFillsEveryOrdering) {
  SymmetricTensorBuilder b(3);
  b.AddAtAllPermutations(0, 1, 2, 2.0);
  b.AddAtAllPermutations(1, 1, 1, 3.0);
  const SymmetricTensor3 t = std::move(b).Build();
  ExpectFullySymmetric(t, 0.0);
  EXPECT_EQ(t(2, 0, 1), 2.0);
  EXPECT_EQ(t(1, 1, 1), 3.0);
}

TEST(FromUniqueEntriesTest, RejectsWrongCountAndNonFinite) {
  EXPECT_FALSE(SymmetricTensor3::FromUniqueEntries(2, {{1.0, 2.0}}).ok());
  std::vector<double> four(4, 0.0);
  four[1] = NAN;
  EXPECT_FALSE(SymmetricTensor3::FromUniqueEntries(2, four).ok());
}

}  // namespace
}  // namespace tpmkit
