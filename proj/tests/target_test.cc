// Copyright 2026 The SPS Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "sps/target.h"

#include <cmath>
#include <numbers>
#include <vector>

#include <gtest/gtest.h>

namespace sps {
namespace {

Vector Scalar(double v) { return Vector::Constant(1, v); }

MixtureTarget OneDimensional(double mu) {
  return MixtureTarget(Scalar(0.0), {Scalar(mu)});
}

TEST(MixtureTargetTest, EnergyAtKnownPoints) {
  // f(x) = -log(exp(-(x-mu)^2/2) + exp(-(x+mu)^2/2)), evaluated by hand.
  EXPECT_NEAR(OneDimensional(3.0).ComponentEnergy(0, Scalar(0.0)),
              4.5 - std::numbers::ln2, 1e-14);
  EXPECT_NEAR(OneDimensional(2.0).ComponentEnergy(0, Scalar(0.0)),
              2.0 - std::numbers::ln2, 1e-14);
  EXPECT_NEAR(OneDimensional(2.0).ComponentEnergy(0, Scalar(1.0)),
              0.48185007208219025965, 1e-14);
}

TEST(MixtureTargetTest, EnergyIsStableFarFromModes) {
  const MixtureTarget t = OneDimensional(2.0);
  // Leading behaviour (|x| - mu)^2 / 2 once one mode dominates.
  EXPECT_NEAR(t.ComponentEnergy(0, Scalar(1000.0)), 0.5 * 998.0 * 998.0, 1e-6);
  EXPECT_TRUE(std::isfinite(t.ComponentEnergy(0, Scalar(-1e5))));
}

TEST(MixtureTargetTest, GradientMatchesFiniteDifferences) {
  MixtureTarget::Params p;
  p.dim = 6;
  p.num_components = 5;
  p.seed = 3;
  const MixtureTarget t(p);
  RandomStream rng(1, 0, StreamPurpose::kTest);
  for (int trial = 0; trial < 10; ++trial) {
    Vector x(p.dim);
    for (int j = 0; j < p.dim; ++j) x[j] = 3.0 + 2.0 * rng.Normal();
    for (int i = 0; i < p.num_components; ++i) {
      const Vector g = t.ComponentGradient(i, x);
      for (int j = 0; j < p.dim; ++j) {
        const double h = 1e-5;
        Vector xp = x, xm = x;
        xp[j] += h;
        xm[j] -= h;
        const double fd =
            (t.ComponentEnergy(i, xp) - t.ComponentEnergy(i, xm)) / (2 * h);
        ASSERT_NEAR(g[j], fd, 1e-6 * (1.0 + std::abs(fd)));
      }
    }
  }
}

TEST(MixtureTargetTest, GeneratedCentresFollowTheRecipe) {
  MixtureTarget::Params p;
  p.dim = 4;
  p.num_components = 3;
  p.seed = 77;
  const MixtureTarget t(p);
  RandomStream rng(p.seed, 0, StreamPurpose::kTarget);
  const double scale = std::sqrt(10.0 / p.dim);
  for (int i = 0; i < p.num_components; ++i) {
    for (int j = 0; j < p.dim; ++j) {
      EXPECT_DOUBLE_EQ(t.centres()[i][j], scale * (p.mu_mean + rng.Normal()));
    }
  }
  EXPECT_TRUE(t.bias().isApprox(Vector::Constant(p.dim, 3.0)));
  double max_sq = 0.0;
  for (const Vector& mu : t.centres()) max_sq = std::max(max_sq, mu.squaredNorm());
  EXPECT_DOUBLE_EQ(t.smoothness(), 1.0 + max_sq);
}

TEST(MixtureTargetTest, ReflectionSymmetry) {
  MixtureTarget::Params p;
  p.dim = 5;
  const MixtureTarget t(p);
  const Vector c = *t.ReflectionCenter();
  RandomStream rng(2, 0, StreamPurpose::kTest);
  for (int trial = 0; trial < 20; ++trial) {
    Vector x(p.dim);
    for (int j = 0; j < p.dim; ++j) x[j] = 3.0 + 3.0 * rng.Normal();
    const Vector y = 2.0 * c - x;
    EXPECT_NEAR(t.Energy(x), t.Energy(y), 1e-10);
    EXPECT_TRUE(t.Gradient(x).isApprox(-t.Gradient(y), 1e-12));
  }
}

TEST(MixtureTargetTest, SameSeedSameTarget) {
  MixtureTarget::Params p;
  p.seed = 5;
  const MixtureTarget a(p), b(p);
  for (int i = 0; i < p.num_components; ++i) {
    EXPECT_EQ(a.centres()[i], b.centres()[i]);
  }
  p.seed = 6;
  EXPECT_NE(MixtureTarget(p).centres()[0], a.centres()[0]);
}

TEST(MixtureTargetTest, RejectsBadInput) {
  EXPECT_THROW(OneDimensional(1.0).ComponentEnergy(1, Scalar(0.0)), std::out_of_range);
  EXPECT_THROW(MixtureTarget(Scalar(0.0), {}), std::invalid_argument);
  EXPECT_THROW(MixtureTarget(Scalar(0.0), {Vector::Zero(2)}), std::invalid_argument);
  MixtureTarget::Params p;
  p.dim = 0;
  EXPECT_THROW(MixtureTarget{p}, std::invalid_argument);
}

TEST(QuadraticTargetTest, EnergyAndGradient) {
  const QuadraticTarget t({Scalar(1.0), Scalar(-1.0)}, 2.0);
  EXPECT_DOUBLE_EQ(t.ComponentEnergy(0, Scalar(3.0)), 4.0);
  EXPECT_DOUBLE_EQ(t.Energy(Scalar(3.0)), 0.5 * (4.0 + 16.0));
  EXPECT_DOUBLE_EQ(t.Gradient(Scalar(3.0))[0], 6.0);
  EXPECT_DOUBLE_EQ(t.smoothness(), 2.0);
  const QuadraticTarget iso = QuadraticTarget::Isotropic(3, 4);
  EXPECT_EQ(iso.dim(), 3);
  EXPECT_EQ(iso.num_components(), 4);
  EXPECT_TRUE(iso.Gradient(Vector::Ones(3)).isApprox(Vector::Ones(3)));
}

TEST(MiniBatchTest, SampleAndValidate) {
  RandomStream rng(4, 0, StreamPurpose::kTest);
  const MiniBatch b = SampleMiniBatch(rng, 10, 25);
  EXPECT_EQ(b.size(), 25);
  EXPECT_NO_THROW(b.Validate(10));
  for (int i : b.indices) {
    EXPECT_GE(i, 0);
    EXPECT_LT(i, 10);
  }
  EXPECT_THROW(SampleMiniBatch(rng, 10, 0), std::invalid_argument);
  EXPECT_THROW(MiniBatch{}.Validate(10), std::invalid_argument);
  EXPECT_THROW(MiniBatch{{10}}.Validate(10), std::out_of_range);
  EXPECT_EQ(MiniBatch::Full(4).indices, (std::vector<int>{0, 1, 2, 3}));
}

TEST(MiniBatchTest, GradientAveragesAndCounts) {
  const QuadraticTarget t({Scalar(1.0), Scalar(5.0)});
  GradientTally tally;
  const Vector g = MiniBatchGradient(t, MiniBatch{{0, 1, 1}}, Scalar(0.0), &tally);
  EXPECT_DOUBLE_EQ(g[0], (-1.0 - 5.0 - 5.0) / 3.0);
  EXPECT_EQ(tally.count(), 3u);
  EXPECT_DOUBLE_EQ(MiniBatchGradient(t, MiniBatch::Full(2), Scalar(0.0))[0],
                   t.Gradient(Scalar(0.0))[0]);
  const std::vector<int> idx = {1};
  EXPECT_DOUBLE_EQ(MiniBatchEnergy(t, idx, Scalar(0.0)), 12.5);
}

TEST(MiniBatchTest, FullBatchHasNoVarianceAndSigmaMatchesDefinition) {
  const QuadraticTarget t({Scalar(1.0), Scalar(5.0)});
  // grad f_i(0) = -a_i; mean -3; deviations +-2.
  EXPECT_DOUBLE_EQ(EstimateSigma2(t, Scalar(0.0)), 4.0);
}

TEST(MiniBatchTest, VarianceFollowsOneOverBatchSize) {
  MixtureTarget::Params p;
  p.dim = 3;
  p.num_components = 20;
  const MixtureTarget t(p);
  const Vector x = Vector::Constant(p.dim, 2.0);
  const Vector full = t.Gradient(x);
  const double sigma2 = EstimateSigma2(t, x);
  RandomStream rng(8, 0, StreamPurpose::kTest);
  for (int m : {1, 4}) {
    constexpr int kDraws = 40000;
    double s = 0.0, s2 = 0.0;
    for (int k = 0; k < kDraws; ++k) {
      const double e =
          (MiniBatchGradient(t, SampleMiniBatch(rng, p.num_components, m), x) - full)
              .squaredNorm();
      s += e;
      s2 += e * e;
    }
    const double mean = s / kDraws;
    const double se = std::sqrt((s2 / kDraws - mean * mean) / kDraws);
    EXPECT_NEAR(mean, sigma2 / m, 4.0 * se) << "m=" << m;
  }
}

}  // namespace
}  // namespace sps
