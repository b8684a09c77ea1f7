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

#include "sps/inner.h"

#include <cmath>
#include <limits>

#include <gtest/gtest.h>

namespace sps {
namespace {

InnerProblem MakeProblem(const FiniteSumTarget& target, const Vector& center,
                         double eta, MiniBatch batch) {
  InnerProblem p;
  p.target = &target;
  p.center = center;
  p.eta = eta;
  p.batch = std::move(batch);
  return p;
}

TEST(InnerProblemTest, ProximalEnergyAndGradient) {
  const QuadraticTarget t = QuadraticTarget::Isotropic(2);
  const InnerProblem p = MakeProblem(t, Vector::Constant(2, 2.0), 0.5, MiniBatch::Full(1));
  const Vector z = Vector::Constant(2, 1.0);
  // |z|^2/2 + |z - c|^2/(2 eta) = 1 + 2/1 = 3.
  EXPECT_DOUBLE_EQ(p.G(z), 3.0);
  Vector g;
  GradientTally tally;
  p.GradG(z, &g, &tally);
  EXPECT_TRUE(g.isApprox(Vector::Constant(2, 1.0 - 2.0)));
  EXPECT_EQ(tally.count(), 1u);
}

TEST(InnerProblemTest, ValidationAndWarnings) {
  const QuadraticTarget t = QuadraticTarget::Isotropic(2, 1, 4.0);
  InnerProblem p = MakeProblem(t, Vector::Zero(2), 0.1, MiniBatch::Full(1));
  EXPECT_NO_THROW(p.Validate());
  EXPECT_TRUE(p.Warnings().empty());
  p.eta = 1.0;  // > 1/(2L) = 1/8
  EXPECT_EQ(p.Warnings().size(), 1u);
  p.eta = 0.0;
  EXPECT_THROW(p.Validate(), std::invalid_argument);
  p.eta = 1.0;
  p.center = Vector::Zero(3);
  EXPECT_THROW(p.Validate(), std::invalid_argument);
  p.center = Vector::Zero(2);
  p.target = nullptr;
  EXPECT_THROW(p.Validate(), std::invalid_argument);
}

TEST(SgldInnerTest, ConfigValidation) {
  SgldInnerConfig c{0.1, 0.1, 0, 2, 1};
  EXPECT_NO_THROW(c.Validate(1.0));
  EXPECT_EQ(c.window(), 1);
  c.s_switch = 1;  // empty window
  EXPECT_THROW(c.Validate(1.0), std::invalid_argument);
  c.s_switch = 0;
  c.tau1 = 4.0;  // tau >= 4 eta
  EXPECT_THROW(c.Validate(1.0), std::invalid_argument);
  c.tau1 = -0.1;
  EXPECT_THROW(c.Validate(1.0), std::invalid_argument);
  c.tau1 = 0.5;
  EXPECT_EQ(c.Warnings().size(), 1u);
  c.tau1 = c.tau2 = 0.01;
  EXPECT_TRUE(c.Warnings().empty());
}

// Replays the documented draw order by hand: d initial normals, then per
// step d noise normals (a size-1 outer batch needs no index draw).
TEST(SgldInnerTest, MatchesHandReplay) {
  const QuadraticTarget t({Vector::Constant(3, 1.5)}, 0.7);
  const Vector x0 = Vector::Constant(3, -0.5);
  const double eta = 1.0, tau = 0.1;
  const InnerProblem p = MakeProblem(t, x0, eta, MiniBatch{{0}});
  const SgldInnerConfig cfg{tau, tau, 2, 5, 1};

  RandomStream rng(21, 0, StreamPurpose::kTest);
  const SgldInnerResult got = InnerSgld(p, cfg, rng);

  RandomStream replay(21, 0, StreamPurpose::kTest);
  const double scale = std::sqrt(0.2 / 0.975);
  EXPECT_NEAR(scale, 0.45291081365783830024, 1e-15);
  Vector z(3);
  for (int j = 0; j < 3; ++j) z[j] = x0[j] + std::sqrt(eta) * replay.Normal();
  Vector sum = Vector::Zero(3);
  for (int s = 0; s < 5; ++s) {
    Vector zp(3);
    for (int j = 0; j < 3; ++j) zp[j] = z[j] + scale * replay.Normal();
    const Vector grad = 0.7 * (zp - Vector::Constant(3, 1.5)) + (zp - x0) / eta;
    z = zp - tau * grad;
    if (s > 2) sum += zp;
  }
  EXPECT_EQ(got.window, 2);
  EXPECT_EQ(got.gradients, 5u);
  EXPECT_TRUE(got.z.isApprox(sum / 2.0, 1e-14));
  EXPECT_EQ(rng.position(), replay.position());
}

TEST(SgldInnerTest, InnerBatchDrawsFromOuterBatch) {
  const QuadraticTarget t({Vector::Constant(1, 0.0), Vector::Constant(1, 100.0),
                           Vector::Constant(1, 7.0)});
  const InnerProblem p = MakeProblem(t, Vector::Zero(1), 1.0, MiniBatch{{0, 2}});
  const SgldInnerConfig cfg{0.1, 0.1, 0, 50, 2};
  RandomStream rng(5, 0, StreamPurpose::kTest);
  const SgldInnerResult r = InnerSgld(p, cfg, rng);
  EXPECT_EQ(r.gradients, 100u);
  // Component 1 (centre 100) is outside the outer batch and never pulls.
  EXPECT_LT(std::abs(r.z[0]), 20.0);
}

TEST(UldKernelTest, CovarianceEntriesAtReferencePoint) {
  const UldKernel k = UldKernel::Make(1.0, 0.1);
  EXPECT_NEAR(k.sigma_zz, 6.189190658564339870607e-4, 1e-12);
  EXPECT_NEAR(k.sigma_zv, 9.055917006062712341437e-3, 1e-12);
  EXPECT_NEAR(k.sigma_vv, 0.18126924692201814133006, 1e-12);
  EXPECT_NEAR(k.a, std::exp(-0.1), 1e-15);
  // The Cholesky factor reproduces the covariance.
  EXPECT_NEAR(k.chol_zz * k.chol_zz, k.sigma_zz, 1e-15);
  EXPECT_NEAR(k.chol_zz * k.chol_vz, k.sigma_zv, 1e-15);
  EXPECT_NEAR(k.chol_vz * k.chol_vz + k.chol_vv * k.chol_vv, k.sigma_vv, 1e-15);
}

TEST(UldKernelTest, PositiveSemidefiniteAcrossGrid) {
  for (double gamma : {0.1, 0.5, 1.0, 2.0, 10.0}) {
    for (int i = 1; i <= 500; ++i) {
      const double h = 5.0 * i / 500.0;
      const UldKernel k = UldKernel::Make(gamma, h / gamma);
      ASSERT_GE(k.sigma_zz, 0.0);
      ASSERT_GE(k.sigma_vv, 0.0);
      ASSERT_GE(k.sigma_zz * k.sigma_vv - k.sigma_zv * k.sigma_zv,
                -1e-12 * k.sigma_zz * k.sigma_vv)
          << "gamma=" << gamma << " h=" << h;
    }
  }
}

TEST(UldKernelTest, SmallStepSeriesIsAccurate) {
  // sigma_zz ~ 2 tau^3 / 3 as tau -> 0 (gamma = 1).
  for (double tau : {1e-2, 1e-3, 1e-4}) {
    const UldKernel k = UldKernel::Make(1.0, tau);
    EXPECT_NEAR(k.sigma_zz / (2.0 * tau * tau * tau / 3.0), 1.0, 2.0 * tau);
  }
}

TEST(UldKernelTest, ZeroStepIsIdentity) {
  for (double tau : {0.0, 1e-14}) {
    const UldKernel k = UldKernel::Make(1.3, tau);
    EXPECT_NEAR(k.a, 1.0, 1e-10);
    EXPECT_NEAR(k.pos_from_vel, 0.0, 1e-10);
    EXPECT_NEAR(k.pos_from_grad, 0.0, 1e-10);
    EXPECT_NEAR(k.vel_from_grad, 0.0, 1e-10);
    EXPECT_NEAR(k.sigma_zz, 0.0, 1e-10);
    EXPECT_NEAR(k.sigma_zv, 0.0, 1e-10);
    EXPECT_NEAR(k.sigma_vv, 0.0, 1e-10);
  }
  EXPECT_THROW(UldKernel::Make(0.0, 0.1), std::invalid_argument);
  EXPECT_THROW(UldKernel::Make(1.0, -0.1), std::invalid_argument);
}

TEST(UldInnerTest, CountsGradients) {
  const QuadraticTarget t = QuadraticTarget::Isotropic(2, 3);
  const InnerProblem p = MakeProblem(t, Vector::Zero(2), 1.0, MiniBatch{{0, 1}});
  RandomStream rng(3, 0, StreamPurpose::kTest);
  const UldInnerResult r = InnerUld(p, UldInnerConfig{2.0, 0.1, 7}, rng);
  EXPECT_EQ(r.gradients, 14u);
  EXPECT_EQ(r.z.size(), 2);
}

TEST(MalaTest, LogAcceptZeroOnDiagonalAndAntisymmetric) {
  MixtureTarget::Params params;
  params.dim = 4;
  params.num_components = 6;
  const MixtureTarget t(params);
  const InnerProblem p = MakeProblem(t, Vector::Constant(4, 2.5), 0.3, MiniBatch{{0, 3, 5}});
  RandomStream rng(6, 0, StreamPurpose::kTest);
  for (int trial = 0; trial < 50; ++trial) {
    Vector z(4), w(4);
    for (int j = 0; j < 4; ++j) {
      z[j] = 3.0 + rng.Normal();
      w[j] = 3.0 + rng.Normal();
    }
    EXPECT_EQ(MalaLogAccept(p, z, z, 0.05), 0.0);
    const double forward = MalaLogAccept(p, z, w, 0.05);
    const double backward = MalaLogAccept(p, w, z, 0.05);
    EXPECT_EQ(forward, -backward);
  }
}

TEST(MalaTest, GradientAccounting) {
  const QuadraticTarget t = QuadraticTarget::Isotropic(3, 4);
  const InnerProblem p = MakeProblem(t, Vector::Zero(3), 0.5, MiniBatch{{0, 1, 2}});
  MalaInnerConfig cfg;
  cfg.tau = 0.05;
  cfg.s_total = 20;
  cfg.warm_start = {2.0, 0.1, 5};
  RandomStream rng(8, 0, StreamPurpose::kTest);
  const MalaInnerResult r = InnerMala(p, cfg, rng);
  EXPECT_EQ(r.gradients, (5u + 1u + 20u) * 3u);
  EXPECT_EQ(r.steps, 20);
  EXPECT_GT(r.acceptance_rate(), 0.5);
}

TEST(MalaTest, PlainMalaWithInfiniteEta) {
  const QuadraticTarget t = QuadraticTarget::Isotropic(1);
  const InnerProblem p = MakeProblem(t, Vector::Zero(1),
                                     std::numeric_limits<double>::infinity(),
                                     MiniBatch::Full(1));
  EXPECT_NO_THROW(p.Validate());
  const Vector z = Vector::Constant(1, 2.0);
  EXPECT_DOUBLE_EQ(p.G(z), 2.0);
  RandomStream rng(2, 0, StreamPurpose::kTest);
  MalaKernel kernel(p, 0.5, z, nullptr);
  double s2 = 0.0;
  constexpr int kSteps = 200000;
  for (int i = 0; i < kSteps; ++i) {
    kernel.Step(rng);
    s2 += kernel.state().squaredNorm();
  }
  EXPECT_NEAR(s2 / kSteps, 1.0, 0.05);
}

TEST(RgoExactGaussianTest, Moments) {
  RandomStream rng(10, 0, StreamPurpose::kTest);
  const Vector x0 = Vector::Constant(2, 2.0);
  constexpr int kDraws = 100000;
  Vector s = Vector::Zero(2), s2 = Vector::Zero(2);
  for (int i = 0; i < kDraws; ++i) {
    const Vector z = RgoExactGaussian(x0, 1.0, 1.0, rng);
    s += z;
    s2 += z.cwiseAbs2();
  }
  for (int j = 0; j < 2; ++j) {
    const double mean = s[j] / kDraws;
    const double var = s2[j] / kDraws - mean * mean;
    EXPECT_NEAR(mean, 1.0, 4.0 * std::sqrt(0.5 / kDraws));
    EXPECT_NEAR(var, 0.5, 4.0 * 0.5 * std::sqrt(2.0 / kDraws));
  }
  EXPECT_THROW(RgoExactGaussian(x0, 0.0, 1.0, rng), std::invalid_argument);
}

}  // namespace
}  // namespace sps
