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

#include "sps/metrics.h"

#include <cmath>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <limits>

#include <gtest/gtest.h>

#include "sps/random.h"

namespace sps {
namespace {

namespace fs = std::filesystem;

Ensemble Gaussian(int rows, int dim, double mean, std::uint64_t seed) {
  RandomStream rng(seed, 0, StreamPurpose::kTest);
  Ensemble e(rows, dim);
  for (int r = 0; r < rows; ++r) {
    for (int j = 0; j < dim; ++j) e(r, j) = mean + rng.Normal();
  }
  return e;
}

fs::path ScratchDir(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("sps_metrics_test_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

TEST(TvEstimateTest, IdenticalEnsemblesGiveZero) {
  const Ensemble e = Gaussian(1000, 3, 0.0, 1);
  const TvEstimate tv = TvMarginalEstimate(e, e);
  EXPECT_EQ(tv.aggregate, 0.0);
  EXPECT_EQ(tv.max(), 0.0);
}

TEST(TvEstimateTest, DisjointSupportsGiveOne) {
  const Ensemble p = Gaussian(500, 2, 0.0, 1).cwiseAbs() * -1.0;  // <= 0
  Ensemble q = Gaussian(700, 2, 0.0, 2).cwiseAbs();
  q.array() += 1.0;  // >= 1
  const TvEstimate tv = TvMarginalEstimate(p, q);
  EXPECT_EQ(tv.aggregate, 1.0);
  EXPECT_EQ(tv.min(), 1.0);
}

TEST(TvEstimateTest, SelfDistanceIsSmall) {
  const TvEstimate tv =
      TvMarginalEstimate(Gaussian(100000, 1, 0.0, 3), Gaussian(100000, 1, 0.0, 4));
  EXPECT_LE(tv.aggregate, 0.03);
  EXPECT_GT(tv.aggregate, 0.0);
}

TEST(TvEstimateTest, HandComputedHistogram) {
  // Edges: span 3 padded by 0.3 on each side, 2 bins of width 1.8
  // -> [-0.3, 1.5) and [1.5, 3.3]. p = {0, 1, 2, 3}: 2 and 2; q = {0, 0, 3}:
  // 2/3 and 1/3. TV = (|1/2 - 2/3| + |1/2 - 1/3|) / 2 = 1/6.
  Ensemble p(4, 1), q(3, 1);
  p << 0, 1, 2, 3;
  q << 0, 0, 3;
  const TvEstimate tv = TvMarginalEstimate(p, q, HistogramSpec{2, 0.1});
  EXPECT_NEAR(tv.aggregate, 1.0 / 6.0, 1e-15);
}

TEST(TvEstimateTest, AggregateIsMeanOfCoordinates) {
  const Ensemble p = Gaussian(2000, 5, 0.0, 5);
  Ensemble q = Gaussian(2000, 5, 0.0, 6);
  q.col(2).array() += 2.0;
  const TvEstimate tv = TvMarginalEstimate(p, q);
  double mean = 0.0;
  for (double v : tv.per_coordinate) mean += v;
  EXPECT_NEAR(tv.aggregate, mean / 5.0, 1e-15);
  EXPECT_EQ(tv.max(), tv.per_coordinate[2]);
  EXPECT_LE(tv.min(), tv.median());
  EXPECT_LE(tv.median(), tv.max());
}

TEST(TvEstimateTest, DegenerateAndDivergedInputs) {
  Ensemble point(10, 1);
  point.setConstant(2.0);
  EXPECT_EQ(TvMarginalEstimate(point, point).aggregate, 0.0);

  Ensemble p = Gaussian(100, 1, 0.0, 7);
  Ensemble q = p;
  q(0, 0) = std::numeric_limits<double>::quiet_NaN();
  q(1, 0) = std::numeric_limits<double>::infinity();
  const TvEstimate tv = TvMarginalEstimate(p, q);
  EXPECT_NEAR(tv.aggregate, 0.02, 1e-12);  // two of 100 particles unmatched
  Ensemble lost(5, 1);
  lost.setConstant(std::numeric_limits<double>::quiet_NaN());
  EXPECT_EQ(TvMarginalEstimate(p, lost).aggregate, 1.0);
}

TEST(TvEstimateTest, RejectsBadInput) {
  EXPECT_THROW(TvMarginalEstimate(Ensemble(0, 2), Gaussian(3, 2, 0, 1)),
               std::invalid_argument);
  EXPECT_THROW(TvMarginalEstimate(Gaussian(3, 1, 0, 1), Gaussian(3, 2, 0, 1)),
               std::invalid_argument);
  EXPECT_THROW(TvMarginalEstimate(Gaussian(3, 1, 0, 1), Gaussian(3, 1, 0, 1),
                                  HistogramSpec{1, 0.05}),
               std::invalid_argument);
}

TEST(EnsembleStatsTest, MeanVarianceMoment) {
  Ensemble e(3, 2);
  e << 1, 2, 3, 4, 5, 6;
  const EnsembleStats s = ComputeEnsembleStats(e);
  EXPECT_TRUE(s.mean.isApprox(Vector{{3.0, 4.0}}));
  EXPECT_TRUE(s.variance.isApprox(Vector{{4.0, 4.0}}));
  EXPECT_DOUBLE_EQ(s.second_moment, (5.0 + 25.0 + 61.0) / 3.0);
}

TEST(EnsembleIoTest, RoundTripAndLittleEndianLayout) {
  const fs::path dir = ScratchDir("io");
  Ensemble e(2, 2);
  e << 1.0, -2.5, 3.25, 1e-300;
  WriteEnsemble(dir / "e.bin", e, R"({"note":"x"})");
  EXPECT_EQ(fs::file_size(dir / "e.bin"), 32u);
  std::ifstream raw(dir / "e.bin", std::ios::binary);
  unsigned char bytes[8];
  raw.read(reinterpret_cast<char*>(bytes), 8);
  // 1.0 = 0x3FF0000000000000, least significant byte first.
  const unsigned char one[8] = {0, 0, 0, 0, 0, 0, 0xF0, 0x3F};
  EXPECT_EQ(std::memcmp(bytes, one, 8), 0);
  const Ensemble back = ReadEnsemble(dir / "e.bin");
  EXPECT_EQ(back, e);
  std::ifstream side(dir / "e.bin.json");
  std::string text((std::istreambuf_iterator<char>(side)), {});
  EXPECT_NE(text.find("float64-le-rowmajor"), std::string::npos);
  EXPECT_NE(text.find("\"note\""), std::string::npos);
}

TEST(EnsembleIoTest, SizeMismatchIsAnError) {
  const fs::path dir = ScratchDir("mismatch");
  WriteEnsemble(dir / "e.bin", Gaussian(4, 3, 0, 1));
  fs::resize_file(dir / "e.bin", 40);
  EXPECT_THROW(ReadEnsemble(dir / "e.bin"), std::runtime_error);
  EXPECT_THROW(ReadEnsemble(dir / "missing.bin"), std::runtime_error);
}

ReferenceConfig SmallReference() {
  ReferenceConfig c;
  c.budget = 20000;
  c.chains = 20;
  c.burn_in = 200;
  c.thin = 10;
  c.threads = 1;
  return c;
}

MixtureTarget::Params SmallTarget() {
  MixtureTarget::Params p;
  p.dim = 2;
  p.num_components = 10;
  p.seed = 5;
  return p;
}

TEST(ReferenceTest, ShapeReflectionAndAcceptance) {
  const ReferenceConfig cfg = SmallReference();
  EXPECT_EQ(cfg.StepsPerChain(), 1000);
  EXPECT_EQ(cfg.SamplesPerChain(), 80);
  const MixtureTarget t(SmallTarget());
  const ReferenceResult r = GenerateReference(t, cfg, 5);
  ASSERT_EQ(r.particles.rows(), 2 * 20 * 80);
  const Eigen::Index half = 20 * 80;
  for (Eigen::Index i = 0; i < half; i += 97) {
    EXPECT_TRUE((r.particles.row(i) + r.particles.row(half + i))
                    .isApprox(2.0 * t.bias().transpose()));
  }
  EXPECT_GT(r.acceptance_rate, 0.3);
  EXPECT_LE(r.acceptance_rate, 1.0);
}

TEST(ReferenceTest, WithoutReflectionKeepsOnlyChains) {
  ReferenceConfig cfg = SmallReference();
  cfg.reflect = false;
  const ReferenceResult r = GenerateReference(MixtureTarget(SmallTarget()), cfg, 5);
  EXPECT_EQ(r.particles.rows(), 20 * 80);
}

TEST(ReferenceTest, BudgetTooSmallForBurnIn) {
  ReferenceConfig cfg = SmallReference();
  cfg.budget = 20 * 200;
  EXPECT_THROW(cfg.Validate(), std::invalid_argument);
}

TEST(ReferenceTest, ReplayIsByteIdentical) {
  ReferenceConfig cfg = SmallReference();
  const MixtureTarget t(SmallTarget());
  const Ensemble a = GenerateReference(t, cfg, 5).particles;
  cfg.threads = 3;
  const Ensemble b = GenerateReference(t, cfg, 5).particles;
  EXPECT_EQ(std::memcmp(a.data(), b.data(), sizeof(double) * a.size()), 0);
}

TEST(ReferenceTest, CacheHitAndInvalidation) {
  const fs::path dir = ScratchDir("cache");
  const ReferenceConfig cfg = SmallReference();
  const MixtureTarget::Params params = SmallTarget();
  const ReferenceResult first = ReferenceEnsemble(params, cfg, dir);
  EXPECT_FALSE(first.cache_hit);
  const std::string stem = ReferenceCacheStem(params, cfg);
  EXPECT_EQ(stem.rfind("ref_d2_seed5_budget20000_", 0), 0u) << stem;
  EXPECT_EQ(first.path.filename().string(), stem + ".bin");

  const ReferenceResult second = ReferenceEnsemble(params, cfg, dir);
  EXPECT_TRUE(second.cache_hit);
  EXPECT_EQ(second.particles, first.particles);
  EXPECT_EQ(second.acceptance_rate, first.acceptance_rate);

  // Any parameter change moves to a new key.
  ReferenceConfig stepped = cfg;
  stepped.step = 0.2;
  EXPECT_NE(ReferenceCacheStem(params, stepped), stem);
  MixtureTarget::Params shifted = params;
  shifted.bias = 2.0;
  EXPECT_NE(ReferenceCacheStem(shifted, cfg), stem);
  EXPECT_FALSE(ReferenceEnsemble(shifted, cfg, dir).cache_hit);

  // A sidecar whose key disagrees is ignored and rewritten.
  {
    std::ofstream side(first.path.string() + ".json", std::ios::trunc);
    side << R"({"format":"float64-le-rowmajor","rows":1,"dim":2,"meta":{"key":"stale"}})";
  }
  const ReferenceResult regenerated = ReferenceEnsemble(params, cfg, dir);
  EXPECT_FALSE(regenerated.cache_hit);
  EXPECT_EQ(regenerated.particles, first.particles);
  EXPECT_TRUE(ReferenceEnsemble(params, cfg, dir).cache_hit);
}

}  // namespace
}  // namespace sps
