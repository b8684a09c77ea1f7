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

#include <benchmark/benchmark.h>

#include "sps/baselines.h"
#include "sps/inner.h"
#include "sps/metrics.h"
#include "sps/random.h"
#include "sps/sps.h"
#include "sps/target.h"

namespace sps {
namespace {

MixtureTarget BenchTarget(int d) {
  return MixtureTarget(MixtureTarget::Params{d, 100, 2024, 3.0, 2.0});
}

void BM_PhiloxU64(benchmark::State& state) {
  RandomStream rng(1, 0, StreamPurpose::kTest);
  for (auto _ : state) benchmark::DoNotOptimize(rng.NextU64());
}
BENCHMARK(BM_PhiloxU64);

void BM_Normal(benchmark::State& state) {
  RandomStream rng(1, 0, StreamPurpose::kTest);
  for (auto _ : state) benchmark::DoNotOptimize(rng.Normal());
}
BENCHMARK(BM_Normal);

void BM_ComponentGradient(benchmark::State& state) {
  const int d = static_cast<int>(state.range(0));
  const MixtureTarget target = BenchTarget(d);
  const Vector x = Vector::Constant(d, 2.5);
  Vector out = Vector::Zero(d);
  int i = 0;
  for (auto _ : state) {
    target.AccumulateComponentGradient(i, x, 1.0, &out);
    i = (i + 1) % 100;
    benchmark::DoNotOptimize(out.data());
  }
}
BENCHMARK(BM_ComponentGradient)->Arg(10)->Arg(100);

// Cost per inner SGLD iteration at the benchmark settings (b_o = b_in = 1).
void BM_InnerSgldStep(benchmark::State& state) {
  const int d = static_cast<int>(state.range(0));
  const MixtureTarget target = BenchTarget(d);
  const InnerProblem problem{&target, Vector::Constant(d, 2.5), 4.0, MiniBatch{{7}}};
  const SgldInnerConfig config{0.2, 0.2, 78, 80, 1};
  RandomStream rng(2, 0, StreamPurpose::kTest);
  for (auto _ : state) benchmark::DoNotOptimize(InnerSgld(problem, config, rng).z.data());
  state.SetItemsProcessed(state.iterations() * config.s_total);
}
BENCHMARK(BM_InnerSgldStep)->Arg(10)->Arg(100);

void BM_InnerMala(benchmark::State& state) {
  const MixtureTarget target = BenchTarget(10);
  const InnerProblem problem{&target, Vector::Constant(10, 2.5), 4.0, MiniBatch{{7}}};
  const MalaInnerConfig config{0.1, 40, UldInnerConfig{2.0, 0.1, 10}};
  RandomStream rng(3, 0, StreamPurpose::kTest);
  for (auto _ : state) benchmark::DoNotOptimize(InnerMala(problem, config, rng).z.data());
  state.SetItemsProcessed(state.iterations() * config.s_total);
}
BENCHMARK(BM_InnerMala);

void BM_VanillaSgldChains(benchmark::State& state) {
  const MixtureTarget target = BenchTarget(10);
  const SgldBaselineConfig config{0.8, 1, 1000, 100, 1};
  for (auto _ : state) benchmark::DoNotOptimize(VanillaSgld(target, config, 1).particles.data());
  state.SetItemsProcessed(state.iterations() * config.iters * config.n_chains);
}
BENCHMARK(BM_VanillaSgldChains)->Unit(benchmark::kMillisecond);

void BM_TvEstimate(benchmark::State& state) {
  const auto rows = static_cast<int>(state.range(0));
  Ensemble p(rows, 10), q(rows, 10);
  RandomStream rng(4, 0, StreamPurpose::kTest);
  for (Eigen::Index i = 0; i < p.size(); ++i) {
    p.data()[i] = rng.Normal();
    q.data()[i] = rng.Normal() + 0.1;
  }
  for (auto _ : state) benchmark::DoNotOptimize(TvMarginalEstimate(p, q).aggregate);
}
BENCHMARK(BM_TvEstimate)->Arg(10000)->Arg(200000)->Unit(benchmark::kMillisecond);

}  // namespace
}  // namespace sps

BENCHMARK_MAIN();
