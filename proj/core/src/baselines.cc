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

#include "sps/baselines.h"

#include <cmath>
#include <stdexcept>
#include <vector>

#include "parallel.h"
#include "sps/random.h"

namespace sps {

void SgldBaselineConfig::Validate() const {
  if (!(step > 0.0)) throw std::invalid_argument("SGLD step must be positive");
  if (batch < 1) throw std::invalid_argument("SGLD batch must be >= 1");
  if (iters < 0) throw std::invalid_argument("SGLD iteration count must be >= 0");
  if (n_chains < 1) throw std::invalid_argument("n_chains must be >= 1");
}

BaselineResult VanillaSgld(const FiniteSumTarget& target,
                           const SgldBaselineConfig& config,
                           std::uint64_t seed) {
  config.Validate();
  const int d = target.dim();
  const int n = target.num_components();
  const double noise_scale = std::sqrt(2.0 * config.step);

  BaselineResult result;
  result.particles.resize(config.n_chains, d);
  std::vector<std::uint64_t> counts(config.n_chains, 0);

  internal::ParallelFor(config.n_chains, config.threads, [&](int c) {
    const auto chain = static_cast<std::uint64_t>(c);
    RandomStream init(seed, chain, StreamPurpose::kInit);
    RandomStream rng(seed, chain, StreamPurpose::kChain);
    Vector x(d);
    for (int j = 0; j < d; ++j) x[j] = init.Normal();
    Vector grad(d);
    std::vector<int> batch(config.batch);
    GradientTally tally;
    for (int t = 0; t < config.iters; ++t) {
      for (int& index : batch) {
        index = static_cast<int>(rng.UniformIndex(static_cast<std::uint64_t>(n)));
      }
      MiniBatchGradient(target, batch, x, &grad, &tally);
      for (int j = 0; j < d; ++j) {
        x[j] += -config.step * grad[j] + noise_scale * rng.Normal();
      }
    }
    result.particles.row(c) = x.transpose();
    counts[c] = tally.count();
  });

  result.gradients_per_chain = counts.front();
  return result;
}

}  // namespace sps
