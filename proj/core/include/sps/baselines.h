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

#ifndef SPS_BASELINES_H_
#define SPS_BASELINES_H_

#include <cstdint>

#include "sps/target.h"
#include "sps/types.h"

namespace sps {

struct SgldBaselineConfig {
  double step = 0.1;  // h
  int batch = 1;
  int iters = 0;  // T
  int n_chains = 1;
  int threads = 0;

  void Validate() const;
};

struct BaselineResult {
  Ensemble particles;
  std::uint64_t gradients_per_chain = 0;
};

// x_{t+1} = x_t - h grad f_b(x_t) + sqrt(2h) xi, fresh batch each step.
// Uses the same seeding as SpsRun: x0 from (seed, c, kInit), transitions
// from (seed, c, kChain), batch drawn before the noise.
BaselineResult VanillaSgld(const FiniteSumTarget& target,
                           const SgldBaselineConfig& config,
                           std::uint64_t seed);

}  // namespace sps

#endif  // SPS_BASELINES_H_
