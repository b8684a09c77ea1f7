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

#ifndef SPS_METRICS_H_
#define SPS_METRICS_H_

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "sps/target.h"
#include "sps/types.h"

namespace sps {

// Per coordinate, both ensembles are binned on the same edges spanning the
// joint [min, max] widened by `padding` * (max - min) on each side.
struct HistogramSpec {
  int bins = 100;
  double padding = 0.05;

  void Validate() const;
};

// per_coordinate[i] = (1/2) sum_bins |p_bin - q_bin| in [0, 1];
// aggregate = mean of per_coordinate, i.e. (1/(2d)) sum of raw L1 distances.
struct TvEstimate {
  std::vector<double> per_coordinate;
  double aggregate = 0.0;

  double min() const;
  double median() const;
  double max() const;
};

TvEstimate TvMarginalEstimate(const Ensemble& samples_p,
                              const Ensemble& samples_q,
                              const HistogramSpec& spec = {});

struct EnsembleStats {
  Vector mean;
  Vector variance;  // unbiased; zero for a single particle
  double second_moment = 0.0;  // mean of |x|^2
};

EnsembleStats ComputeEnsembleStats(const Ensemble& ensemble);

// Long-run full-gradient MALA on f (no proximal term, batch = all n).
// Each chain runs budget / chains steps: `burn_in` discarded, then one
// particle kept every `thin` steps. Chains start from N(0, I). When the target
// reports a reflection centre c, every kept particle x is paired with 2c - x,
// which is exact for such targets and balances modes MALA cannot cross.
struct ReferenceConfig {
  std::uint64_t budget = 1'000'000;  // full-gradient MALA steps, all chains
  int chains = 1000;
  int burn_in = 500;
  int thin = 5;
  double step = 0.25;
  bool reflect = true;
  int threads = 0;

  void Validate() const;
  int StepsPerChain() const;
  int SamplesPerChain() const;
};

struct ReferenceResult {
  Ensemble particles;
  double acceptance_rate = 0.0;
  bool cache_hit = false;
  std::filesystem::path path;  // empty when not cached
};

ReferenceResult GenerateReference(const FiniteSumTarget& target,
                                  const ReferenceConfig& config,
                                  std::uint64_t seed);

// Cached variant for the mixture benchmark target. The cache file stem is
//   ref_d{d}_seed{seed}_budget{budget}_{hash}
// where {hash} covers every remaining target and reference parameter, so a
// change to any of them misses the cache.
ReferenceResult ReferenceEnsemble(const MixtureTarget::Params& target_params,
                                  const ReferenceConfig& config,
                                  const std::filesystem::path& cache_dir);

std::string ReferenceCacheStem(const MixtureTarget::Params& target_params,
                               const ReferenceConfig& config);

// Flat little-endian float64, row-major (particles x d), with a JSON sidecar
// "<path>.json" holding {"format", "rows", "dim", "meta"}.
void WriteEnsemble(const std::filesystem::path& path, const Ensemble& ensemble,
                   const std::string& meta_json = "{}");
Ensemble ReadEnsemble(const std::filesystem::path& path);

}  // namespace sps

#endif  // SPS_METRICS_H_
