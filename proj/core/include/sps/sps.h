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

// Stochastic proximal sampler: alternate an exact Gaussian smoothing step
//   x_{k+1/2} = x_k + sqrt(eta) xi
// with an approximate draw from the mini-batch RGO
//   x_{k+1} ~ exp(-f_b(z) - |z - x_{k+1/2}|^2 / (2 eta)).

#ifndef SPS_SPS_H_
#define SPS_SPS_H_

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "sps/inner.h"
#include "sps/random.h"
#include "sps/target.h"
#include "sps/types.h"

namespace sps {

// Replaces the inner sampler with the exact RGO of f_b(z) = c |z|^2 / 2.
// Only meaningful on quadratic targets; consumes no gradients.
struct ExactQuadraticRgo {
  double quad_coeff = 0.0;
};

using InnerConfig =
    std::variant<SgldInnerConfig, MalaInnerConfig, ExactQuadraticRgo>;

struct OuterConfig {
  int k_total = 1;
  double eta = 0.5;
  int outer_batch = 1;
  InnerConfig inner = SgldInnerConfig{};
  int n_chains = 1;
  // Per-chain cap on component-gradient evaluations.
  std::optional<std::uint64_t> gradient_budget;
  // Store the full ensemble every this many iterations (0: never).
  int snapshot_every = 0;
  // Worker threads for the chain loop; 0 picks hardware concurrency.
  int threads = 0;

  void Validate() const;
  std::vector<std::string> Warnings(const FiniteSumTarget& target) const;
};

// Component gradients consumed by one outer step.
std::uint64_t StepGradientCost(const OuterConfig& config);
// min(K, budget / step cost). Throws when the budget cannot fund one step.
int EffectiveOuterSteps(const OuterConfig& config);

struct ChainState {
  Vector x;
  std::uint64_t gradients = 0;
};

struct StepDiagnostics {
  double acceptance_rate = 0.0;  // MALA only
  int window = 0;                // SGLD only
};

struct RunRecord {
  int iteration = 0;  // outer steps completed
  std::uint64_t gradients = 0;  // cumulative per chain
  double second_moment = 0.0;   // mean over chains of |x|^2
  double acceptance_rate = 0.0;
  int window = 0;
  std::optional<Ensemble> snapshot;
};

struct RunResult {
  Ensemble particles;
  std::vector<RunRecord> records;
  std::uint64_t gradients_per_chain = 0;
};

// Stage 1 of an outer step: x + sqrt(eta) xi with d fresh normals.
Vector GaussianSmoothing(const Vector& x, double eta, RandomStream& rng);

// One outer iteration. Draws, in order: d normals for stage 1, the outer
// mini-batch, then whatever the inner sampler consumes.
ChainState SpsStep(const ChainState& state, const FiniteSumTarget& target,
                   const OuterConfig& config, RandomStream& rng,
                   StepDiagnostics* diagnostics = nullptr);

// P independent chains; chain c draws x0 from RandomStream(seed, c, kInit)
// and its transitions from RandomStream(seed, c, kChain). records[0] is the
// initial ensemble, records[k] the state after k outer steps.
RunResult SpsRun(const FiniteSumTarget& target, const OuterConfig& config,
                 std::uint64_t seed);

// --- Theory-driven schedules ------------------------------------------------

struct ScheduleInputs {
  double smoothness = 1.0;  // L
  double alpha_star = 1.0;  // LSI constant
  double sigma = 0.0;
  double eps = 0.1;
  int dim = 1;
  // Clamp for b_o; unset means unbounded.
  std::optional<int> num_components;
  // Stands in for |grad f_b(0)|^2 + L |x0|^2 in the SGLD switch time and for
  // the ULD warm-start log factor. Default: d + |grad f(0)|^2 + sigma^2,
  // which needs `grad_at_origin_sq`.
  std::optional<double> moment_bound;
  double grad_at_origin_sq = 0.0;
  // Hidden constants, keyed by name; missing entries mean 1. Keys:
  //   K, delta, b_o, tau, tau_prime, S_switch, S_tail   (SGLD)
  //   uld_tau, uld_steps, mala_tau, mala_steps          (MALA)
  std::map<std::string, double> multipliers;

  void Validate() const;
  double Multiplier(const std::string& name) const;
  double MomentBound() const;
  // (1 + L^2) d / (4 alpha eps^2)
  double LogArgument() const;
};

struct SgldSchedule {
  OuterConfig outer;  // inner holds SgldInnerConfig
  double delta = 0.0;
  double log_factor = 0.0;  // log of LogArgument()
};

struct MalaSchedule {
  OuterConfig outer;  // inner holds MalaInnerConfig
  double delta = 0.0;
  double log_factor = 0.0;
};

SgldSchedule DeriveSgldSchedule(const ScheduleInputs& inputs);
MalaSchedule DeriveMalaSchedule(const ScheduleInputs& inputs);

// c / (2 L sqrt(d) log^2(max(d, 1/delta))).
double MalaStepSize(double smoothness, int dim, double delta, double multiplier);
// ceil(c sqrt(d) log^3(1/delta)).
int MalaSteps(int dim, double delta, double multiplier);

// --- Diagnostic calculators -----------------------------------------------

// sqrt(sum(delta)/2) + sigma sqrt(sum(eta_i / (2 b_i)))
//   + sqrt((1 + L^2) d / (4 alpha)) prod (1 + alpha eta_i)^-1.
double TvUpperBound(const std::vector<double>& deltas,
                    const std::vector<double>& etas,
                    const std::vector<int>& batch_sizes, double sigma,
                    double smoothness, double alpha_star, int dim);

// 24 M_k + 4 eta delta + 24 eta^2 sigma^2 / b + 28 M + 24 eta d.
double SecondMomentBoundStep(double moment, double eta, double delta,
                             double sigma, int batch, double target_moment,
                             int dim);

}  // namespace sps

#endif  // SPS_SPS_H_
