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

#include "sps/sps.h"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include "parallel.h"

namespace sps {
namespace {

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

double MeanSquaredNorm(const std::vector<ChainState>& states) {
  double total = 0.0;
  for (const ChainState& s : states) total += s.x.squaredNorm();
  return total / static_cast<double>(states.size());
}

Ensemble Stack(const std::vector<ChainState>& states, int dim) {
  Ensemble out(static_cast<Eigen::Index>(states.size()), dim);
  for (std::size_t c = 0; c < states.size(); ++c) {
    out.row(static_cast<Eigen::Index>(c)) = states[c].x.transpose();
  }
  return out;
}

}  // namespace

// --- OuterConfig -----------------------------------------------------------

void OuterConfig::Validate() const {
  if (k_total < 0) throw std::invalid_argument("K must be >= 0");
  if (!(eta > 0.0)) throw std::invalid_argument("outer eta must be positive");
  if (outer_batch < 1) throw std::invalid_argument("outer batch must be >= 1");
  if (n_chains < 1) throw std::invalid_argument("n_chains must be >= 1");
  if (snapshot_every < 0) throw std::invalid_argument("snapshot_every must be >= 0");
  std::visit(Overloaded{
                 [&](const SgldInnerConfig& c) { c.Validate(eta); },
                 [](const MalaInnerConfig& c) { c.Validate(); },
                 [](const ExactQuadraticRgo& c) {
                   if (!(c.quad_coeff >= 0.0)) {
                     throw std::invalid_argument("quad_coeff must be >= 0");
                   }
                 },
             },
             inner);
}

std::vector<std::string> OuterConfig::Warnings(
    const FiniteSumTarget& target) const {
  std::vector<std::string> out;
  if (eta > 1.0 / (2.0 * target.smoothness())) {
    std::ostringstream msg;
    msg << "eta = " << eta << " exceeds 1/(2L) = "
        << 1.0 / (2.0 * target.smoothness());
    out.push_back(msg.str());
  }
  if (const auto* sgld = std::get_if<SgldInnerConfig>(&inner)) {
    for (auto& w : sgld->Warnings()) out.push_back(std::move(w));
  }
  return out;
}

std::uint64_t StepGradientCost(const OuterConfig& config) {
  return std::visit(
      Overloaded{
          [](const SgldInnerConfig& c) -> std::uint64_t {
            return static_cast<std::uint64_t>(c.s_total) * c.inner_batch;
          },
          [&](const MalaInnerConfig& c) -> std::uint64_t {
            return static_cast<std::uint64_t>(c.warm_start.s_total + 1 +
                                              c.s_total) *
                   config.outer_batch;
          },
          [](const ExactQuadraticRgo&) -> std::uint64_t { return 0; },
      },
      config.inner);
}

int EffectiveOuterSteps(const OuterConfig& config) {
  if (!config.gradient_budget) return config.k_total;
  const std::uint64_t cost = StepGradientCost(config);
  if (cost == 0) return config.k_total;
  const std::uint64_t affordable = *config.gradient_budget / cost;
  if (config.k_total >= 1 && affordable == 0) {
    throw std::invalid_argument(
        "gradient budget is exhausted before the first outer step completes");
  }
  return static_cast<int>(
      std::min<std::uint64_t>(affordable, static_cast<std::uint64_t>(config.k_total)));
}

// --- Outer loop ------------------------------------------------------------

Vector GaussianSmoothing(const Vector& x, double eta, RandomStream& rng) {
  if (!(eta > 0.0)) throw std::invalid_argument("smoothing needs eta > 0");
  const double scale = std::sqrt(eta);
  Vector out(x.size());
  for (Eigen::Index j = 0; j < x.size(); ++j) out[j] = x[j] + scale * rng.Normal();
  return out;
}

ChainState SpsStep(const ChainState& state, const FiniteSumTarget& target,
                   const OuterConfig& config, RandomStream& rng,
                   StepDiagnostics* diagnostics) {
  if (state.x.size() != target.dim()) {
    throw std::invalid_argument("chain state has wrong dimension");
  }
  InnerProblem problem;
  problem.target = &target;
  problem.eta = config.eta;
  problem.center = GaussianSmoothing(state.x, config.eta, rng);
  problem.batch = SampleMiniBatch(rng, target.num_components(), config.outer_batch);

  ChainState next;
  next.gradients = state.gradients;
  std::visit(Overloaded{
                 [&](const SgldInnerConfig& c) {
                   SgldInnerResult r = InnerSgld(problem, c, rng);
                   next.x = std::move(r.z);
                   next.gradients += r.gradients;
                   if (diagnostics) diagnostics->window = r.window;
                 },
                 [&](const MalaInnerConfig& c) {
                   MalaInnerResult r = InnerMala(problem, c, rng);
                   next.x = std::move(r.z);
                   next.gradients += r.gradients;
                   if (diagnostics) diagnostics->acceptance_rate = r.acceptance_rate();
                 },
                 [&](const ExactQuadraticRgo& c) {
                   next.x = RgoExactGaussian(problem.center, config.eta,
                                             c.quad_coeff, rng);
                 },
             },
             config.inner);
  return next;
}

RunResult SpsRun(const FiniteSumTarget& target, const OuterConfig& config,
                 std::uint64_t seed) {
  config.Validate();
  const int steps = EffectiveOuterSteps(config);
  const int chains = config.n_chains;
  const int d = target.dim();

  std::vector<ChainState> states(chains);
  std::vector<RandomStream> streams;
  streams.reserve(chains);
  for (int c = 0; c < chains; ++c) {
    RandomStream init(seed, static_cast<std::uint64_t>(c), StreamPurpose::kInit);
    states[c].x.resize(d);
    for (int j = 0; j < d; ++j) states[c].x[j] = init.Normal();
    streams.emplace_back(seed, static_cast<std::uint64_t>(c), StreamPurpose::kChain);
  }

  RunResult result;
  auto record = [&](int iteration, const std::vector<StepDiagnostics>* diag) {
    RunRecord r;
    r.iteration = iteration;
    r.gradients = states.front().gradients;
    r.second_moment = MeanSquaredNorm(states);
    if (diag != nullptr) {
      double acceptance = 0.0;
      for (const auto& s : *diag) acceptance += s.acceptance_rate;
      r.acceptance_rate = acceptance / chains;
      r.window = diag->front().window;
    }
    if (config.snapshot_every > 0 && iteration % config.snapshot_every == 0) {
      r.snapshot = Stack(states, d);
    }
    result.records.push_back(std::move(r));
  };

  record(0, nullptr);
  std::vector<StepDiagnostics> diagnostics(chains);
  for (int k = 1; k <= steps; ++k) {
    internal::ParallelFor(chains, config.threads, [&](int c) {
      states[c] = SpsStep(states[c], target, config, streams[c], &diagnostics[c]);
    });
    record(k, &diagnostics);
  }

  result.particles = Stack(states, d);
  result.gradients_per_chain = states.front().gradients;
  return result;
}

// --- Schedules -------------------------------------------------------------

void ScheduleInputs::Validate() const {
  if (!(smoothness > 0.0) || !(alpha_star > 0.0) || !(eps > 0.0) || dim < 1) {
    throw std::invalid_argument("schedule inputs L, alpha_star, eps, d must be positive");
  }
  if (!(sigma >= 0.0)) throw std::invalid_argument("sigma must be >= 0");
  if (num_components && *num_components < 1) {
    throw std::invalid_argument("n must be >= 1");
  }
  for (const auto& [name, value] : multipliers) {
    if (!(value > 0.0)) {
      throw std::invalid_argument("multiplier '" + name + "' must be positive");
    }
  }
}

double ScheduleInputs::Multiplier(const std::string& name) const {
  const auto it = multipliers.find(name);
  return it == multipliers.end() ? 1.0 : it->second;
}

double ScheduleInputs::MomentBound() const {
  return moment_bound.value_or(dim + grad_at_origin_sq + sigma * sigma);
}

double ScheduleInputs::LogArgument() const {
  return (1.0 + smoothness * smoothness) * dim /
         (4.0 * alpha_star * eps * eps);
}

namespace {

struct OuterPart {
  double eta;
  int k_total;
  double delta;
  int outer_batch;
  double log_factor;
};

OuterPart DeriveOuter(const ScheduleInputs& in) {
  in.Validate();
  const double arg = in.LogArgument();
  if (!(arg > 1.0)) {
    throw std::invalid_argument(
        "eps too large: (1+L^2)d/(4 alpha eps^2) must exceed 1");
  }
  const double ell = std::log(arg);
  const double L = in.smoothness;
  const double alpha = in.alpha_star;
  const double eps2 = in.eps * in.eps;

  OuterPart out;
  out.log_factor = ell;
  out.eta = 1.0 / (2.0 * L);
  const double k = std::ceil(in.Multiplier("K") * (L / alpha) * ell);
  if (k < 1.0) throw std::invalid_argument("eps too large: K < 1");
  out.k_total = static_cast<int>(k);
  out.delta = in.Multiplier("delta") * (2.0 * eps2 * alpha / L) / ell;
  double b = std::ceil(in.Multiplier("b_o") * in.sigma * in.sigma /
                       (4.0 * alpha * eps2) * ell);
  if (in.num_components) b = std::min(b, static_cast<double>(*in.num_components));
  out.outer_batch = static_cast<int>(std::max(1.0, b));
  return out;
}

}  // namespace

SgldSchedule DeriveSgldSchedule(const ScheduleInputs& in) {
  const OuterPart outer = DeriveOuter(in);
  const double L = in.smoothness;
  const double alpha = in.alpha_star;
  const double eps2 = in.eps * in.eps;
  const double ell = outer.log_factor;
  const double noise = (in.sigma * in.sigma + 3.0 * L * in.dim) * ell;

  SgldInnerConfig inner;
  inner.tau1 = std::min(in.Multiplier("tau") * (alpha * eps2 / 16.0) / noise,
                        1.0 / 36.0);
  inner.tau2 = std::min(
      in.Multiplier("tau_prime") * (alpha * eps2 / (4.0 * L)) / noise, 1.0 / 36.0);
  const double log_term =
      std::log((in.MomentBound() + L) / (L * alpha * eps2)) + std::log(ell);
  const double s_switch =
      std::ceil(in.Multiplier("S_switch") * log_term * 4.0 / (L * inner.tau1));
  const double s_tail = std::ceil(in.Multiplier("S_tail") / inner.tau2);
  if (!(s_switch >= 0.0)) {
    throw std::invalid_argument("degenerate moment bound: negative switch time");
  }
  inner.s_switch = static_cast<int>(s_switch);
  inner.s_total = static_cast<int>(s_switch + s_tail);
  inner.inner_batch = 1;

  SgldSchedule schedule;
  schedule.outer.k_total = outer.k_total;
  schedule.outer.eta = outer.eta;
  schedule.outer.outer_batch = outer.outer_batch;
  schedule.outer.inner = inner;
  schedule.delta = outer.delta;
  schedule.log_factor = ell;
  return schedule;
}

double MalaStepSize(double smoothness, int dim, double delta,
                    double multiplier) {
  if (!(delta > 0.0)) throw std::invalid_argument("delta must be positive");
  const double log_term = std::log(std::max(static_cast<double>(dim), 1.0 / delta));
  if (!(log_term > 0.0)) {
    throw std::invalid_argument("degenerate log argument in MALA step size");
  }
  return multiplier / (2.0 * smoothness * std::sqrt(static_cast<double>(dim)) *
                       log_term * log_term);
}

int MalaSteps(int dim, double delta, double multiplier) {
  if (!(delta > 0.0) || !(delta < 1.0)) {
    throw std::invalid_argument("delta must lie in (0, 1) for the MALA schedule");
  }
  const double log_term = std::log(1.0 / delta);
  return static_cast<int>(std::ceil(multiplier * std::sqrt(static_cast<double>(dim)) *
                                    log_term * log_term * log_term));
}

MalaSchedule DeriveMalaSchedule(const ScheduleInputs& in) {
  const OuterPart outer = DeriveOuter(in);
  const double L = in.smoothness;
  const double d = in.dim;
  const double moment = in.MomentBound();
  if (!(moment > 1.0)) {
    throw std::invalid_argument("moment bound must exceed 1 for the ULD log factor");
  }

  MalaInnerConfig inner;
  inner.warm_start.gamma = std::sqrt(6.0 * L);
  inner.warm_start.tau = in.Multiplier("uld_tau") / std::sqrt(2.0 * L * d);
  inner.warm_start.s_total = static_cast<int>(
      std::ceil(in.Multiplier("uld_steps") * std::sqrt(d) * std::log(moment)));
  inner.tau = MalaStepSize(L, in.dim, outer.delta, in.Multiplier("mala_tau"));
  inner.s_total = MalaSteps(in.dim, outer.delta, in.Multiplier("mala_steps"));

  MalaSchedule schedule;
  schedule.outer.k_total = outer.k_total;
  schedule.outer.eta = outer.eta;
  schedule.outer.outer_batch = outer.outer_batch;
  schedule.outer.inner = inner;
  schedule.delta = outer.delta;
  schedule.log_factor = outer.log_factor;
  return schedule;
}

// --- Diagnostics -----------------------------------------------------------

double TvUpperBound(const std::vector<double>& deltas,
                    const std::vector<double>& etas,
                    const std::vector<int>& batch_sizes, double sigma,
                    double smoothness, double alpha_star, int dim) {
  if (deltas.size() != etas.size() || etas.size() != batch_sizes.size()) {
    throw std::invalid_argument("TV bound inputs must have equal length");
  }
  double delta_sum = 0.0;
  double batch_sum = 0.0;
  double contraction = 1.0;
  for (std::size_t i = 0; i < etas.size(); ++i) {
    if (batch_sizes[i] < 1) throw std::invalid_argument("batch size must be >= 1");
    delta_sum += deltas[i];
    batch_sum += etas[i] / (2.0 * batch_sizes[i]);
    contraction /= (1.0 + alpha_star * etas[i]);
  }
  return std::sqrt(0.5 * delta_sum) + sigma * std::sqrt(batch_sum) +
         std::sqrt((1.0 + smoothness * smoothness) * dim / (4.0 * alpha_star)) *
             contraction;
}

double SecondMomentBoundStep(double moment, double eta, double delta,
                             double sigma, int batch, double target_moment,
                             int dim) {
  if (batch < 1) throw std::invalid_argument("batch size must be >= 1");
  return 24.0 * moment + 4.0 * eta * delta +
         24.0 * eta * eta * sigma * sigma / batch + 28.0 * target_moment +
         24.0 * eta * dim;
}

}  // namespace sps
