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

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace sps {
namespace {

constexpr double kTheoryStepCap = 1.0 / 36.0;

void FillNormal(RandomStream& rng, Vector* out) {
  for (Eigen::Index j = 0; j < out->size(); ++j) (*out)[j] = rng.Normal();
}

// h - 2(1 - e^-h) + (1 - e^-2h)/2, which behaves like h^3/3 near zero.
double UldPositionBracket(double h) {
  if (h < 0.1) {
    // sum_{k>=3} (-1)^(k+1) (2^(k-1) - 2) h^k / k!
    double sum = 0.0;
    double power = h * h * h;
    double factorial = 6.0;
    double two_pow = 4.0;
    for (int k = 3; k <= 18; ++k) {
      const double sign = (k % 2 == 1) ? 1.0 : -1.0;
      sum += sign * (two_pow - 2.0) * power / factorial;
      power *= h;
      factorial *= (k + 1);
      two_pow *= 2.0;
    }
    return sum;
  }
  return h + 2.0 * std::expm1(-h) - 0.5 * std::expm1(-2.0 * h);
}

}  // namespace

// --- InnerProblem ----------------------------------------------------------

void InnerProblem::Validate() const {
  if (target == nullptr) throw std::invalid_argument("inner problem has no target");
  if (center.size() != target->dim()) {
    throw std::invalid_argument("inner problem centre has wrong dimension");
  }
  if (!(eta > 0.0)) {
    throw std::invalid_argument("inner problem needs eta > 0");
  }
  batch.Validate(target->num_components());
}

std::vector<std::string> InnerProblem::Warnings() const {
  std::vector<std::string> out;
  if (target != nullptr && std::isfinite(eta) &&
      eta > 1.0 / (2.0 * target->smoothness())) {
    std::ostringstream msg;
    msg << "eta = " << eta << " exceeds 1/(2L) = "
        << 1.0 / (2.0 * target->smoothness())
        << "; the inner target may not be strongly log-concave";
    out.push_back(msg.str());
  }
  return out;
}

double InnerProblem::G(const Vector& z) const {
  const double energy = MiniBatchEnergy(*target, batch.indices, z);
  if (std::isinf(eta)) return energy;
  return energy + (z - center).squaredNorm() / (2.0 * eta);
}

void InnerProblem::GradG(const Vector& z, Vector* out,
                         GradientTally* tally) const {
  MiniBatchGradient(*target, batch.indices, z, out, tally);
  if (!std::isinf(eta)) out->noalias() += (z - center) / eta;
}

// --- Configs ---------------------------------------------------------------

void SgldInnerConfig::Validate(double eta) const {
  if (!(tau1 > 0.0) || !(tau2 > 0.0)) {
    throw std::invalid_argument("SGLD inner steps must be positive");
  }
  if (tau1 >= 4.0 * eta || tau2 >= 4.0 * eta) {
    throw std::invalid_argument(
        "SGLD inner step must be < 4 eta for a finite noise scale");
  }
  if (s_switch < 0 || s_switch >= s_total - 1) {
    throw std::invalid_argument(
        "SGLD averaging window is empty: need 0 <= s_switch < s_total - 1");
  }
  if (inner_batch < 1) throw std::invalid_argument("inner batch must be >= 1");
}

std::vector<std::string> SgldInnerConfig::Warnings() const {
  std::vector<std::string> out;
  if (tau1 > kTheoryStepCap || tau2 > kTheoryStepCap) {
    out.emplace_back("SGLD inner step exceeds 1/36; convergence guarantee does not apply");
  }
  return out;
}

void UldInnerConfig::Validate() const {
  if (!(gamma > 0.0) || !(tau > 0.0)) {
    throw std::invalid_argument("ULD needs gamma > 0 and tau > 0");
  }
  if (s_total < 0) throw std::invalid_argument("ULD step count must be >= 0");
}

void MalaInnerConfig::Validate() const {
  if (!(tau > 0.0)) throw std::invalid_argument("MALA step must be positive");
  if (s_total < 0) throw std::invalid_argument("MALA step count must be >= 0");
  warm_start.Validate();
}

UldKernel UldKernel::Make(double gamma, double tau) {
  if (!(gamma > 0.0) || !(tau >= 0.0)) {
    throw std::invalid_argument("ULD kernel needs gamma > 0 and tau >= 0");
  }
  const double h = gamma * tau;
  const double one_minus_a = -std::expm1(-h);
  UldKernel k;
  k.a = std::exp(-h);
  k.sigma_zz = 2.0 * UldPositionBracket(h) / (gamma * gamma);
  k.sigma_zv = one_minus_a * one_minus_a / gamma;
  k.sigma_vv = -std::expm1(-2.0 * h);
  k.pos_from_vel = one_minus_a / gamma;
  k.pos_from_grad = (h - one_minus_a) / (gamma * gamma);
  k.vel_from_grad = one_minus_a / gamma;

  const double det = k.sigma_zz * k.sigma_vv - k.sigma_zv * k.sigma_zv;
  if (k.sigma_zz < 0.0 || k.sigma_vv < 0.0 ||
      det < -1e-12 * k.sigma_zz * k.sigma_vv) {
    throw std::invalid_argument("ULD covariance is not positive semidefinite");
  }
  if (k.sigma_zz > 0.0) {
    k.chol_zz = std::sqrt(k.sigma_zz);
    k.chol_vz = k.sigma_zv / k.chol_zz;
    k.chol_vv = std::sqrt(std::max(0.0, k.sigma_vv - k.chol_vz * k.chol_vz));
  } else {
    k.chol_vv = std::sqrt(k.sigma_vv);
  }
  return k;
}

// --- Samplers --------------------------------------------------------------

SgldInnerResult InnerSgld(const InnerProblem& problem,
                          const SgldInnerConfig& config, RandomStream& rng) {
  problem.Validate();
  config.Validate(problem.eta);
  const FiniteSumTarget& target = *problem.target;
  const int d = target.dim();
  const double eta = problem.eta;
  const auto& outer = problem.batch.indices;
  const auto outer_size = static_cast<std::uint64_t>(outer.size());

  Vector noise(d);
  Vector z = problem.center;
  FillNormal(rng, &noise);
  z.noalias() += std::sqrt(eta) * noise;

  std::vector<int> inner(config.inner_batch);
  Vector z_prime(d);
  Vector grad(d);
  Vector sum = Vector::Zero(d);
  GradientTally tally;

  for (int s = 0; s < config.s_total; ++s) {
    const double tau = s <= config.s_switch ? config.tau1 : config.tau2;
    const double scale = std::sqrt(2.0 * tau / (1.0 - tau / (4.0 * eta)));
    for (int& index : inner) {
      index = outer_size == 1 ? outer[0] : outer[rng.UniformIndex(outer_size)];
    }
    FillNormal(rng, &noise);
    z_prime = z;
    z_prime.noalias() += scale * noise;
    MiniBatchGradient(target, inner, z_prime, &grad, &tally);
    grad.noalias() += (z_prime - problem.center) / eta;
    z = z_prime;
    z.noalias() -= tau * grad;
    if (s > config.s_switch) sum += z_prime;
  }

  SgldInnerResult result;
  result.window = config.window();
  result.z = sum / static_cast<double>(result.window);
  result.gradients = tally.count();
  return result;
}

UldInnerResult InnerUld(const InnerProblem& problem,
                        const UldInnerConfig& config, RandomStream& rng) {
  problem.Validate();
  config.Validate();
  const UldKernel kernel = UldKernel::Make(config.gamma, config.tau);
  const int d = problem.target->dim();

  Vector z = problem.center;
  Vector v(d);
  FillNormal(rng, &v);
  Vector grad(d);
  GradientTally tally;

  for (int s = 0; s < config.s_total; ++s) {
    problem.GradG(z, &grad, &tally);
    for (int j = 0; j < d; ++j) {
      const double mean_z =
          z[j] + kernel.pos_from_vel * v[j] - kernel.pos_from_grad * grad[j];
      const double mean_v = kernel.a * v[j] - kernel.vel_from_grad * grad[j];
      const double xi_z = rng.Normal();
      const double xi_v = rng.Normal();
      z[j] = mean_z + kernel.chol_zz * xi_z;
      v[j] = mean_v + kernel.chol_vz * xi_z + kernel.chol_vv * xi_v;
    }
  }
  return {std::move(z), tally.count()};
}

MalaKernel::MalaKernel(const InnerProblem& problem, double tau, Vector z0,
                       GradientTally* tally)
    : problem_(&problem),
      tau_(tau),
      noise_scale_(std::sqrt(2.0 * tau)),
      tally_(tally),
      z_(std::move(z0)) {
  if (!(tau > 0.0)) throw std::invalid_argument("MALA step must be positive");
  const Eigen::Index d = z_.size();
  grad_.resize(d);
  problem_->GradG(z_, &grad_, tally_);
  energy_ = problem_->G(z_);
  mean_.resize(d);
  noise_.resize(d);
  proposal_.resize(d);
  grad_proposal_.resize(d);
  reverse_mean_.resize(d);
}

bool MalaKernel::Step(RandomStream& rng) {
  mean_ = z_;
  mean_.noalias() -= tau_ * grad_;
  FillNormal(rng, &noise_);
  proposal_ = mean_;
  proposal_.noalias() += noise_scale_ * noise_;
  problem_->GradG(proposal_, &grad_proposal_, tally_);
  const double energy_proposal = problem_->G(proposal_);
  reverse_mean_ = proposal_;
  reverse_mean_.noalias() -= tau_ * grad_proposal_;
  const double log_accept =
      (energy_ - energy_proposal) +
      ((proposal_ - mean_).squaredNorm() / (4.0 * tau_) -
       (z_ - reverse_mean_).squaredNorm() / (4.0 * tau_));
  const double u = rng.Uniform();
  if (log_accept >= 0.0 || std::log(u) <= log_accept) {
    z_.swap(proposal_);
    grad_.swap(grad_proposal_);
    energy_ = energy_proposal;
    return true;
  }
  return false;
}

MalaInnerResult InnerMala(const InnerProblem& problem,
                          const MalaInnerConfig& config, RandomStream& rng) {
  config.Validate();
  UldInnerResult warm = InnerUld(problem, config.warm_start, rng);
  GradientTally tally;
  tally.Add(warm.gradients);
  MalaKernel kernel(problem, config.tau, std::move(warm.z), &tally);
  MalaInnerResult result;
  for (int s = 0; s < config.s_total; ++s) {
    if (kernel.Step(rng)) ++result.accepted;
    ++result.steps;
  }
  result.z = kernel.TakeState();
  result.gradients = tally.count();
  return result;
}

double MalaLogAccept(const InnerProblem& problem, const Vector& z,
                     const Vector& z_proposal, double tau) {
  if (!(tau > 0.0)) throw std::invalid_argument("MALA step must be positive");
  problem.Validate();
  Vector grad_z, grad_p;
  problem.GradG(z, &grad_z, nullptr);
  problem.GradG(z_proposal, &grad_p, nullptr);
  const double phi_forward =
      (z_proposal - (z - tau * grad_z)).squaredNorm() / (4.0 * tau);
  const double phi_reverse =
      (z - (z_proposal - tau * grad_p)).squaredNorm() / (4.0 * tau);
  // Grouped so that z_proposal == z gives exactly 0 and swapping the
  // arguments gives exactly the negation.
  return (problem.G(z) - problem.G(z_proposal)) + (phi_forward - phi_reverse);
}

Vector RgoExactGaussian(const Vector& x0, double eta, double quad_coeff,
                        RandomStream& rng) {
  if (!(eta > 0.0)) throw std::invalid_argument("RGO needs eta > 0");
  if (!(quad_coeff >= 0.0)) {
    throw std::invalid_argument("RGO needs quad_coeff >= 0");
  }
  const double shrink = 1.0 + quad_coeff * eta;
  const double std_dev = std::sqrt(eta / shrink);
  Vector z(x0.size());
  for (Eigen::Index j = 0; j < z.size(); ++j) {
    z[j] = x0[j] / shrink + std_dev * rng.Normal();
  }
  return z;
}

}  // namespace sps
