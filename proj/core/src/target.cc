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

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace sps {

void FiniteSumTarget::CheckIndex(int i) const {
  if (i < 0 || i >= num_components()) {
    throw std::out_of_range("component index " + std::to_string(i) +
                            " outside [0, " +
                            std::to_string(num_components()) + ")");
  }
}

Vector FiniteSumTarget::ComponentGradient(int i, const Vector& x) const {
  Vector out = Vector::Zero(dim());
  AccumulateComponentGradient(i, x, 1.0, &out);
  return out;
}

double FiniteSumTarget::Energy(const Vector& x) const {
  double total = 0.0;
  for (int i = 0; i < num_components(); ++i) total += ComponentEnergy(i, x);
  return total / num_components();
}

Vector FiniteSumTarget::Gradient(const Vector& x) const {
  Vector out = Vector::Zero(dim());
  const double weight = 1.0 / num_components();
  for (int i = 0; i < num_components(); ++i) {
    AccumulateComponentGradient(i, x, weight, &out);
  }
  return out;
}

void MiniBatch::Validate(int n) const {
  if (indices.empty()) throw std::invalid_argument("mini-batch is empty");
  for (int i : indices) {
    if (i < 0 || i >= n) {
      throw std::out_of_range("mini-batch index " + std::to_string(i) +
                              " outside [0, " + std::to_string(n) + ")");
    }
  }
}

MiniBatch MiniBatch::Full(int n) {
  MiniBatch batch;
  batch.indices.resize(n);
  for (int i = 0; i < n; ++i) batch.indices[i] = i;
  return batch;
}

MiniBatch SampleMiniBatch(RandomStream& rng, int n, int size) {
  if (size < 1) throw std::invalid_argument("mini-batch size must be >= 1");
  if (n < 1) throw std::invalid_argument("component count must be >= 1");
  MiniBatch batch;
  batch.indices.resize(size);
  for (int& index : batch.indices) {
    index = static_cast<int>(rng.UniformIndex(static_cast<std::uint64_t>(n)));
  }
  return batch;
}

void MiniBatchGradient(const FiniteSumTarget& target,
                       std::span<const int> indices, const Vector& x,
                       Vector* out, GradientTally* tally) {
  out->setZero(target.dim());
  const double weight = 1.0 / static_cast<double>(indices.size());
  for (int i : indices) target.AccumulateComponentGradient(i, x, weight, out);
  if (tally != nullptr) tally->Add(indices.size());
}

Vector MiniBatchGradient(const FiniteSumTarget& target, const MiniBatch& batch,
                         const Vector& x, GradientTally* tally) {
  batch.Validate(target.num_components());
  Vector out;
  MiniBatchGradient(target, batch.indices, x, &out, tally);
  return out;
}

double MiniBatchEnergy(const FiniteSumTarget& target,
                       std::span<const int> indices, const Vector& x) {
  double total = 0.0;
  for (int i : indices) total += target.ComponentEnergy(i, x);
  return total / static_cast<double>(indices.size());
}

double EstimateSigma2(const FiniteSumTarget& target, const Vector& x) {
  const Vector full = target.Gradient(x);
  double total = 0.0;
  for (int i = 0; i < target.num_components(); ++i) {
    total += (target.ComponentGradient(i, x) - full).squaredNorm();
  }
  return total / target.num_components();
}

// --- MixtureTarget ---------------------------------------------------------

MixtureTarget::MixtureTarget(const Params& params)
    : params_(params), bias_(Vector::Constant(params.dim, params.bias)) {
  if (params.dim < 1 || params.num_components < 1) {
    throw std::invalid_argument("mixture target needs d >= 1 and n >= 1");
  }
  RandomStream rng(params.seed, 0, StreamPurpose::kTarget);
  const double scale = std::sqrt(10.0 / params.dim);
  centres_.reserve(params.num_components);
  for (int i = 0; i < params.num_components; ++i) {
    Vector mu(params.dim);
    for (int j = 0; j < params.dim; ++j) {
      mu[j] = scale * (params.mu_mean + rng.Normal());
    }
    centres_.push_back(std::move(mu));
  }
  smoothness_ = DefaultSmoothness(centres_);
}

MixtureTarget::MixtureTarget(Vector bias, std::vector<Vector> centres,
                             std::optional<double> smoothness)
    : bias_(std::move(bias)), centres_(std::move(centres)) {
  if (bias_.size() < 1 || centres_.empty()) {
    throw std::invalid_argument("mixture target needs d >= 1 and n >= 1");
  }
  for (const Vector& mu : centres_) {
    if (mu.size() != bias_.size()) {
      throw std::invalid_argument("centre dimension does not match bias");
    }
  }
  smoothness_ = smoothness.value_or(DefaultSmoothness(centres_));
}

double MixtureTarget::DefaultSmoothness(const std::vector<Vector>& centres) {
  double max_norm2 = 0.0;
  for (const Vector& mu : centres) max_norm2 = std::max(max_norm2, mu.squaredNorm());
  return 1.0 + max_norm2;
}

double MixtureTarget::ComponentEnergy(int i, const Vector& x) const {
  CheckIndex(i);
  const Vector& mu = centres_[i];
  double plus = 0.0;
  double minus = 0.0;
  for (Eigen::Index j = 0; j < x.size(); ++j) {
    const double centred = x[j] - bias_[j];
    const double up = centred - mu[j];
    const double um = centred + mu[j];
    plus += up * up;
    minus += um * um;
  }
  const double ep = -0.5 * plus;
  const double em = -0.5 * minus;
  const double top = std::max(ep, em);
  return -(top + std::log(std::exp(ep - top) + std::exp(em - top)));
}

void MixtureTarget::AccumulateComponentGradient(int i, const Vector& x,
                                                double weight,
                                                Vector* out) const {
  CheckIndex(i);
  // With c = x - b the softmax weights reduce to
  //   w+ - w- = tanh(<c, mu>),
  // so the gradient is c - tanh(<c, mu>) mu.
  const Vector& mu = centres_[i];
  const Eigen::Index d = x.size();
  const double* xp = x.data();
  const double* bp = bias_.data();
  const double* mp = mu.data();
  double* op = out->data();
  double dot = 0.0;
  for (Eigen::Index j = 0; j < d; ++j) dot += (xp[j] - bp[j]) * mp[j];
  const double shrink = std::tanh(dot);
  for (Eigen::Index j = 0; j < d; ++j) {
    op[j] += weight * (xp[j] - bp[j] - shrink * mp[j]);
  }
}

// --- QuadraticTarget -------------------------------------------------------

QuadraticTarget::QuadraticTarget(std::vector<Vector> centres, double curvature)
    : centres_(std::move(centres)), curvature_(curvature) {
  if (centres_.empty()) throw std::invalid_argument("no components");
  if (!(curvature_ >= 0.0)) {
    throw std::invalid_argument("curvature must be non-negative");
  }
  for (const Vector& a : centres_) {
    if (a.size() != centres_.front().size() || a.size() < 1) {
      throw std::invalid_argument("inconsistent component dimension");
    }
  }
}

QuadraticTarget QuadraticTarget::Isotropic(int dim, int num_components,
                                           double curvature) {
  return QuadraticTarget(
      std::vector<Vector>(num_components, Vector::Zero(dim)), curvature);
}

double QuadraticTarget::ComponentEnergy(int i, const Vector& x) const {
  CheckIndex(i);
  return 0.5 * curvature_ * (x - centres_[i]).squaredNorm();
}

void QuadraticTarget::AccumulateComponentGradient(int i, const Vector& x,
                                                  double weight,
                                                  Vector* out) const {
  CheckIndex(i);
  out->noalias() += (weight * curvature_) * (x - centres_[i]);
}

}  // namespace sps
