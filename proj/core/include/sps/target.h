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

#ifndef SPS_TARGET_H_
#define SPS_TARGET_H_

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "sps/random.h"
#include "sps/types.h"

namespace sps {

// Unnormalised density exp(-f) with f(x) = (1/n) sum_i f_i(x).
//
// Implementations are immutable after construction and may be shared across
// threads.
class FiniteSumTarget {
 public:
  virtual ~FiniteSumTarget() = default;

  virtual int dim() const = 0;
  virtual int num_components() const = 0;
  // User-supplied bound on the smoothness of every f_i.
  virtual double smoothness() const = 0;

  virtual double ComponentEnergy(int i, const Vector& x) const = 0;
  // out += weight * grad f_i(x). `out` must already have size dim().
  virtual void AccumulateComponentGradient(int i, const Vector& x,
                                           double weight, Vector* out) const = 0;

  // When the target is invariant under x -> 2c - x, returns c.
  virtual std::optional<Vector> ReflectionCenter() const { return std::nullopt; }

  Vector ComponentGradient(int i, const Vector& x) const;
  double Energy(const Vector& x) const;
  Vector Gradient(const Vector& x) const;

 protected:
  void CheckIndex(int i) const;
};

// Indices into [0, n), with repetition allowed.
struct MiniBatch {
  std::vector<int> indices;

  int size() const { return static_cast<int>(indices.size()); }
  // Throws std::invalid_argument when empty or any index is outside [0, n).
  void Validate(int n) const;

  static MiniBatch Full(int n);
};

// i.i.d. uniform draws with replacement from [0, n).
MiniBatch SampleMiniBatch(RandomStream& rng, int n, int size);

// (1/|batch|) sum_{i in batch} grad f_i(x). Adds |batch| to `tally`.
Vector MiniBatchGradient(const FiniteSumTarget& target, const MiniBatch& batch,
                         const Vector& x, GradientTally* tally = nullptr);

// Allocation-free form: writes into *out (resized if needed).
void MiniBatchGradient(const FiniteSumTarget& target,
                       std::span<const int> indices, const Vector& x,
                       Vector* out, GradientTally* tally = nullptr);

// (1/|batch|) sum_{i in batch} f_i(x).
double MiniBatchEnergy(const FiniteSumTarget& target,
                       std::span<const int> indices, const Vector& x);

// Pointwise stochastic-gradient variance (1/n) sum_i |grad f_i(x) - grad f(x)|^2.
double EstimateSigma2(const FiniteSumTarget& target, const Vector& x);

// Two-mode Gaussian-mixture components
//   exp(-f_i(x)) = exp(-|x - b - mu_i|^2 / 2) + exp(-|x - b + mu_i|^2 / 2).
class MixtureTarget final : public FiniteSumTarget {
 public:
  struct Params {
    int dim = 10;
    int num_components = 100;
    std::uint64_t seed = 0;
    double bias = 3.0;     // every entry of b
    double mu_mean = 2.0;  // every entry of the centre mean
  };

  // Generates mu_i = sqrt(10/d) * (mu_mean + z_i), z_i ~ N(0, I), drawing
  // z in component-major order from RandomStream(seed, 0, kTarget).
  explicit MixtureTarget(const Params& params);

  // Explicit centres; `bias` has size d and every centre has size d.
  MixtureTarget(Vector bias, std::vector<Vector> centres,
                std::optional<double> smoothness = std::nullopt);

  int dim() const override { return static_cast<int>(bias_.size()); }
  int num_components() const override {
    return static_cast<int>(centres_.size());
  }
  double smoothness() const override { return smoothness_; }

  double ComponentEnergy(int i, const Vector& x) const override;
  void AccumulateComponentGradient(int i, const Vector& x, double weight,
                                   Vector* out) const override;
  std::optional<Vector> ReflectionCenter() const override { return bias_; }

  const Vector& bias() const { return bias_; }
  const std::vector<Vector>& centres() const { return centres_; }
  const std::optional<Params>& params() const { return params_; }

  // 1 + max_i |mu_i|^2.
  static double DefaultSmoothness(const std::vector<Vector>& centres);

 private:
  std::optional<Params> params_;
  Vector bias_;
  std::vector<Vector> centres_;
  double smoothness_;
};

// f_i(x) = (c/2) |x - a_i|^2. With a single zero centre this is the
// standard Gaussian scaled by c; used for analytic checks.
class QuadraticTarget final : public FiniteSumTarget {
 public:
  QuadraticTarget(std::vector<Vector> centres, double curvature = 1.0);
  // n identical components centred at zero.
  static QuadraticTarget Isotropic(int dim, int num_components = 1,
                                   double curvature = 1.0);

  int dim() const override { return static_cast<int>(centres_.front().size()); }
  int num_components() const override {
    return static_cast<int>(centres_.size());
  }
  double smoothness() const override { return curvature_; }
  double curvature() const { return curvature_; }

  double ComponentEnergy(int i, const Vector& x) const override;
  void AccumulateComponentGradient(int i, const Vector& x, double weight,
                                   Vector* out) const override;

 private:
  std::vector<Vector> centres_;
  double curvature_;
};

}  // namespace sps

#endif  // SPS_TARGET_H_
