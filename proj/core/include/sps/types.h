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

#ifndef SPS_TYPES_H_
#define SPS_TYPES_H_

#include <cstdint>

#include <Eigen/Core>

namespace sps {

using Vector = Eigen::VectorXd;

// Particles x dimension, row-major so that one particle is contiguous and the
// in-memory layout matches the on-disk reference format.
using Ensemble =
    Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

// Running count of component-gradient evaluations (one per grad f_i call).
class GradientTally {
 public:
  void Add(std::uint64_t evaluations) { count_ += evaluations; }
  std::uint64_t count() const { return count_; }

 private:
  std::uint64_t count_ = 0;
};

}  // namespace sps

#endif  // SPS_TYPES_H_
