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

#ifndef SPS_RANDOM_H_
#define SPS_RANDOM_H_

#include <array>
#include <cstdint>

namespace sps {

// Philox4x32-10 block function (Salmon et al., SC'11). Maps a 128-bit
// counter and a 64-bit key to 128 pseudorandom bits.
using PhiloxCounter = std::array<std::uint32_t, 4>;
using PhiloxKey = std::array<std::uint32_t, 2>;

PhiloxCounter Philox4x32(PhiloxCounter counter, PhiloxKey key);

// SplitMix64 finalizer; used to hash stream identifiers.
std::uint64_t Mix64(std::uint64_t x);

// Purpose tags for stream splitting. Values are part of the reproducibility
// contract; never renumber them.
enum class StreamPurpose : std::uint32_t {
  kTarget = 1,     // mixture-target centres
  kInit = 2,       // chain initialisation
  kChain = 3,      // per-chain transition noise
  kReference = 4,  // reference-ensemble generation
  kTest = 5,
};

// Counter-based random stream.
//
// Layout of the Philox input block:
//   key      = (seed low 32 bits, seed high 32 bits)
//   counter  = (position low, position high, stream low, stream high)
// where `stream` is a 64-bit identifier and `position` counts 128-bit blocks
// consumed so far. Each block yields two 64-bit words, consumed in order.
//
// Stream identifiers are derived as
//   Mix64((chain_index << 32) ^ purpose)
// so every (seed, chain, purpose) triple addresses a disjoint sequence and a
// stream's output does not depend on how many other streams exist.
//
// Uniform doubles use the top 53 bits of a word. Normals use the Boost
// ziggurat sampler driven by this stream; it consumes one word per draw
// except on the rare wedge or tail rejections.
//
// Satisfies UniformRandomBitGenerator, so it can drive standard and Boost
// distributions directly.
class RandomStream {
 public:
  RandomStream(std::uint64_t seed, std::uint64_t stream_id);
  RandomStream(std::uint64_t seed, std::uint64_t chain_index,
               StreamPurpose purpose);

  static std::uint64_t StreamId(std::uint64_t chain_index,
                                StreamPurpose purpose);

  // Derives an independent child stream addressed by `tag`.
  RandomStream Split(std::uint64_t tag) const;

  using result_type = std::uint64_t;
  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return ~result_type{0}; }
  result_type operator()() { return NextU64(); }

  std::uint64_t NextU64();
  // Uniform on [0, 1).
  double Uniform();
  // Uniform on (0, 1].
  double UniformOpenLow();
  // Uniform integer in [0, n). Uses Lemire's multiply-shift with rejection.
  std::uint64_t UniformIndex(std::uint64_t n);
  double Normal();

  std::uint64_t seed() const { return seed_; }
  std::uint64_t stream_id() const { return stream_; }
  std::uint64_t position() const { return position_; }

 private:
  void Refill();

  std::uint64_t seed_;
  std::uint64_t stream_;
  std::uint64_t position_ = 0;
  std::array<std::uint64_t, 2> buffer_{};
  int buffered_ = 0;
};

}  // namespace sps

#endif  // SPS_RANDOM_H_
