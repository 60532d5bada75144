// Copyright 2026 The resebm Authors.
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

#ifndef RESEBM_RNG_HPP_
#define RESEBM_RNG_HPP_

#include <cstdint>
#include <limits>

#include <Eigen/Core>

namespace resebm {

std::uint64_t mix64(std::uint64_t x);

// Counter-based generator: the i-th output is a pure function of (key, i).
// Streams are addressed by (seed, stream index) and split into child
// streams, so results never depend on the order in which streams are used.
class Rng {
 public:
  using result_type = std::uint64_t;

  explicit Rng(std::uint64_t seed, std::uint64_t stream = 0);

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() {
    return std::numeric_limits<result_type>::max();
  }

  result_type operator()();

  // Uniform in [0, 1) with 53 random bits.
  double uniform();
  // Uniform integer in [0, n).
  int uniform_int(int n);

  // Independent child stream; does not advance this stream.
  Rng split(std::uint64_t index) const;

  std::uint64_t key() const { return key_; }

 private:
  struct FromKey {};
  Rng(FromKey, std::uint64_t key) : key_(key) {}

  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

// Draws an index from a probability vector (need not be exactly normalized).
// Zero-probability entries are never returned.
int sample_categorical(const Eigen::Ref<const Eigen::VectorXd>& probs, Rng& rng);

}  // namespace resebm

#endif  // RESEBM_RNG_HPP_
