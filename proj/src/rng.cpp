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

#include "resebm/rng.hpp"

#include "resebm/errors.hpp"

namespace resebm {

namespace {
constexpr std::uint64_t kGolden = 0x9e3779b97f4a7c15ULL;
}  // namespace

std::uint64_t mix64(std::uint64_t x) {
  // splitmix64 finalizer
  x ^= x >> 30;
  x *= 0xbf58476d1ce4e5b9ULL;
  x ^= x >> 27;
  x *= 0x94d049bb133111ebULL;
  x ^= x >> 31;
  return x;
}

Rng::Rng(std::uint64_t seed, std::uint64_t stream)
    : key_(mix64(mix64(seed + kGolden) ^ (stream * kGolden + 0x632be59bd9b4e019ULL))) {}

Rng::result_type Rng::operator()() {
  ++counter_;
  return mix64(key_ + counter_ * kGolden);
}

double Rng::uniform() {
  return static_cast<double>((*this)() >> 11) * 0x1.0p-53;
}

int Rng::uniform_int(int n) {
  require(n > 0, "uniform_int: n must be positive");
  const auto wide = static_cast<unsigned __int128>((*this)()) * static_cast<unsigned>(n);
  return static_cast<int>(wide >> 64);
}

Rng Rng::split(std::uint64_t index) const {
  return Rng(FromKey{}, mix64(key_ ^ mix64(index * kGolden + 0x2545f4914f6cdd1dULL)));
}

int sample_categorical(const Eigen::Ref<const Eigen::VectorXd>& probs, Rng& rng) {
  const Eigen::Index n = probs.size();
  require(n > 0, "sample_categorical: empty distribution");
  const double total = probs.sum();
  require(total > 0.0, "sample_categorical: distribution has no mass");
  const double u = rng.uniform() * total;
  double acc = 0.0;
  int last_positive = -1;
  for (Eigen::Index i = 0; i < n; ++i) {
    if (probs[i] <= 0.0) continue;
    last_positive = static_cast<int>(i);
    acc += probs[i];
    if (u < acc) return last_positive;
  }
  return last_positive;  // roundoff at the top end
}

}  // namespace resebm
