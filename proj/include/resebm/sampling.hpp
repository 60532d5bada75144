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

#ifndef RESEBM_SAMPLING_HPP_
#define RESEBM_SAMPLING_HPP_

#include <cstdint>
#include <iosfwd>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "resebm/partition.hpp"

namespace resebm {

// One call of top-k joint sampling with everything needed for diagnostics.
struct ResampleDraw {
  std::vector<Sequence> candidates;
  Eigen::VectorXd neg_energy;
  Eigen::VectorXd resample_prob;
  std::size_t chosen = 0;

  const Sequence& sample() const { return candidates[chosen]; }
};

// Draws n top-k candidates from the base model and resamples one of them with
// probability softmax(-E). Candidate j uses split j of `seed`; the resampling
// draw uses split n.
ResampleDraw topk_joint_sample_detailed(const JointModel& joint, std::span<const Token> prefix,
                                        int n, int k, std::uint64_t seed);
Sequence topk_joint_sample(const JointModel& joint, std::span<const Token> prefix, int n, int k,
                           std::uint64_t seed);

// Samples from the enumerated joint over the suffixes of one prefix.
class ExactJointSampler {
 public:
  ExactJointSampler(const JointModel& joint, std::span<const Token> prefix,
                    std::int64_t budget = kDefaultEnumerationBudget);

  Sequence draw(Rng& rng) const;
  const SuffixEnumeration& enumeration() const { return enumeration_; }

 private:
  SuffixEnumeration enumeration_;
  Eigen::VectorXd probs_;
};

Sequence exact_joint_sample(const JointModel& joint, std::span<const Token> prefix,
                            std::uint64_t seed, std::int64_t budget = kDefaultEnumerationBudget);

// Next-token distribution of the joint model restricted to the restrict_m
// most probable base-model tokens after `context`, renormalized over that
// set. Not a normalized model over the full vocabulary when restrict_m < V.
// Futures are enumerated under `exact`, otherwise each candidate averages
// exp(-E) over n_completions base-model completions (split c of `seed`).
Eigen::VectorXd topk_ar_next_dist(const JointModel& joint, std::span<const Token> context,
                                  int restrict_m, int n_completions, std::uint64_t seed,
                                  bool exact, std::int64_t budget = kDefaultEnumerationBudget);

// `sample_id,neg_energy,resample_prob` for the chosen candidate of each draw.
void write_resample_csv(std::ostream& os, std::span<const ResampleDraw> draws);

}  // namespace resebm

#endif  // RESEBM_SAMPLING_HPP_
