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

#ifndef RESEBM_PARTITION_HPP_
#define RESEBM_PARTITION_HPP_

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "resebm/baselm.hpp"
#include "resebm/energy.hpp"
#include "resebm/seqcore.hpp"

namespace resebm {

inline constexpr std::int64_t kDefaultEnumerationBudget = 4096;

// P(x | prefix) = P_base(x | prefix) exp(-E(x)) / Z(prefix).
struct JointModel {
  JointModel(BaseLM base, EnergyModel energy);

  const SequenceSpec& spec() const { return energy.spec(); }
  const Vocab& vocab() const { return base.vocab(); }

  BaseLM base;
  EnergyModel energy;
};

// Number of completions of a length-`fixed_len` partial sequence, checked
// against the budget.
std::int64_t completion_count(const JointModel& joint, std::size_t fixed_len,
                              std::int64_t budget);

// log E_{y ~ P_base(. | fixed)} exp(-E(fixed, y)) by enumeration. `fixed`
// holds at least the prefix; a complete sequence gives -E(fixed).
double exact_log_future(const JointModel& joint, std::span<const Token> fixed,
                        std::int64_t budget = kDefaultEnumerationBudget);

double exact_log_partition(const JointModel& joint, std::span<const Token> prefix,
                           std::int64_t budget = kDefaultEnumerationBudget);

// Every suffix of a prefix with its exact joint log-probability.
struct SuffixEnumeration {
  std::vector<Sequence> sequences;
  Eigen::VectorXd log_prob;
  double log_partition = 0.0;
};

SuffixEnumeration enumerate_joint(const JointModel& joint, std::span<const Token> prefix,
                                  std::int64_t budget = kDefaultEnumerationBudget);

// Estimators over a pool of negative energies s_i = -E(x_i).
//
// log_mean_exp:  T_n = log (1/n) sum exp(s_i)
// leave_one_out_log_mean_exp: the mean over i of T_{n-1} with s_i held out,
//   computed in one pass from the shifted running sum.
// debiased_log_mean_exp: (2n-1) T_n - 2(n-1) mean_i T_{n-1}^{(-i)}.
double log_mean_exp(std::span<const double> neg_energies);
double leave_one_out_log_mean_exp(std::span<const double> neg_energies);
double debiased_log_mean_exp(std::span<const double> neg_energies);

// Negative energies of n completions of `fixed` drawn from the base model.
std::vector<double> sample_future_neg_energies(const JointModel& joint,
                                               std::span<const Token> fixed, int n, Rng& rng);

struct LogPartitionEstimate {
  double lower = 0.0;  // T_n
  double upper = 0.0;  // debiased
  int n = 0;
  std::uint64_t seed = 0;
};

// Both estimators share the sample set drawn from stream `seed`.
LogPartitionEstimate estimate_log_partition(const JointModel& joint,
                                            std::span<const Token> prefix, int n,
                                            std::uint64_t seed);
double log_partition_lower(const JointModel& joint, std::span<const Token> prefix, int n,
                           std::uint64_t seed);
double log_partition_upper(const JointModel& joint, std::span<const Token> prefix, int n,
                           std::uint64_t seed);

struct StepBounds {
  double lower = 0.0;
  double upper = 0.0;
};

// Bounds on log P(x_pos | x_<pos) for a 0-based position pos in [p, T).
//
// log P = log P_base(x_pos | x_<pos) + log N - log D with N the expected
// exp(-E) over futures of x_<=pos and D the same over futures of x_<pos. The
// lower bound pairs the lower estimate of N with the upper estimate of D. At
// the last position N is exp(-E(x)) and D is enumerated over V tokens, so the
// bounds coincide. With `exact`, both are enumerated.
StepBounds step_log_prob_bounds(const JointModel& joint, const Sequence& seq, int pos, int n,
                                std::uint64_t seed, bool exact,
                                std::int64_t budget = kDefaultEnumerationBudget);

struct PplInterval {
  double upper = 0.0;  // from the upper log Z estimate
  double lower = 0.0;  // from the lower log Z estimate
};

// Corpus perplexity of the joint model; sequence i estimates its prefix's
// partition from stream split i of `seed` with n samples.
PplInterval seq_ppl_bounds(const JointModel& joint, const Corpus& corpus, int n,
                           std::uint64_t seed);
double exact_seq_ppl(const JointModel& joint, const Corpus& corpus,
                     std::int64_t budget = kDefaultEnumerationBudget);
double base_ppl(const BaseLM& lm, const Corpus& corpus);

struct BoundsRow {
  int prefix_id = 0;
  int t = 0;  // 1-based position
  double lower = 0.0;
  double upper = 0.0;
  std::optional<double> exact;
};

// `prefix_id,t,lower,upper,exact`
void write_bounds_csv(std::ostream& os, std::span<const BoundsRow> rows);

}  // namespace resebm

#endif  // RESEBM_PARTITION_HPP_
