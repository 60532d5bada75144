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

#include "resebm/sampling.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <ostream>

#include "resebm/errors.hpp"
#include "resebm/numeric.hpp"

namespace resebm {

namespace {

void check_prefix(const JointModel& joint, std::span<const Token> prefix) {
  require(static_cast<int>(prefix.size()) == joint.spec().prefix_len(),
          "prefix length does not match the sequence spec");
  for (Token t : prefix) require(joint.vocab().contains(t), "prefix token out of range");
}

}  // namespace

ResampleDraw topk_joint_sample_detailed(const JointModel& joint, std::span<const Token> prefix,
                                        int n, int k, std::uint64_t seed) {
  require(n >= 1, "joint sampling needs n >= 1");
  require(k >= 1 && k <= joint.vocab().size(), "top-k: k must be in [1, V]");
  check_prefix(joint, prefix);
  const Rng root(seed);
  ResampleDraw out;
  out.candidates.reserve(static_cast<std::size_t>(n));
  out.neg_energy.resize(n);
  for (int j = 0; j < n; ++j) {
    Rng rng = root.split(static_cast<std::uint64_t>(j));
    out.candidates.push_back(sample_suffix(joint.base, prefix, joint.spec(), k, rng));
    out.neg_energy[j] = -energy(joint.energy, out.candidates.back());
  }
  out.resample_prob = softmax(out.neg_energy);
  Rng pick = root.split(static_cast<std::uint64_t>(n));
  out.chosen = static_cast<std::size_t>(sample_categorical(out.resample_prob, pick));
  return out;
}

Sequence topk_joint_sample(const JointModel& joint, std::span<const Token> prefix, int n, int k,
                           std::uint64_t seed) {
  return topk_joint_sample_detailed(joint, prefix, n, k, seed).sample();
}

ExactJointSampler::ExactJointSampler(const JointModel& joint, std::span<const Token> prefix,
                                     std::int64_t budget)
    : enumeration_(enumerate_joint(joint, prefix, budget)),
      probs_(exp_exact(enumeration_.log_prob.array()).matrix()) {}

Sequence ExactJointSampler::draw(Rng& rng) const {
  return enumeration_.sequences[static_cast<std::size_t>(sample_categorical(probs_, rng))];
}

Sequence exact_joint_sample(const JointModel& joint, std::span<const Token> prefix,
                            std::uint64_t seed, std::int64_t budget) {
  Rng rng(seed);
  return ExactJointSampler(joint, prefix, budget).draw(rng);
}

Eigen::VectorXd topk_ar_next_dist(const JointModel& joint, std::span<const Token> context,
                                  int restrict_m, int n_completions, std::uint64_t seed,
                                  bool exact, std::int64_t budget) {
  const auto& spec = joint.spec();
  const int v = joint.vocab().size();
  require(static_cast<int>(context.size()) >= spec.prefix_len() &&
              static_cast<int>(context.size()) < spec.total_len(),
          "context length must be in [p, T-1]");
  for (Token t : context) require(joint.vocab().contains(t), "context token out of range");
  require(restrict_m >= 1 && restrict_m <= v, "restrict_m must be in [1, V]");
  if (!exact) require(n_completions >= 1, "need at least one completion per candidate");

  const Eigen::VectorXd base = joint.base.prob_row(context, context.size()).transpose();
  std::vector<int> order(static_cast<std::size_t>(v));
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return base[a] > base[b]; });

  const Rng root(seed);
  Sequence extended(context.begin(), context.end());
  extended.push_back(0);
  Eigen::VectorXd log_w = Eigen::VectorXd::Constant(v, kNegInf);
  for (int i = 0; i < restrict_m; ++i) {
    const int c = order[static_cast<std::size_t>(i)];
    if (base[c] <= 0.0) continue;
    extended.back() = c;
    double log_future;
    if (exact) {
      log_future = exact_log_future(joint, extended, budget);
    } else {
      Rng rng = root.split(static_cast<std::uint64_t>(c));
      log_future = log_mean_exp(
          std::span<const double>(sample_future_neg_energies(joint, extended, n_completions, rng)));
    }
    log_w[c] = std::log(base[c]) + log_future;
  }
  const double norm = log_sum_exp(log_w);
  return exp_exact(log_w.array() - norm).matrix();
}

void write_resample_csv(std::ostream& os, std::span<const ResampleDraw> draws) {
  os << "sample_id,neg_energy,resample_prob\n";
  for (std::size_t i = 0; i < draws.size(); ++i) {
    const auto c = static_cast<Eigen::Index>(draws[i].chosen);
    os << i << ',' << format_real(draws[i].neg_energy[c]) << ','
       << format_real(draws[i].resample_prob[c]) << '\n';
  }
}

}  // namespace resebm
