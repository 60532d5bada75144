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

#include "resebm/partition.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <ostream>

#include "resebm/errors.hpp"
#include "resebm/numeric.hpp"

namespace resebm {

namespace {

Eigen::Map<const Eigen::VectorXd> as_vector(std::span<const double> s) {
  return Eigen::Map<const Eigen::VectorXd>(s.data(), static_cast<Eigen::Index>(s.size()));
}

// Shared pieces of T_n and the leave-one-out mean, relative to the max m:
// T_n = m + full, mean_i T_{n-1}^{(-i)} = m + loo.
struct ShiftedPool {
  double m = 0.0;
  double full = 0.0;
  double loo = 0.0;
};

ShiftedPool shifted_pool(std::span<const double> s) {
  const auto n = s.size();
  require(n >= 2, "leave-one-out estimates need at least 2 samples");
  const auto imax = static_cast<std::size_t>(std::max_element(s.begin(), s.end()) - s.begin());
  ShiftedPool out;
  out.m = s[imax];
  require(std::isfinite(out.m), "negative energies must be finite");
  std::vector<double> w(n);
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) total += (w[i] = std::exp(s[i] - out.m));
  const double log_nm1 = std::log(static_cast<double>(n - 1));
  out.full = std::log(total) - std::log(static_cast<double>(n));
  double loo_sum = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    if (i == imax) continue;
    // total - w[i] >= w[imax] = 1, so no cancellation here.
    loo_sum += std::log(total - w[i]) - log_nm1;
  }
  // Holding out the max can cancel catastrophically; re-shift by the runner-up.
  double m2 = kNegInf;
  for (std::size_t j = 0; j < n; ++j)
    if (j != imax) m2 = std::max(m2, s[j]);
  double rest = 0.0;
  for (std::size_t j = 0; j < n; ++j)
    if (j != imax) rest += std::exp(s[j] - m2);
  loo_sum += (m2 - out.m) + std::log(rest) - log_nm1;
  out.loo = loo_sum / static_cast<double>(n);
  return out;
}

void check_fixed(const JointModel& joint, std::span<const Token> fixed) {
  const auto& spec = joint.spec();
  require(static_cast<int>(fixed.size()) >= spec.prefix_len() &&
              static_cast<int>(fixed.size()) <= spec.total_len(),
          "partial sequence length must be in [p, T]");
  for (Token t : fixed) require(joint.vocab().contains(t), "token id out of range");
}

void check_prefix(const JointModel& joint, std::span<const Token> prefix) {
  require(static_cast<int>(prefix.size()) == joint.spec().prefix_len(),
          "prefix length does not match the sequence spec");
  check_fixed(joint, prefix);
}

LogPartitionEstimate estimate_with(const JointModel& joint, std::span<const Token> prefix, int n,
                                   Rng& rng) {
  require(n >= 2, "the upper estimator needs n >= 2");
  const auto s = sample_future_neg_energies(joint, prefix, n, rng);
  const auto pool = shifted_pool(s);
  LogPartitionEstimate est;
  est.n = n;
  est.lower = pool.m + pool.full;
  est.upper = pool.m + (2.0 * n - 1.0) * pool.full - 2.0 * (n - 1.0) * pool.loo;
  return est;
}

}  // namespace

JointModel::JointModel(BaseLM base_lm, EnergyModel energy_model)
    : base(std::move(base_lm)), energy(std::move(energy_model)) {
  require(base.vocab() == energy.vocab(), "base LM and energy disagree on the vocabulary");
}

std::int64_t completion_count(const JointModel& joint, std::size_t fixed_len,
                              std::int64_t budget) {
  const int remaining = joint.spec().total_len() - static_cast<int>(fixed_len);
  const auto count = capped_pow(joint.vocab().size(), remaining, budget);
  if (count < 0)
    throw BudgetError("enumerating V^" + std::to_string(remaining) + " completions exceeds budget " +
                      std::to_string(budget));
  return count;
}

double exact_log_future(const JointModel& joint, std::span<const Token> fixed,
                        std::int64_t budget) {
  check_fixed(joint, fixed);
  const auto count = completion_count(joint, fixed.size(), budget);
  Eigen::VectorXd terms(count);
  Eigen::Index k = 0;
  for_each_completion(Sequence(fixed.begin(), fixed.end()), joint.vocab().size(),
                      joint.spec().total_len(), [&](const Sequence& seq) {
                        terms[k++] = log_prob_from(joint.base, seq, fixed.size()) -
                                     energy(joint.energy, seq);
                      });
  return log_sum_exp(terms);
}

double exact_log_partition(const JointModel& joint, std::span<const Token> prefix,
                           std::int64_t budget) {
  check_prefix(joint, prefix);
  return exact_log_future(joint, prefix, budget);
}

SuffixEnumeration enumerate_joint(const JointModel& joint, std::span<const Token> prefix,
                                  std::int64_t budget) {
  check_prefix(joint, prefix);
  const auto count = completion_count(joint, prefix.size(), budget);
  SuffixEnumeration out;
  out.sequences.reserve(static_cast<std::size_t>(count));
  out.log_prob.resize(count);
  Eigen::Index k = 0;
  for_each_completion(Sequence(prefix.begin(), prefix.end()), joint.vocab().size(),
                      joint.spec().total_len(), [&](const Sequence& seq) {
                        out.sequences.push_back(seq);
                        out.log_prob[k++] = log_prob_from(joint.base, seq, prefix.size()) -
                                            energy(joint.energy, seq);
                      });
  out.log_partition = log_sum_exp(out.log_prob);
  out.log_prob.array() -= out.log_partition;
  return out;
}

double log_mean_exp(std::span<const double> neg_energies) {
  require(!neg_energies.empty(), "log_mean_exp of an empty pool");
  return log_mean_exp(as_vector(neg_energies));
}

double leave_one_out_log_mean_exp(std::span<const double> neg_energies) {
  const auto pool = shifted_pool(neg_energies);
  return pool.m + pool.loo;
}

double debiased_log_mean_exp(std::span<const double> neg_energies) {
  const auto pool = shifted_pool(neg_energies);
  const double n = static_cast<double>(neg_energies.size());
  return pool.m + (2.0 * n - 1.0) * pool.full - 2.0 * (n - 1.0) * pool.loo;
}

std::vector<double> sample_future_neg_energies(const JointModel& joint,
                                               std::span<const Token> fixed, int n, Rng& rng) {
  require(n >= 1, "need at least one sample");
  check_fixed(joint, fixed);
  std::vector<double> s(static_cast<std::size_t>(n));
  const Sequence start(fixed.begin(), fixed.end());
  for (auto& v : s)
    v = -energy(joint.energy,
                complete_sequence(joint.base, start, joint.spec().total_len(), std::nullopt, rng));
  return s;
}

LogPartitionEstimate estimate_log_partition(const JointModel& joint,
                                            std::span<const Token> prefix, int n,
                                            std::uint64_t seed) {
  check_prefix(joint, prefix);
  Rng rng(seed);
  auto est = estimate_with(joint, prefix, n, rng);
  est.seed = seed;
  return est;
}

double log_partition_lower(const JointModel& joint, std::span<const Token> prefix, int n,
                           std::uint64_t seed) {
  require(n >= 1, "the lower estimator needs n >= 1");
  check_prefix(joint, prefix);
  Rng rng(seed);
  const auto s = sample_future_neg_energies(joint, prefix, n, rng);
  return log_mean_exp(std::span<const double>(s));
}

double log_partition_upper(const JointModel& joint, std::span<const Token> prefix, int n,
                           std::uint64_t seed) {
  return estimate_log_partition(joint, prefix, n, seed).upper;
}

StepBounds step_log_prob_bounds(const JointModel& joint, const Sequence& seq, int pos, int n,
                                std::uint64_t seed, bool exact, std::int64_t budget) {
  const auto& spec = joint.spec();
  check_sequence(seq, spec, joint.vocab());
  require(pos >= spec.prefix_len() && pos < spec.total_len(), "step position outside scored range");
  const auto upos = static_cast<std::size_t>(pos);
  const double base_lp = joint.base.log_row(seq, upos)(seq[upos]);
  const std::span<const Token> upto(seq.data(), upos + 1);
  const std::span<const Token> before(seq.data(), upos);

  if (exact) {
    const double v = base_lp + exact_log_future(joint, upto, budget) -
                     exact_log_future(joint, before, budget);
    return {v, v};
  }
  if (pos == spec.total_len() - 1) {
    const double v = base_lp - energy(joint.energy, seq) -
                     exact_log_future(joint, before, std::max<std::int64_t>(budget, joint.vocab().size()));
    return {v, v};
  }
  require(n >= 2, "step bounds need n >= 2 samples");
  const Rng root(seed);
  Rng rng_num = root.split(2 * upos + 1);
  Rng rng_den = root.split(2 * upos);
  const auto num = shifted_pool(sample_future_neg_energies(joint, upto, n, rng_num));
  const auto den = shifted_pool(sample_future_neg_energies(joint, before, n, rng_den));
  const double nn = n;
  const double num_lower = num.m + num.full;
  const double num_upper = num.m + (2.0 * nn - 1.0) * num.full - 2.0 * (nn - 1.0) * num.loo;
  const double den_lower = den.m + den.full;
  const double den_upper = den.m + (2.0 * nn - 1.0) * den.full - 2.0 * (nn - 1.0) * den.loo;
  return {base_lp + num_lower - den_upper, base_lp + num_upper - den_lower};
}

namespace {

void check_corpus(const JointModel& joint, const Corpus& corpus) {
  require(!corpus.sequences.empty(), "perplexity of an empty corpus");
  require(corpus.spec == joint.spec() && corpus.vocab == joint.vocab(),
          "corpus does not match the joint model's spec");
}

double ppl_from(double total_log_prob, const Corpus& corpus) {
  const double tokens =
      static_cast<double>(corpus.sequences.size()) * corpus.spec.suffix_len();
  return std::exp(-total_log_prob / tokens);
}

}  // namespace

PplInterval seq_ppl_bounds(const JointModel& joint, const Corpus& corpus, int n,
                           std::uint64_t seed) {
  check_corpus(joint, corpus);
  const auto p = static_cast<std::size_t>(corpus.spec.prefix_len());
  double lp_upper = 0.0;
  double lp_lower = 0.0;
  for (std::size_t i = 0; i < corpus.sequences.size(); ++i) {
    const auto& seq = corpus.sequences[i];
    check_sequence(seq, corpus.spec, corpus.vocab);
    Rng rng(seed, i);
    const auto est = estimate_with(joint, std::span<const Token>(seq.data(), p), n, rng);
    const double unnorm = log_prob_from(joint.base, seq, p) - energy(joint.energy, seq);
    lp_upper += unnorm - est.upper;
    lp_lower += unnorm - est.lower;
  }
  return {ppl_from(lp_upper, corpus), ppl_from(lp_lower, corpus)};
}

double exact_seq_ppl(const JointModel& joint, const Corpus& corpus, std::int64_t budget) {
  check_corpus(joint, corpus);
  const auto p = static_cast<std::size_t>(corpus.spec.prefix_len());
  std::map<Sequence, double> log_z;
  double lp = 0.0;
  for (const auto& seq : corpus.sequences) {
    check_sequence(seq, corpus.spec, corpus.vocab);
    Sequence prefix(seq.begin(), seq.begin() + static_cast<std::ptrdiff_t>(p));
    auto it = log_z.find(prefix);
    if (it == log_z.end())
      it = log_z.emplace(prefix, exact_log_partition(joint, prefix, budget)).first;
    lp += log_prob_from(joint.base, seq, p) - energy(joint.energy, seq) - it->second;
  }
  return ppl_from(lp, corpus);
}

double base_ppl(const BaseLM& lm, const Corpus& corpus) {
  require(!corpus.sequences.empty(), "perplexity of an empty corpus");
  double lp = 0.0;
  for (const auto& seq : corpus.sequences) lp += seq_log_prob(lm, seq, corpus.spec);
  return ppl_from(lp, corpus);
}

void write_bounds_csv(std::ostream& os, std::span<const BoundsRow> rows) {
  os << "prefix_id,t,lower,upper,exact\n";
  for (const auto& r : rows) {
    os << r.prefix_id << ',' << r.t << ',' << format_real(r.lower) << ',' << format_real(r.upper)
       << ',';
    if (r.exact) os << format_real(*r.exact);
    os << '\n';
  }
}

}  // namespace resebm
