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

#ifndef RESEBM_BASELM_HPP_
#define RESEBM_BASELM_HPP_

#include <iosfwd>
#include <optional>
#include <span>

#include <Eigen/Core>

#include "resebm/rng.hpp"
#include "resebm/seqcore.hpp"

namespace resebm {

// Fixed autoregressive proposal: a tabular Markov model stored as
// conditional log-probabilities, one row per context.
class BaseLM {
 public:
  BaseLM(int order, Vocab vocab, double smoothing, Eigen::MatrixXd log_table);

  int order() const { return order_; }
  const Vocab& vocab() const { return vocab_; }
  double smoothing() const { return smoothing_; }
  const Eigen::MatrixXd& log_table() const { return log_table_; }
  const Eigen::MatrixXd& prob_table() const { return prob_table_; }

  // True when every conditional probability is strictly positive.
  bool has_full_support() const;

  // Row of P(. | tokens[pos-order .. pos-1]).
  auto log_row(std::span<const Token> tokens, std::size_t pos) const {
    return log_table_.row(context_index(tokens, pos, order_, vocab_.size()));
  }
  auto prob_row(std::span<const Token> tokens, std::size_t pos) const {
    return prob_table_.row(context_index(tokens, pos, order_, vocab_.size()));
  }

 private:
  int order_;
  Vocab vocab_;
  double smoothing_;
  Eigen::MatrixXd log_table_;
  Eigen::MatrixXd prob_table_;
};

// Add-lambda smoothed maximum likelihood over the scored positions of every
// corpus sequence. lambda = 0 leaves unseen contexts uniform; an infinite
// lambda gives the uniform model.
BaseLM fit_tabular(const Corpus& corpus, int order, double smoothing);

// The base model that reproduces a data distribution exactly.
BaseLM base_lm_from_distribution(const DataDistribution& dist);

// P(. | context) using the trailing `order` tokens of context.
Eigen::VectorXd cond_dist(const BaseLM& lm, std::span<const Token> context);

// Sum of log P(x_i | x_<i) over positions [from, seq.size()).
double log_prob_from(const BaseLM& lm, const Sequence& seq, std::size_t from);

double seq_log_prob(const BaseLM& lm, const Sequence& seq, const SequenceSpec& spec);

// Keeps the k largest entries (ties go to the lower token id) and
// renormalizes them.
Eigen::VectorXd topk_truncate(const Eigen::Ref<const Eigen::VectorXd>& dist, int k);

// Ancestral sampling of positions [seq.size(), total_len), optionally top-k.
Sequence complete_sequence(const BaseLM& lm, Sequence seq, int total_len,
                           std::optional<int> k, Rng& rng);

Sequence sample_suffix(const BaseLM& lm, std::span<const Token> prefix,
                       const SequenceSpec& spec, std::optional<int> k, Rng& rng);
Sequence sample_suffix(const BaseLM& lm, std::span<const Token> prefix,
                       const SequenceSpec& spec, std::optional<int> k, std::uint64_t seed);

// Per-context product of experts, renormalized. Effective order is the max
// of the two orders.
BaseLM ralm_combine(const BaseLM& a, const BaseLM& b);

void write_base_lm(std::ostream& os, const BaseLM& lm);
BaseLM read_base_lm(std::istream& is);

}  // namespace resebm

#endif  // RESEBM_BASELM_HPP_
