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

#ifndef RESEBM_SEQCORE_HPP_
#define RESEBM_SEQCORE_HPP_

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "resebm/rng.hpp"

namespace resebm {

using Token = int;
// A full sequence of T tokens: the prefix followed by the scored suffix.
using Sequence = std::vector<Token>;

class Vocab {
 public:
  explicit Vocab(int size);
  int size() const { return size_; }
  bool contains(Token t) const { return t >= 0 && t < size_; }
  friend bool operator==(const Vocab&, const Vocab&) = default;

 private:
  int size_;
};

// Positions [0, prefix_len) are conditioning context; [prefix_len, total_len)
// are generated and scored.
class SequenceSpec {
 public:
  SequenceSpec(int prefix_len, int total_len);
  int prefix_len() const { return prefix_len_; }
  int total_len() const { return total_len_; }
  int suffix_len() const { return total_len_ - prefix_len_; }
  friend bool operator==(const SequenceSpec&, const SequenceSpec&) = default;

 private:
  int prefix_len_;
  int total_len_;
};

void check_sequence(const Sequence& seq, const SequenceSpec& spec, const Vocab& vocab);

// Number of order-m contexts, V^m; throws if it would not fit in memory.
std::int64_t num_contexts(const Vocab& vocab, int order);

// Lexicographic index of the `order` tokens preceding position `pos` in
// `tokens` (oldest token most significant). Positions before the start of the
// sequence read as token 0.
std::int64_t context_index(std::span<const Token> tokens, std::size_t pos, int order,
                           int vocab_size);

// Tabular order-m Markov chain with explicit conditional rows.
class DataDistribution {
 public:
  DataDistribution(int order, Vocab vocab, Eigen::MatrixXd table);

  int order() const { return order_; }
  const Vocab& vocab() const { return vocab_; }
  // Row c is P(. | context c); shape V^order x V.
  const Eigen::MatrixXd& table() const { return table_; }

  Eigen::VectorXd next_dist(std::span<const Token> tokens, std::size_t pos) const;

 private:
  int order_;
  Vocab vocab_;
  Eigen::MatrixXd table_;
};

// Rows drawn from a symmetric Dirichlet with the given concentration. An
// infinite concentration gives exactly uniform rows.
DataDistribution make_markov_dist(int order, const Vocab& vocab, double concentration,
                                  std::uint64_t seed);

double exact_data_log_prob(const DataDistribution& dist, const Sequence& seq,
                           const SequenceSpec& spec);

Sequence sample_sequence(const DataDistribution& dist, const SequenceSpec& spec, Rng& rng);

struct Corpus {
  SequenceSpec spec;
  Vocab vocab;
  std::vector<Sequence> sequences;
  std::uint64_t seed = 0;
  std::string generator;
};

// Sequence i is drawn from stream (seed, i).
Corpus sample_corpus(const DataDistribution& dist, const SequenceSpec& spec, int count,
                     std::uint64_t seed);

void write_corpus(std::ostream& os, const Corpus& corpus);
Corpus read_corpus(std::istream& is);

// `#markov order=<m> V=<V>` then one row of probabilities per context.
void write_data_dist(std::ostream& os, const DataDistribution& dist);
DataDistribution read_data_dist(std::istream& is);

// Calls f(seq) for every completion of `fixed` to length total_len, in
// lexicographic order. `seq` is reused between calls.
template <typename F>
void for_each_completion(const Sequence& fixed, int vocab_size, int total_len, F&& f) {
  Sequence seq = fixed;
  const std::size_t start = fixed.size();
  seq.resize(static_cast<std::size_t>(total_len), 0);
  if (start >= seq.size()) {
    f(static_cast<const Sequence&>(seq));
    return;
  }
  while (true) {
    f(static_cast<const Sequence&>(seq));
    std::size_t i = seq.size();
    while (i > start) {
      --i;
      if (++seq[i] < vocab_size) break;
      seq[i] = 0;
      if (i == start) return;
    }
  }
}

}  // namespace resebm

#endif  // RESEBM_SEQCORE_HPP_
