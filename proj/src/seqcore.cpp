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

#include "resebm/seqcore.hpp"

#include <cmath>
#include <istream>
#include <ostream>
#include <random>

#include "format_util.hpp"
#include "resebm/errors.hpp"
#include "resebm/numeric.hpp"

namespace resebm {

namespace {
constexpr std::int64_t kMaxContexts = std::int64_t{1} << 24;
constexpr double kRowTolerance = 1e-12;
}  // namespace

Vocab::Vocab(int size) : size_(size) {
  require(size >= 2, "vocabulary size must be at least 2");
}

SequenceSpec::SequenceSpec(int prefix_len, int total_len)
    : prefix_len_(prefix_len), total_len_(total_len) {
  require(total_len >= 1, "total length must be positive");
  require(prefix_len >= 0 && prefix_len < total_len, "prefix length must be in [0, T)");
}

void check_sequence(const Sequence& seq, const SequenceSpec& spec, const Vocab& vocab) {
  require(static_cast<int>(seq.size()) == spec.total_len(),
          "sequence length " + std::to_string(seq.size()) + " does not match T=" +
              std::to_string(spec.total_len()));
  for (Token t : seq) require(vocab.contains(t), "token id " + std::to_string(t) + " out of range");
}

std::int64_t num_contexts(const Vocab& vocab, int order) {
  require(order >= 0, "Markov order must be non-negative");
  const auto n = capped_pow(vocab.size(), order, kMaxContexts);
  require(n > 0, "too many Markov contexts for order " + std::to_string(order));
  return n;
}

std::int64_t context_index(std::span<const Token> tokens, std::size_t pos, int order,
                           int vocab_size) {
  std::int64_t idx = 0;
  for (int j = order; j >= 1; --j) {
    const auto back = static_cast<std::ptrdiff_t>(pos) - j;
    const Token t = back >= 0 ? tokens[static_cast<std::size_t>(back)] : 0;
    idx = idx * vocab_size + t;
  }
  return idx;
}

DataDistribution::DataDistribution(int order, Vocab vocab, Eigen::MatrixXd table)
    : order_(order), vocab_(vocab), table_(std::move(table)) {
  require(table_.rows() == num_contexts(vocab_, order_) && table_.cols() == vocab_.size(),
          "distribution table has the wrong shape");
  require((table_.array() >= 0.0).all(), "distribution table has negative entries");
  for (Eigen::Index r = 0; r < table_.rows(); ++r)
    require(std::abs(table_.row(r).sum() - 1.0) <= kRowTolerance,
            "distribution row " + std::to_string(r) + " does not sum to 1");
}

Eigen::VectorXd DataDistribution::next_dist(std::span<const Token> tokens,
                                            std::size_t pos) const {
  return table_.row(context_index(tokens, pos, order_, vocab_.size())).transpose();
}

DataDistribution make_markov_dist(int order, const Vocab& vocab, double concentration,
                                  std::uint64_t seed) {
  require(concentration > 0.0, "concentration must be positive");
  const auto rows = num_contexts(vocab, order);
  const int v = vocab.size();
  Eigen::MatrixXd table(rows, v);
  if (std::isinf(concentration)) {
    table.setConstant(1.0 / v);
    return DataDistribution(order, vocab, std::move(table));
  }
  for (std::int64_t r = 0; r < rows; ++r) {
    Rng rng(seed, static_cast<std::uint64_t>(r));
    std::gamma_distribution<double> gamma(concentration, 1.0);
    for (int j = 0; j < v; ++j) table(r, j) = std::max(gamma(rng), 1e-300);
    table.row(r) /= table.row(r).sum();
  }
  return DataDistribution(order, vocab, std::move(table));
}

double exact_data_log_prob(const DataDistribution& dist, const Sequence& seq,
                           const SequenceSpec& spec) {
  check_sequence(seq, spec, dist.vocab());
  double lp = 0.0;
  for (int i = spec.prefix_len(); i < spec.total_len(); ++i) {
    const auto c = context_index(seq, static_cast<std::size_t>(i), dist.order(), dist.vocab().size());
    lp += std::log(dist.table()(c, seq[static_cast<std::size_t>(i)]));
  }
  return lp;
}

Sequence sample_sequence(const DataDistribution& dist, const SequenceSpec& spec, Rng& rng) {
  Sequence seq(static_cast<std::size_t>(spec.total_len()), 0);
  const int v = dist.vocab().size();
  for (std::size_t i = 0; i < seq.size(); ++i) {
    const auto c = context_index(seq, i, dist.order(), v);
    seq[i] = sample_categorical(dist.table().row(c).transpose(), rng);
  }
  return seq;
}

Corpus sample_corpus(const DataDistribution& dist, const SequenceSpec& spec, int count,
                     std::uint64_t seed) {
  require(count >= 1, "corpus count must be at least 1");
  Corpus corpus{spec, dist.vocab(), {}, seed, "markov"};
  corpus.sequences.reserve(static_cast<std::size_t>(count));
  for (int i = 0; i < count; ++i) {
    Rng rng(seed, static_cast<std::uint64_t>(i));
    corpus.sequences.push_back(sample_sequence(dist, spec, rng));
  }
  return corpus;
}

void write_corpus(std::ostream& os, const Corpus& corpus) {
  os << "#spec p=" << corpus.spec.prefix_len() << " T=" << corpus.spec.total_len()
     << " V=" << corpus.vocab.size() << '\n';
  for (const auto& seq : corpus.sequences) {
    for (std::size_t i = 0; i < seq.size(); ++i) os << (i ? " " : "") << seq[i];
    os << '\n';
  }
}

Corpus read_corpus(std::istream& is) {
  const auto fields = detail::parse_header(detail::read_line(is, "corpus header"), "spec");
  try {
    SequenceSpec spec(static_cast<int>(detail::parse_int(detail::header_field(fields, "p"))),
                      static_cast<int>(detail::parse_int(detail::header_field(fields, "T"))));
    Vocab vocab(static_cast<int>(detail::parse_int(detail::header_field(fields, "V"))));
    Corpus corpus{spec, vocab, {}, 0, "file"};
    std::string line;
    while (std::getline(is, line)) {
      if (!line.empty() && line.back() == '\r') line.pop_back();
      if (line.empty()) continue;
      Sequence seq;
      for (const auto& tok : detail::split_ws(line))
        seq.push_back(static_cast<Token>(detail::parse_int(tok)));
      check_sequence(seq, spec, vocab);
      corpus.sequences.push_back(std::move(seq));
    }
    return corpus;
  } catch (const ValidationError& e) {
    throw IoError(std::string("invalid corpus: ") + e.what());
  }
}

void write_data_dist(std::ostream& os, const DataDistribution& dist) {
  os << "#markov order=" << dist.order() << " V=" << dist.vocab().size() << '\n';
  const auto& t = dist.table();
  for (Eigen::Index r = 0; r < t.rows(); ++r) {
    for (Eigen::Index c = 0; c < t.cols(); ++c) os << (c ? " " : "") << format_real(t(r, c));
    os << '\n';
  }
}

DataDistribution read_data_dist(std::istream& is) {
  const auto fields = detail::parse_header(detail::read_line(is, "distribution header"), "markov");
  try {
    const int order = static_cast<int>(detail::parse_int(detail::header_field(fields, "order")));
    Vocab vocab(static_cast<int>(detail::parse_int(detail::header_field(fields, "V"))));
    const auto rows = num_contexts(vocab, order);
    Eigen::MatrixXd table(rows, vocab.size());
    for (std::int64_t r = 0; r < rows; ++r) {
      const auto vals = detail::split_ws(detail::read_line(is, "distribution row"));
      if (static_cast<int>(vals.size()) != vocab.size()) throw IoError("distribution row has wrong width");
      for (int c = 0; c < vocab.size(); ++c) table(r, c) = detail::parse_real(vals[static_cast<std::size_t>(c)]);
    }
    return DataDistribution(order, vocab, std::move(table));
  } catch (const ValidationError& e) {
    throw IoError(std::string("invalid distribution: ") + e.what());
  }
}

}  // namespace resebm
