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

#include "resebm/baselm.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <numeric>
#include <ostream>

#include "format_util.hpp"
#include "resebm/errors.hpp"
#include "resebm/numeric.hpp"

namespace resebm {

namespace {

constexpr double kRowTolerance = 1e-12;

Eigen::MatrixXd log_of(const Eigen::MatrixXd& probs) { return probs.array().log().matrix(); }

}  // namespace

BaseLM::BaseLM(int order, Vocab vocab, double smoothing, Eigen::MatrixXd log_table)
    : order_(order), vocab_(vocab), smoothing_(smoothing), log_table_(std::move(log_table)) {
  require(smoothing_ >= 0.0, "smoothing must be non-negative");
  require(log_table_.rows() == num_contexts(vocab_, order_) && log_table_.cols() == vocab_.size(),
          "base LM table has the wrong shape");
  prob_table_ = exp_exact(log_table_.array()).matrix();
  for (Eigen::Index r = 0; r < prob_table_.rows(); ++r)
    require(std::abs(prob_table_.row(r).sum() - 1.0) <= kRowTolerance,
            "base LM row " + std::to_string(r) + " does not sum to 1");
  if (smoothing_ > 0.0)
    require((prob_table_.array() > 0.0).all(), "smoothed base LM must have full support");
}

bool BaseLM::has_full_support() const { return (prob_table_.array() > 0.0).all(); }

BaseLM fit_tabular(const Corpus& corpus, int order, double smoothing) {
  require(!corpus.sequences.empty(), "cannot fit a base LM on an empty corpus");
  require(smoothing >= 0.0, "smoothing must be non-negative");
  const int v = corpus.vocab.size();
  const auto rows = num_contexts(corpus.vocab, order);
  if (std::isinf(smoothing)) {
    return BaseLM(order, corpus.vocab, smoothing,
                  Eigen::MatrixXd::Constant(rows, v, -std::log(static_cast<double>(v))));
  }
  Eigen::MatrixXd counts = Eigen::MatrixXd::Zero(rows, v);
  for (const auto& seq : corpus.sequences) {
    check_sequence(seq, corpus.spec, corpus.vocab);
    for (int i = corpus.spec.prefix_len(); i < corpus.spec.total_len(); ++i) {
      const auto pos = static_cast<std::size_t>(i);
      counts(context_index(seq, pos, order, v), seq[pos]) += 1.0;
    }
  }
  counts.array() += smoothing;
  for (Eigen::Index r = 0; r < rows; ++r) {
    const double total = counts.row(r).sum();
    if (total > 0.0)
      counts.row(r) /= total;
    else
      counts.row(r).setConstant(1.0 / v);
  }
  return BaseLM(order, corpus.vocab, smoothing, log_of(counts));
}

BaseLM base_lm_from_distribution(const DataDistribution& dist) {
  return BaseLM(dist.order(), dist.vocab(), 0.0, log_of(dist.table()));
}

Eigen::VectorXd cond_dist(const BaseLM& lm, std::span<const Token> context) {
  for (Token t : context)
    require(lm.vocab().contains(t), "context token " + std::to_string(t) + " out of range");
  return lm.prob_row(context, context.size()).transpose();
}

double log_prob_from(const BaseLM& lm, const Sequence& seq, std::size_t from) {
  double lp = 0.0;
  for (std::size_t i = from; i < seq.size(); ++i) lp += lm.log_row(seq, i)(seq[i]);
  return lp;
}

double seq_log_prob(const BaseLM& lm, const Sequence& seq, const SequenceSpec& spec) {
  check_sequence(seq, spec, lm.vocab());
  return log_prob_from(lm, seq, static_cast<std::size_t>(spec.prefix_len()));
}

Eigen::VectorXd topk_truncate(const Eigen::Ref<const Eigen::VectorXd>& dist, int k) {
  const auto v = static_cast<int>(dist.size());
  require(k >= 1 && k <= v, "top-k: k must be in [1, V]");
  if (k == v) return dist;
  std::vector<int> order(static_cast<std::size_t>(v));
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return dist[a] > dist[b]; });
  Eigen::VectorXd out = Eigen::VectorXd::Zero(v);
  double kept = 0.0;
  for (int i = 0; i < k; ++i) {
    const int j = order[static_cast<std::size_t>(i)];
    out[j] = dist[j];
    kept += dist[j];
  }
  require(kept > 0.0, "top-k: retained entries have no mass");
  return out / kept;
}

Sequence complete_sequence(const BaseLM& lm, Sequence seq, int total_len,
                           std::optional<int> k, Rng& rng) {
  if (k) require(*k >= 1 && *k <= lm.vocab().size(), "top-k: k must be in [1, V]");
  const bool truncate = k && *k < lm.vocab().size();
  seq.reserve(static_cast<std::size_t>(total_len));
  while (static_cast<int>(seq.size()) < total_len) {
    const auto pos = seq.size();
    seq.push_back(0);
    if (truncate) {
      const Eigen::VectorXd row = lm.prob_row(seq, pos).transpose();
      seq[pos] = sample_categorical(topk_truncate(row, *k), rng);
    } else {
      seq[pos] = sample_categorical(lm.prob_row(seq, pos).transpose(), rng);
    }
  }
  return seq;
}

Sequence sample_suffix(const BaseLM& lm, std::span<const Token> prefix,
                       const SequenceSpec& spec, std::optional<int> k, Rng& rng) {
  require(static_cast<int>(prefix.size()) == spec.prefix_len(),
          "prefix length does not match the sequence spec");
  for (Token t : prefix) require(lm.vocab().contains(t), "prefix token out of range");
  return complete_sequence(lm, Sequence(prefix.begin(), prefix.end()), spec.total_len(), k, rng);
}

Sequence sample_suffix(const BaseLM& lm, std::span<const Token> prefix,
                       const SequenceSpec& spec, std::optional<int> k, std::uint64_t seed) {
  Rng rng(seed);
  return sample_suffix(lm, prefix, spec, k, rng);
}

BaseLM ralm_combine(const BaseLM& a, const BaseLM& b) {
  require(a.vocab() == b.vocab(), "RALM combination needs a shared vocabulary");
  const int order = std::max(a.order(), b.order());
  const auto rows = num_contexts(a.vocab(), order);
  const auto rows_a = a.log_table().rows();
  const auto rows_b = b.log_table().rows();
  Eigen::MatrixXd out(rows, a.vocab().size());
  for (std::int64_t c = 0; c < rows; ++c) {
    // The trailing tokens of the context are its least significant digits.
    const Eigen::VectorXd logits = (a.log_table().row(c % rows_a) + b.log_table().row(c % rows_b)).transpose();
    const double norm = log_sum_exp(logits);
    require(std::isfinite(norm), "RALM combination: context with disjoint supports");
    out.row(c) = (logits.array() - norm).matrix().transpose();
  }
  return BaseLM(order, a.vocab(), std::min(a.smoothing(), b.smoothing()), std::move(out));
}

void write_base_lm(std::ostream& os, const BaseLM& lm) {
  os << "#baselm order=" << lm.order() << " V=" << lm.vocab().size()
     << " lambda=" << format_real(lm.smoothing()) << '\n';
  const auto& t = lm.log_table();
  for (Eigen::Index r = 0; r < t.rows(); ++r) {
    for (Eigen::Index c = 0; c < t.cols(); ++c) os << (c ? " " : "") << format_real(t(r, c));
    os << '\n';
  }
}

BaseLM read_base_lm(std::istream& is) {
  const auto fields = detail::parse_header(detail::read_line(is, "base LM header"), "baselm");
  try {
    const int order = static_cast<int>(detail::parse_int(detail::header_field(fields, "order")));
    Vocab vocab(static_cast<int>(detail::parse_int(detail::header_field(fields, "V"))));
    const double lambda = detail::parse_real(detail::header_field(fields, "lambda"));
    const auto rows = num_contexts(vocab, order);
    Eigen::MatrixXd table(rows, vocab.size());
    for (std::int64_t r = 0; r < rows; ++r) {
      const auto vals = detail::split_ws(detail::read_line(is, "base LM row"));
      if (static_cast<int>(vals.size()) != vocab.size()) throw IoError("base LM row has wrong width");
      for (int c = 0; c < vocab.size(); ++c) table(r, c) = detail::parse_real(vals[static_cast<std::size_t>(c)]);
    }
    return BaseLM(order, vocab, lambda, std::move(table));
  } catch (const ValidationError& e) {
    throw IoError(std::string("invalid base LM: ") + e.what());
  }
}

}  // namespace resebm
