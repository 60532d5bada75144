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

#ifndef RESEBM_TESTS_FIXTURES_HPP_
#define RESEBM_TESTS_FIXTURES_HPP_

// Shared fixtures and brute-force oracles. Oracles here work in linear
// probability space with their own indexing, independent of the library's
// log-space enumeration paths.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <map>
#include <vector>

#include <Eigen/Core>

#include "resebm/baselm.hpp"
#include "resebm/energy.hpp"
#include "resebm/partition.hpp"
#include "resebm/rng.hpp"
#include "resebm/seqcore.hpp"

namespace resebm::testing {

inline BaseLM uniform_lm(int v, int order = 0) {
  const auto rows = num_contexts(Vocab(v), order);
  return BaseLM(order, Vocab(v), 0.0,
                Eigen::MatrixXd::Constant(rows, v, -std::log(static_cast<double>(v))));
}

inline BaseLM lm_from_probs(int order, int v, const Eigen::MatrixXd& probs, double smoothing = 0.0) {
  return BaseLM(order, Vocab(v), smoothing, probs.array().log().matrix());
}

inline EnergyModel linear_bag(const SequenceSpec& spec, std::vector<double> u) {
  const int v = static_cast<int>(u.size());
  return EnergyModel(EnergyKind::kLinearBag, Vocab(v), spec,
                     Eigen::Map<Eigen::VectorXd>(u.data(), v));
}

// V=2, p=0, T=2, uniform base, u = [ln 2, 0]:
// exp(-E) = {00: 4, 01: 2, 10: 2, 11: 1}, Z = 9/4.
inline JointModel canonical_joint() {
  const SequenceSpec spec(0, 2);
  return JointModel(uniform_lm(2), linear_bag(spec, {std::log(2.0), 0.0}));
}

inline Eigen::VectorXd canonical_joint_probs() {
  Eigen::VectorXd p(4);
  p << 4.0 / 9, 2.0 / 9, 2.0 / 9, 1.0 / 9;
  return p;
}

// Suffix index in lexicographic order over positions [p, T).
inline int suffix_index(const Sequence& s, int p, int v) {
  int idx = 0;
  for (std::size_t i = static_cast<std::size_t>(p); i < s.size(); ++i) idx = idx * v + s[i];
  return idx;
}

inline Sequence decode_suffix(const Sequence& prefix, int idx, int suffix_len, int v) {
  Sequence s = prefix;
  s.resize(prefix.size() + static_cast<std::size_t>(suffix_len));
  for (int i = suffix_len - 1; i >= 0; --i) {
    s[prefix.size() + static_cast<std::size_t>(i)] = idx % v;
    idx /= v;
  }
  return s;
}

// Context lookup written independently of the library's context_index.
inline double table_prob(const Eigen::MatrixXd& probs, int order, int v, const Sequence& s,
                         std::size_t pos) {
  long ctx = 0;
  for (int j = order; j >= 1; --j) {
    const long back = static_cast<long>(pos) - j;
    ctx = ctx * v + (back >= 0 ? s[static_cast<std::size_t>(back)] : 0);
  }
  return probs(ctx, s[pos]);
}

// P_base(suffix | prefix) as a product of looked-up probabilities.
inline double oracle_base_prob(const BaseLM& lm, const Sequence& s, int from) {
  double prob = 1.0;
  for (std::size_t i = static_cast<std::size_t>(from); i < s.size(); ++i)
    prob *= table_prob(lm.prob_table(), lm.order(), lm.vocab().size(), s, i);
  return prob;
}

// Exact joint suffix distribution, linear space.
inline Eigen::VectorXd oracle_joint_probs(const JointModel& joint, const Sequence& prefix) {
  const int v = joint.vocab().size();
  const int l = joint.spec().suffix_len();
  const int count = static_cast<int>(std::lround(std::pow(v, l)));
  Eigen::VectorXd w(count);
  for (int i = 0; i < count; ++i) {
    const auto s = decode_suffix(prefix, i, l, v);
    w[i] = oracle_base_prob(joint.base, s, joint.spec().prefix_len()) *
           std::exp(-energy(joint.energy, s));
  }
  return w / w.sum();
}

inline double oracle_log_partition(const JointModel& joint, const Sequence& prefix) {
  const int v = joint.vocab().size();
  const int l = joint.spec().suffix_len();
  const int count = static_cast<int>(std::lround(std::pow(v, l)));
  double z = 0.0;
  for (int i = 0; i < count; ++i) {
    const auto s = decode_suffix(prefix, i, l, v);
    z += oracle_base_prob(joint.base, s, joint.spec().prefix_len()) * std::exp(-energy(joint.energy, s));
  }
  return std::log(z);
}

// Direct O(n^2) leave-one-out mean of log-mean-exp.
inline double oracle_leave_one_out(const std::vector<double>& s) {
  const std::size_t n = s.size();
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    double m = -INFINITY;
    for (std::size_t j = 0; j < n; ++j)
      if (j != i) m = std::max(m, s[j]);
    double acc = 0.0;
    for (std::size_t j = 0; j < n; ++j)
      if (j != i) acc += std::exp(s[j] - m);
    total += m + std::log(acc / static_cast<double>(n - 1));
  }
  return total / static_cast<double>(n);
}

// Chain-rule probability of x_pos given x_<pos under the joint, by brute
// force over complete sequences.
inline double oracle_step_log_prob(const JointModel& joint, const Sequence& seq, int pos) {
  const int v = joint.vocab().size();
  const int p = joint.spec().prefix_len();
  const int l = joint.spec().suffix_len();
  const Sequence prefix(seq.begin(), seq.begin() + p);
  const auto probs = oracle_joint_probs(joint, prefix);
  double num = 0.0, den = 0.0;
  for (int i = 0; i < probs.size(); ++i) {
    const auto s = decode_suffix(prefix, i, l, v);
    if (!std::equal(seq.begin() + p, seq.begin() + pos, s.begin() + p)) continue;
    den += probs[i];
    if (s[static_cast<std::size_t>(pos)] == seq[static_cast<std::size_t>(pos)]) num += probs[i];
  }
  return std::log(num / den);
}

inline Eigen::MatrixXd dirichlet_rows(std::int64_t rows, int v, double alpha, Rng& rng) {
  const auto dist = make_markov_dist(0, Vocab(v), alpha, rng());
  Eigen::MatrixXd out(rows, v);
  for (std::int64_t r = 0; r < rows; ++r)
    out.row(r) = make_markov_dist(0, Vocab(v), alpha, rng()).table().row(0);
  (void)dist;
  return out;
}

// Relative variance of exp(-E) under the base for one prefix.
inline double weight_relative_variance(const JointModel& joint, const Sequence& prefix) {
  const int v = joint.vocab().size();
  const int l = joint.spec().suffix_len();
  const int count = static_cast<int>(std::lround(std::pow(v, l)));
  double m1 = 0.0, m2 = 0.0;
  for (int i = 0; i < count; ++i) {
    const auto s = decode_suffix(prefix, i, l, v);
    const double p = oracle_base_prob(joint.base, s, joint.spec().prefix_len());
    const double w = std::exp(-energy(joint.energy, s));
    m1 += p * w;
    m2 += p * w * w;
  }
  return m2 / (m1 * m1) - 1.0;
}

// Random joint with V in [2,4], T-p in [2,4], p in {0,1}, an order-1 base with
// Dirichlet(1) rows, and a position-table energy. With target_relvar > 0 the
// energy is rescaled so that Var(exp(-E)) / Z^2 under the base equals it for
// the all-zeros prefix.
inline JointModel random_joint(std::uint64_t seed, double target_relvar = 0.0,
                               EnergyKind kind = EnergyKind::kPositionTable) {
  Rng rng(seed);
  const int v = 2 + rng.uniform_int(3);
  const int l = 2 + rng.uniform_int(3);
  const int p = rng.uniform_int(2);
  const SequenceSpec spec(p, p + l);
  const Vocab vocab(v);
  const auto base_probs = dirichlet_rows(v, v, 1.0, rng);
  BaseLM base = lm_from_probs(1, v, base_probs);
  auto shape = EnergyModel::random_init(kind, vocab, spec, rng(), kDefaultHidden, 1.0);
  if (target_relvar <= 0.0) return JointModel(base, shape);
  const Sequence prefix(static_cast<std::size_t>(p), 0);
  double lo = 0.0, hi = 1.0;
  while (weight_relative_variance(JointModel(base, shape.with_params(hi * shape.params())), prefix) <
             target_relvar &&
         hi < 1e3)
    hi *= 2.0;
  for (int it = 0; it < 80; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (weight_relative_variance(JointModel(base, shape.with_params(mid * shape.params())), prefix) <
        target_relvar)
      lo = mid;
    else
      hi = mid;
  }
  return JointModel(base, shape.with_params(0.5 * (lo + hi) * shape.params()));
}

// Random sequence that matches a joint's spec.
inline Sequence random_sequence(const SequenceSpec& spec, int v, Rng& rng) {
  Sequence s(static_cast<std::size_t>(spec.total_len()));
  for (auto& t : s) t = rng.uniform_int(v);
  return s;
}

// max_i |a_i - b_i| / max(1, |a_i|, |b_i|)
inline double max_relative_error(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  double worst = 0.0;
  for (Eigen::Index i = 0; i < a.size(); ++i) {
    const double scale = std::max({1.0, std::abs(a[i]), std::abs(b[i])});
    worst = std::max(worst, std::abs(a[i] - b[i]) / scale);
  }
  return worst;
}

// Central differences with step h of f around x.
inline Eigen::VectorXd central_differences(const std::function<double(const Eigen::VectorXd&)>& f,
                                           const Eigen::VectorXd& x, double h = 1e-6) {
  Eigen::VectorXd g(x.size());
  Eigen::VectorXd xp = x;
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    xp[i] = x[i] + h;
    const double fp = f(xp);
    xp[i] = x[i] - h;
    const double fm = f(xp);
    xp[i] = x[i];
    g[i] = (fp - fm) / (2.0 * h);
  }
  return g;
}

// Empirical suffix frequencies of a list of samples.
inline Eigen::VectorXd empirical_suffix_probs(const std::vector<Sequence>& samples, int p, int v,
                                              int suffix_len) {
  const int count = static_cast<int>(std::lround(std::pow(v, suffix_len)));
  Eigen::VectorXd freq = Eigen::VectorXd::Zero(count);
  for (const auto& s : samples) freq[suffix_index(s, p, v)] += 1.0;
  return freq / static_cast<double>(samples.size());
}

}  // namespace resebm::testing

#endif  // RESEBM_TESTS_FIXTURES_HPP_
