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

#include "resebm/eval.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <ostream>
#include <set>
#include <tuple>

#include "resebm/errors.hpp"
#include "resebm/numeric.hpp"

namespace resebm {

namespace {

void check_classes(std::size_t positives, std::size_t negatives) {
  require(positives > 0 && negatives > 0, "balanced accuracy needs both classes");
}

std::vector<double> lm_scores(const BaseLM& lm, const SequenceSpec& spec,
                              std::span<const Sequence> seqs) {
  std::vector<double> out;
  out.reserve(seqs.size());
  for (const auto& s : seqs) out.push_back(-seq_log_prob(lm, s, spec));
  return out;
}

std::vector<double> average_ranks(std::span<const double> x) {
  const auto n = x.size();
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), 0);
  std::stable_sort(idx.begin(), idx.end(), [&](auto a, auto b) { return x[a] < x[b]; });
  std::vector<double> ranks(n);
  for (std::size_t i = 0; i < n;) {
    std::size_t j = i;
    while (j + 1 < n && x[idx[j + 1]] == x[idx[i]]) ++j;
    const double r = 0.5 * static_cast<double>(i + j) + 1.0;
    for (std::size_t k = i; k <= j; ++k) ranks[idx[k]] = r;
    i = j + 1;
  }
  return ranks;
}

std::vector<Sequence> draw_positives(const DataDistribution& data, const SequenceSpec& spec,
                                     int count, const Rng& root) {
  std::vector<Sequence> out;
  out.reserve(static_cast<std::size_t>(count));
  for (int i = 0; i < count; ++i) {
    Rng rng = root.split(static_cast<std::uint64_t>(i));
    out.push_back(sample_sequence(data, spec, rng));
  }
  return out;
}

std::vector<Sequence> draw_negatives(const BaseLM& lm, const SequenceSpec& spec,
                                     std::span<const Sequence> positives, const Rng& root) {
  std::vector<Sequence> out;
  out.reserve(positives.size());
  const auto p = static_cast<std::size_t>(spec.prefix_len());
  for (std::size_t i = 0; i < positives.size(); ++i) {
    Rng rng = root.split(i);
    out.push_back(sample_suffix(lm, std::span<const Token>(positives[i].data(), p), spec,
                                std::nullopt, rng));
  }
  return out;
}

bool is_linear(EnergyKind kind) { return kind != EnergyKind::kMlp1; }

}  // namespace

double balanced_accuracy_from_scores(std::span<const double> positive_scores,
                                     std::span<const double> negative_scores, double threshold) {
  check_classes(positive_scores.size(), negative_scores.size());
  const auto tp = std::count_if(positive_scores.begin(), positive_scores.end(),
                                [&](double s) { return s > threshold; });
  const auto tn = std::count_if(negative_scores.begin(), negative_scores.end(),
                                [&](double s) { return !(s > threshold); });
  return 0.5 * (static_cast<double>(tp) / static_cast<double>(positive_scores.size()) +
                static_cast<double>(tn) / static_cast<double>(negative_scores.size()));
}

double balanced_accuracy(const EnergyModel& model, std::span<const Sequence> positives,
                         std::span<const Sequence> negatives, double threshold) {
  check_classes(positives.size(), negatives.size());
  std::vector<double> ps, ns;
  for (const auto& s : positives) ps.push_back(-energy(model, s));
  for (const auto& s : negatives) ns.push_back(-energy(model, s));
  return balanced_accuracy_from_scores(ps, ns, threshold);
}

double lm_score_accuracy(const BaseLM& lm, const SequenceSpec& spec,
                         std::span<const Sequence> positives, std::span<const Sequence> negatives,
                         double threshold) {
  check_classes(positives.size(), negatives.size());
  return balanced_accuracy_from_scores(lm_scores(lm, spec, positives),
                                       lm_scores(lm, spec, negatives), threshold);
}

ThresholdChoice select_lm_threshold(const BaseLM& lm, const SequenceSpec& spec,
                                    std::span<const Sequence> positives,
                                    std::span<const Sequence> negatives,
                                    std::span<const double> grid) {
  check_classes(positives.size(), negatives.size());
  require(!grid.empty(), "threshold grid is empty");
  auto ps = lm_scores(lm, spec, positives);
  auto ns = lm_scores(lm, spec, negatives);
  std::sort(ps.begin(), ps.end());
  std::sort(ns.begin(), ns.end());
  ThresholdChoice best{grid[0], -1.0};
  for (double t : grid) {
    // real iff score > t: positives above t, negatives at or below t
    const auto pos_above = ps.end() - std::upper_bound(ps.begin(), ps.end(), t);
    const auto neg_below = std::upper_bound(ns.begin(), ns.end(), t) - ns.begin();
    const double acc = 0.5 * (static_cast<double>(pos_above) / static_cast<double>(ps.size()) +
                              static_cast<double>(neg_below) / static_cast<double>(ns.size()));
    if (acc > best.accuracy) best = {t, acc};
  }
  return best;
}

std::string_view to_string(SettingTag tag) {
  switch (tag) {
    case SettingTag::kInDomain:
      return "in-domain";
    case SettingTag::kCrossArchitecture:
      return "cross-architecture";
    case SettingTag::kCrossCorpus:
      return "cross-corpus";
    case SettingTag::kWild:
      return "wild";
  }
  return "unknown";
}

SettingTag parse_setting_tag(std::string_view name) {
  for (auto tag : {SettingTag::kInDomain, SettingTag::kCrossArchitecture, SettingTag::kCrossCorpus,
                   SettingTag::kWild})
    if (to_string(tag) == name) return tag;
  throw ValidationError("unknown generalization setting '" + std::string(name) + "'");
}

void GeneralizationSetting::validate() const {
  const bool same_corpus = train_data_seed == test_data_seed;
  const bool same_arch = train_lm_kind == test_lm_kind;
  require(train_lm_kind >= 0 && test_lm_kind >= 0, "base LM kinds are non-negative Markov orders");
  bool ok = false;
  switch (tag) {
    case SettingTag::kInDomain:
      ok = same_corpus && same_arch;
      break;
    case SettingTag::kCrossArchitecture:
      ok = same_corpus && !same_arch;
      break;
    case SettingTag::kCrossCorpus:
      ok = !same_corpus && same_arch;
      break;
    case SettingTag::kWild:
      ok = !same_corpus && !same_arch;
      break;
  }
  require(ok, "setting '" + std::string(to_string(tag)) +
                  "' is inconsistent with its corpus and architecture fields");
}

std::vector<GeneralizationSetting> make_grid_2x2(std::uint64_t corpus_a, std::uint64_t corpus_b,
                                                 int kind_a, int kind_b) {
  return {
      {SettingTag::kInDomain, corpus_a, corpus_a, kind_a, kind_a},
      {SettingTag::kCrossArchitecture, corpus_a, corpus_a, kind_a, kind_b},
      {SettingTag::kCrossCorpus, corpus_a, corpus_b, kind_a, kind_a},
      {SettingTag::kWild, corpus_a, corpus_b, kind_a, kind_b},
  };
}

std::vector<GridCell> generalization_grid(std::span<const GeneralizationSetting> settings,
                                          const ToyTaskConfig& config) {
  for (const auto& s : settings) s.validate();
  config.nce.validate();
  const Rng root(config.seed);
  const Rng train_gen_rng = root.split(1);
  const Rng test_gen_rng = root.split(2);

  auto data_for = [&](std::uint64_t data_seed) {
    return make_markov_dist(config.data_order, config.vocab, config.concentration, data_seed);
  };
  auto generator_for = [&](const DataDistribution& data, int kind, const Rng& gen_rng,
                           std::uint64_t data_seed) {
    const auto corpus_seed = gen_rng.split(data_seed).split(static_cast<std::uint64_t>(kind)).key();
    return fit_tabular(sample_corpus(data, config.spec, config.lm_corpus_size, corpus_seed), kind,
                       config.lm_smoothing);
  };

  std::map<std::pair<std::uint64_t, int>, EnergyModel> trained;
  std::vector<GridCell> out;
  for (std::size_t i = 0; i < settings.size(); ++i) {
    const auto& s = settings[i];
    const auto key = std::make_pair(s.train_data_seed, s.train_lm_kind);
    auto it = trained.find(key);
    if (it == trained.end()) {
      const auto data = data_for(s.train_data_seed);
      const auto gen = generator_for(data, s.train_lm_kind, train_gen_rng, s.train_data_seed);
      const auto init = EnergyModel::random_init(config.energy_kind, config.vocab, config.spec,
                                                 root.split(3).key(), config.hidden);
      it = trained.emplace(key, train(init, gen, data, config.nce).model).first;
    }
    const auto test_data = data_for(s.test_data_seed);
    const auto test_gen = generator_for(test_data, s.test_lm_kind, test_gen_rng, s.test_data_seed);
    const Rng eval_rng = root.split(4).split(s.test_data_seed).split(static_cast<std::uint64_t>(s.test_lm_kind));
    const auto positives = draw_positives(test_data, config.spec, config.test_pairs, eval_rng.split(0));
    const auto negatives = draw_negatives(test_gen, config.spec, positives, eval_rng.split(1));
    out.push_back({s, balanced_accuracy(it->second, positives, negatives)});
  }
  return out;
}

std::vector<SweepPoint> prefix_sweep(const DataDistribution& data, const BaseLM& lm,
                                     std::span<const int> prefix_lens, const SweepConfig& config) {
  require(!prefix_lens.empty(), "prefix sweep needs at least one prefix length");
  for (int p : prefix_lens)
    require(p >= 0 && p < config.total_len, "prefix length must be in [0, T)");
  config.nce.validate();
  const Rng root(config.seed);
  std::vector<SweepPoint> out;
  for (int p : prefix_lens) {
    const SequenceSpec spec(p, config.total_len);
    const Rng prng = root.split(static_cast<std::uint64_t>(p));
    const auto init = EnergyModel::random_init(config.energy_kind, data.vocab(), spec,
                                               prng.split(0).key(), config.hidden);
    NCEConfig nce = config.nce;
    nce.seed = prng.split(1).key();
    const auto model = train(init, lm, data, nce).model;
    const auto positives = draw_positives(data, spec, config.test_pairs, prng.split(2));
    const auto negatives = draw_negatives(lm, spec, positives, prng.split(3));
    out.push_back({p, static_cast<double>(p) / config.total_len,
                   balanced_accuracy(model, positives, negatives)});
  }
  return out;
}

double spearman(std::span<const double> x, std::span<const double> y) {
  require(x.size() == y.size() && x.size() >= 2, "spearman needs two equal-length samples");
  const auto rx = average_ranks(x);
  const auto ry = average_ranks(y);
  const auto n = static_cast<Eigen::Index>(x.size());
  const Eigen::Map<const Eigen::VectorXd> a(rx.data(), n), b(ry.data(), n);
  const Eigen::VectorXd ca = a.array() - a.mean();
  const Eigen::VectorXd cb = b.array() - b.mean();
  const double denom = std::sqrt(ca.squaredNorm() * cb.squaredNorm());
  return denom > 0.0 ? ca.dot(cb) / denom : 0.0;
}

double unique_ngram_fraction(std::span<const Sequence> samples, int n, const SequenceSpec& spec) {
  require(n >= 1, "n-gram order must be at least 1");
  require(!samples.empty(), "no samples");
  const int positions = spec.suffix_len() - n + 1;
  require(positions >= 1, "scored range is shorter than the n-gram order");
  double total = 0.0;
  for (const auto& s : samples) {
    require(static_cast<int>(s.size()) == spec.total_len(), "sample does not match the sequence spec");
    std::set<std::vector<Token>> seen;
    for (int i = spec.prefix_len(); i + n <= spec.total_len(); ++i)
      seen.emplace(s.begin() + i, s.begin() + i + n);
    total += static_cast<double>(seen.size()) / positions;
  }
  return total / static_cast<double>(samples.size());
}

namespace {

DensityReport make_report(std::vector<double> own, std::vector<double> data) {
  require(!own.empty() && !data.empty(), "density gap needs both sample sets");
  const auto mean = [](const std::vector<double>& v) {
    return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
  };
  DensityReport r;
  r.gap = std::abs(mean(own) - mean(data));
  r.own_scores = std::move(own);
  r.data_scores = std::move(data);
  return r;
}

}  // namespace

DensityReport density_gap(const BaseLM& lm, const SequenceSpec& spec,
                          std::span<const Sequence> own_samples,
                          std::span<const Sequence> data_samples) {
  std::vector<double> own, data;
  for (const auto& s : own_samples) own.push_back(seq_log_prob(lm, s, spec));
  for (const auto& s : data_samples) data.push_back(seq_log_prob(lm, s, spec));
  return make_report(std::move(own), std::move(data));
}

DensityReport density_gap(const JointModel& joint, std::span<const Sequence> own_samples,
                          std::span<const Sequence> data_samples, std::int64_t budget) {
  const auto p = static_cast<std::ptrdiff_t>(joint.spec().prefix_len());
  std::map<Sequence, double> log_z;
  auto score = [&](const Sequence& s) {
    check_sequence(s, joint.spec(), joint.vocab());
    Sequence prefix(s.begin(), s.begin() + p);
    auto it = log_z.find(prefix);
    if (it == log_z.end()) it = log_z.emplace(prefix, exact_log_partition(joint, prefix, budget)).first;
    return log_prob_from(joint.base, s, static_cast<std::size_t>(p)) - energy(joint.energy, s) -
           it->second;
  };
  std::vector<double> own, data;
  for (const auto& s : own_samples) own.push_back(score(s));
  for (const auto& s : data_samples) data.push_back(score(s));
  return make_report(std::move(own), std::move(data));
}

void write_histogram_csv(std::ostream& os, const DensityReport& report) {
  os << "score,class\n";
  for (double s : report.own_scores) os << format_real(s) << ",own\n";
  for (double s : report.data_scores) os << format_real(s) << ",data\n";
}

std::string_view to_string(PerturbationKind kind) {
  return kind == PerturbationKind::kReplaceRandom ? "replace-random" : "swap-adjacent";
}

PerturbationKind parse_perturbation_kind(std::string_view name) {
  if (name == "replace-random") return PerturbationKind::kReplaceRandom;
  if (name == "swap-adjacent") return PerturbationKind::kSwapAdjacent;
  throw ValidationError("unknown perturbation kind '" + std::string(name) + "'");
}

std::vector<PerturbationPoint> perturbation_profile(const EnergyModel& model, const BaseLM& lm,
                                                    const Corpus& corpus, PerturbationKind kind,
                                                    std::uint64_t seed) {
  require(!corpus.sequences.empty(), "perturbation profile of an empty corpus");
  require(corpus.spec == model.spec() && corpus.vocab == model.vocab(),
          "corpus does not match the energy model's spec");
  const auto& spec = corpus.spec;
  const int p = spec.prefix_len();
  const int v = corpus.vocab.size();
  const int last = kind == PerturbationKind::kSwapAdjacent ? spec.total_len() - 1 : spec.total_len();
  require(last > p, "scored range too short for adjacent swaps");
  const auto up = static_cast<std::size_t>(p);
  const double count = static_cast<double>(corpus.sequences.size());

  std::vector<PerturbationPoint> out;
  for (int pos = p; pos < last; ++pos) {
    const auto upos = static_cast<std::size_t>(pos);
    double sum_de = 0.0;
    double sum_dnll = 0.0;
    for (std::size_t i = 0; i < corpus.sequences.size(); ++i) {
      const Sequence& x = corpus.sequences[i];
      Sequence y = x;
      double de = 0.0;
      if (kind == PerturbationKind::kReplaceRandom) {
        Rng rng = Rng(seed, i).split(upos);
        const int r = rng.uniform_int(v - 1);
        y[upos] = r < x[upos] ? r : r + 1;
        if (is_linear(model.kind())) de = replacement_delta(model, x, pos, y[upos]);
      } else {
        std::swap(y[upos], y[upos + 1]);
        if (is_linear(model.kind())) {
          Sequence mid = x;
          mid[upos] = x[upos + 1];
          de = replacement_delta(model, x, pos, x[upos + 1]) +
               replacement_delta(model, mid, pos + 1, x[upos]);
        }
      }
      if (!is_linear(model.kind())) de = energy(model, y) - energy(model, x);
      sum_de += de;
      sum_dnll += log_prob_from(lm, x, up) - log_prob_from(lm, y, up);
    }
    out.push_back({pos, sum_de / count, sum_dnll / count});
  }
  return out;
}

double total_variation(const Eigen::Ref<const Eigen::VectorXd>& p,
                       const Eigen::Ref<const Eigen::VectorXd>& q) {
  require(p.size() == q.size(), "total variation needs equal supports");
  return 0.5 * (p - q).cwiseAbs().sum();
}

}  // namespace resebm
