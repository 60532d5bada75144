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

#ifndef RESEBM_EVAL_HPP_
#define RESEBM_EVAL_HPP_

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string_view>
#include <vector>

#include <Eigen/Core>

#include "resebm/baselm.hpp"
#include "resebm/energy.hpp"
#include "resebm/nce.hpp"
#include "resebm/partition.hpp"

namespace resebm {

// Mean of the true-positive and true-negative rates when x is called real
// iff score(x) > threshold. Ties count as fake.
double balanced_accuracy_from_scores(std::span<const double> positive_scores,
                                     std::span<const double> negative_scores, double threshold);

// Score is -E(x); the default threshold is the logistic decision boundary.
double balanced_accuracy(const EnergyModel& model, std::span<const Sequence> positives,
                         std::span<const Sequence> negatives, double threshold = 0.0);

// Score is the base model's negative log-likelihood of the suffix.
double lm_score_accuracy(const BaseLM& lm, const SequenceSpec& spec,
                         std::span<const Sequence> positives, std::span<const Sequence> negatives,
                         double threshold);

struct ThresholdChoice {
  double threshold = 0.0;
  double accuracy = 0.0;
};

// Best threshold from `grid` on a validation split; the first grid point wins
// ties.
ThresholdChoice select_lm_threshold(const BaseLM& lm, const SequenceSpec& spec,
                                    std::span<const Sequence> positives,
                                    std::span<const Sequence> negatives,
                                    std::span<const double> grid);

enum class SettingTag { kInDomain, kCrossArchitecture, kCrossCorpus, kWild };

std::string_view to_string(SettingTag tag);
SettingTag parse_setting_tag(std::string_view name);

// Corpora are identified by the seed of their data distribution and
// generator architectures by the Markov order of the fitted base model.
struct GeneralizationSetting {
  SettingTag tag = SettingTag::kInDomain;
  std::uint64_t train_data_seed = 0;
  std::uint64_t test_data_seed = 0;
  int train_lm_kind = 0;
  int test_lm_kind = 0;

  // The tag must agree with which of corpus/architecture differ.
  void validate() const;
};

// in-domain, cross-architecture, cross-corpus, wild for training side (a, kind_a).
std::vector<GeneralizationSetting> make_grid_2x2(std::uint64_t corpus_a, std::uint64_t corpus_b,
                                                 int kind_a, int kind_b);

struct ToyTaskConfig {
  Vocab vocab{4};
  SequenceSpec spec{0, 4};
  int data_order = 1;
  double concentration = 0.3;
  int lm_corpus_size = 2000;
  double lm_smoothing = 1.0;
  EnergyKind energy_kind = EnergyKind::kMlp1;
  int hidden = kDefaultHidden;
  NCEConfig nce;
  int test_pairs = 2000;
  std::uint64_t seed = 0;
};

struct GridCell {
  GeneralizationSetting setting;
  double accuracy = 0.0;
};

// Trains on (train corpus, train generator) and tests on (test corpus, test
// generator). The two generators are fitted on corpora drawn from different
// seeds even when the setting names the same corpus and architecture.
std::vector<GridCell> generalization_grid(std::span<const GeneralizationSetting> settings,
                                          const ToyTaskConfig& config);

struct SweepConfig {
  int total_len = 8;
  EnergyKind energy_kind = EnergyKind::kMlp1;
  int hidden = kDefaultHidden;
  NCEConfig nce;
  int test_pairs = 2000;
  std::uint64_t seed = 0;
};

struct SweepPoint {
  int prefix_len = 0;
  double ratio = 0.0;  // p / T
  double accuracy = 0.0;
};

std::vector<SweepPoint> prefix_sweep(const DataDistribution& data, const BaseLM& lm,
                                     std::span<const int> prefix_lens, const SweepConfig& config);

// Spearman rank correlation with average ranks for ties.
double spearman(std::span<const double> x, std::span<const double> y);

// Per sample, distinct n-grams over the scored range divided by the number of
// n-gram positions, averaged over samples.
double unique_ngram_fraction(std::span<const Sequence> samples, int n, const SequenceSpec& spec);

struct DensityReport {
  double gap = 0.0;
  std::vector<double> own_scores;
  std::vector<double> data_scores;
};

// |mean log-likelihood(own) - mean log-likelihood(data)| under the scorer.
DensityReport density_gap(const BaseLM& lm, const SequenceSpec& spec,
                          std::span<const Sequence> own_samples,
                          std::span<const Sequence> data_samples);
DensityReport density_gap(const JointModel& joint, std::span<const Sequence> own_samples,
                          std::span<const Sequence> data_samples,
                          std::int64_t budget = kDefaultEnumerationBudget);

// `score,class` with class `own` or `data`.
void write_histogram_csv(std::ostream& os, const DensityReport& report);

enum class PerturbationKind { kReplaceRandom, kSwapAdjacent };

std::string_view to_string(PerturbationKind kind);
PerturbationKind parse_perturbation_kind(std::string_view name);

struct PerturbationPoint {
  int pos = 0;
  double mean_delta_energy = 0.0;
  double mean_delta_nll = 0.0;
};

// For every scored position (every adjacent pair start for swaps), perturbs
// each corpus sequence and averages the energy and base-NLL changes.
// Replacements are uniform over V minus the original token, drawn from
// stream (seed, sequence index) split by position. Energy changes of the
// linear kinds are accumulated from exact replacement deltas.
std::vector<PerturbationPoint> perturbation_profile(const EnergyModel& model, const BaseLM& lm,
                                                    const Corpus& corpus, PerturbationKind kind,
                                                    std::uint64_t seed);

double total_variation(const Eigen::Ref<const Eigen::VectorXd>& p,
                       const Eigen::Ref<const Eigen::VectorXd>& q);

}  // namespace resebm

#endif  // RESEBM_EVAL_HPP_
