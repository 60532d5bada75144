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

#ifndef RESEBM_NCE_HPP_
#define RESEBM_NCE_HPP_

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "resebm/baselm.hpp"
#include "resebm/energy.hpp"
#include "resebm/partition.hpp"
#include "resebm/seqcore.hpp"

namespace resebm {

// Mean over pairs of log sigmoid(-E(x+)) + log sigmoid(E(x-)).
double nce_objective(const EnergyModel& model, std::span<const Sequence> positives,
                     std::span<const Sequence> negatives);

Eigen::VectorXd nce_param_grad(const EnergyModel& model, std::span<const Sequence> positives,
                               std::span<const Sequence> negatives);

struct NCEConfig {
  int steps = 1000;
  int batch_pairs = 64;
  double learning_rate = 0.1;
  std::uint64_t seed = 0;
  int eval_every = 100;
  std::int64_t enumeration_budget = kDefaultEnumerationBudget;

  void validate() const;
};

struct TraceRecord {
  int step = 0;
  double objective = 0.0;  // mini-batch objective before the update at `step`
  std::optional<double> log_z;
  std::optional<double> kl;
};

struct TrainTrace {
  std::vector<TraceRecord> records;
};

struct TrainResult {
  EnergyModel model;
  TrainTrace trace;
};

// Gradient ascent on the NCE objective. Each step draws batch_pairs positives
// and one negative suffix per positive prefix from the base model.
//
// Positives come either from the data distribution or uniformly from a corpus.
// Trace diagnostics: log_z is the data-weighted mean exact log Z over prefixes
// (the corpus prefixes when training from a corpus) and kl is
// E_prefix KL(P_data || P_joint); both are recorded only when V^T fits the
// enumeration budget, and kl only when training from a distribution.
TrainResult train(const EnergyModel& init, const BaseLM& lm, const DataDistribution& data,
                  const NCEConfig& config);
TrainResult train(const EnergyModel& init, const BaseLM& lm, const Corpus& data,
                  const NCEConfig& config);

// Exact KL(P_data || P_joint) averaged over prefixes drawn from P_data.
double exact_kl_data_to_joint(const DataDistribution& data, const JointModel& joint,
                              std::int64_t budget = kDefaultEnumerationBudget);

// Exact data-weighted mean of log Z over prefixes.
double exact_mean_log_partition(const DataDistribution& data, const JointModel& joint,
                                std::int64_t budget = kDefaultEnumerationBudget);

// `step,objective,logZ,kl`
void write_trace_csv(std::ostream& os, const TrainTrace& trace);

}  // namespace resebm

#endif  // RESEBM_NCE_HPP_
