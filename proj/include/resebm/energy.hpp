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

#ifndef RESEBM_ENERGY_HPP_
#define RESEBM_ENERGY_HPP_

#include <cstdint>
#include <iosfwd>
#include <string_view>

#include <Eigen/Core>

#include "resebm/seqcore.hpp"

namespace resebm {

enum class EnergyKind {
  kLinearBag,      // E = -sum_i u[x_i]
  kPositionTable,  // E = -sum_i u[i][x_i]
  kMlp1,           // E = -(w2 . tanh(W onehot(x) + b1) + b2)
};

std::string_view to_string(EnergyKind kind);
EnergyKind parse_energy_kind(std::string_view name);

inline constexpr int kDefaultHidden = 16;

// Whole-sequence energy over the scored positions [p, T). The prefix is
// shared by positives and negatives and is never read.
//
// Parameter layout for kMlp1 with L = T - p scored positions and width H:
// W (H x L*V, row-major), then b1 (H), w2 (H), b2 (1).
class EnergyModel {
 public:
  EnergyModel(EnergyKind kind, Vocab vocab, SequenceSpec spec, Eigen::VectorXd params,
              int hidden = 0);

  static Eigen::Index param_count(EnergyKind kind, const Vocab& vocab, const SequenceSpec& spec,
                                  int hidden);
  static EnergyModel zeros(EnergyKind kind, const Vocab& vocab, const SequenceSpec& spec,
                           int hidden = kDefaultHidden);
  // Uniform in [-scale, scale] from the given seed.
  static EnergyModel random_init(EnergyKind kind, const Vocab& vocab, const SequenceSpec& spec,
                                 std::uint64_t seed, int hidden = kDefaultHidden,
                                 double scale = 0.05);

  EnergyKind kind() const { return kind_; }
  const Vocab& vocab() const { return vocab_; }
  const SequenceSpec& spec() const { return spec_; }
  int hidden() const { return hidden_; }
  const Eigen::VectorXd& params() const { return params_; }

  EnergyModel with_params(Eigen::VectorXd params) const;

 private:
  EnergyKind kind_;
  Vocab vocab_;
  SequenceSpec spec_;
  int hidden_;
  Eigen::VectorXd params_;
};

double energy(const EnergyModel& model, const Sequence& seq);

// dE/dtheta, aligned with params().
Eigen::VectorXd param_grad(const EnergyModel& model, const Sequence& seq);

// Predicted E(x') - E(x) when seq[pos] is replaced by new_token. Exact for the
// linear kinds; first-order through the one-hot input for kMlp1.
double replacement_delta(const EnergyModel& model, const Sequence& seq, int pos, Token new_token);

void write_energy(std::ostream& os, const EnergyModel& model);
EnergyModel read_energy(std::istream& is);

}  // namespace resebm

#endif  // RESEBM_ENERGY_HPP_
