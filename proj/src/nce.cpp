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

#include "resebm/nce.hpp"

#include <cmath>
#include <functional>
#include <map>
#include <ostream>

#include "resebm/errors.hpp"
#include "resebm/numeric.hpp"

namespace resebm {

namespace {

void check_batch(std::span<const Sequence> positives, std::span<const Sequence> negatives) {
  require(!positives.empty(), "NCE batch is empty");
  require(positives.size() == negatives.size(), "NCE needs equal numbers of positives and negatives");
}

using PositiveDraw = std::function<Sequence(Rng&)>;

double prefix_log_prob(const DataDistribution& data, const Sequence& seq, int p) {
  double lp = 0.0;
  for (int i = 0; i < p; ++i) {
    const auto pos = static_cast<std::size_t>(i);
    lp += std::log(data.next_dist(seq, pos)[seq[pos]]);
  }
  return lp;
}

// Calls f(prefix, weight) for every prefix with its probability under `data`.
template <typename F>
void for_each_weighted_prefix(const DataDistribution& data, int p, F&& f) {
  for_each_completion(Sequence{}, data.vocab().size(), p, [&](const Sequence& prefix) {
    f(prefix, std::exp(prefix_log_prob(data, prefix, p)));
  });
}

bool fits_budget(const EnergyModel& m, std::int64_t budget) {
  return capped_pow(m.vocab().size(), m.spec().total_len(), budget) > 0;
}

TrainResult train_impl(const EnergyModel& init, const BaseLM& lm, const PositiveDraw& draw,
                       const NCEConfig& config,
                       const std::function<void(const JointModel&, TraceRecord&)>& diagnose) {
  config.validate();
  require(lm.vocab() == init.vocab(), "base LM and energy disagree on the vocabulary");
  require(lm.has_full_support(),
          "NCE needs a base LM with full support (use smoothing > 0 or strictly positive rows)");
  const auto& spec = init.spec();
  const auto p = static_cast<std::size_t>(spec.prefix_len());
  const auto batch = static_cast<std::size_t>(config.batch_pairs);

  Eigen::VectorXd theta = init.params();
  TrainTrace trace;
  const Rng root(config.seed);
  std::vector<Sequence> positives(batch);
  std::vector<Sequence> negatives(batch);

  for (int step = 1; step <= config.steps; ++step) {
    const EnergyModel current = init.with_params(theta);
    const Rng step_rng = root.split(static_cast<std::uint64_t>(step));
    for (std::size_t j = 0; j < batch; ++j) {
      Rng pos_rng = step_rng.split(2 * j);
      Rng neg_rng = step_rng.split(2 * j + 1);
      positives[j] = draw(pos_rng);
      negatives[j] = sample_suffix(lm, std::span<const Token>(positives[j].data(), p), spec,
                                   std::nullopt, neg_rng);
    }
    const double objective = nce_objective(current, positives, negatives);
    theta += config.learning_rate * nce_param_grad(current, positives, negatives);

    if (step % config.eval_every == 0 || step == config.steps) {
      TraceRecord rec;
      rec.step = step;
      rec.objective = objective;
      if (fits_budget(init, config.enumeration_budget))
        diagnose(JointModel(lm, init.with_params(theta)), rec);
      trace.records.push_back(rec);
    }
  }
  return TrainResult{init.with_params(std::move(theta)), std::move(trace)};
}

}  // namespace

double nce_objective(const EnergyModel& model, std::span<const Sequence> positives,
                     std::span<const Sequence> negatives) {
  check_batch(positives, negatives);
  double total = 0.0;
  for (std::size_t i = 0; i < positives.size(); ++i) {
    total += log_sigmoid(-energy(model, positives[i]));
    total += log_sigmoid(energy(model, negatives[i]));
  }
  return total / static_cast<double>(positives.size());
}

Eigen::VectorXd nce_param_grad(const EnergyModel& model, std::span<const Sequence> positives,
                               std::span<const Sequence> negatives) {
  check_batch(positives, negatives);
  Eigen::VectorXd g = Eigen::VectorXd::Zero(model.params().size());
  for (std::size_t i = 0; i < positives.size(); ++i) {
    const double e_pos = energy(model, positives[i]);
    const double e_neg = energy(model, negatives[i]);
    g -= sigmoid(e_pos) * param_grad(model, positives[i]);
    g += sigmoid(-e_neg) * param_grad(model, negatives[i]);
  }
  return g / static_cast<double>(positives.size());
}

void NCEConfig::validate() const {
  require(steps >= 1, "NCE steps must be at least 1");
  require(batch_pairs >= 1, "NCE batch_pairs must be at least 1");
  require(learning_rate > 0.0 && std::isfinite(learning_rate), "NCE learning rate must be positive");
  require(eval_every >= 1, "NCE eval_every must be at least 1");
  require(enumeration_budget >= 1, "enumeration budget must be positive");
}

double exact_kl_data_to_joint(const DataDistribution& data, const JointModel& joint,
                              std::int64_t budget) {
  const auto& spec = joint.spec();
  require(data.vocab() == joint.vocab(), "data and joint disagree on the vocabulary");
  require(capped_pow(joint.vocab().size(), spec.total_len(), budget) > 0,
          "KL enumeration exceeds budget");
  double kl = 0.0;
  for_each_weighted_prefix(data, spec.prefix_len(), [&](const Sequence& prefix, double w) {
    if (w <= 0.0) return;
    const auto joint_enum = enumerate_joint(joint, prefix, budget);
    double part = 0.0;
    for (std::size_t i = 0; i < joint_enum.sequences.size(); ++i) {
      const double lp_data = exact_data_log_prob(data, joint_enum.sequences[i], spec);
      if (!std::isfinite(lp_data)) continue;
      part += std::exp(lp_data) * (lp_data - joint_enum.log_prob[static_cast<Eigen::Index>(i)]);
    }
    kl += w * part;
  });
  return kl;
}

double exact_mean_log_partition(const DataDistribution& data, const JointModel& joint,
                                std::int64_t budget) {
  double total = 0.0;
  for_each_weighted_prefix(data, joint.spec().prefix_len(), [&](const Sequence& prefix, double w) {
    if (w > 0.0) total += w * exact_log_partition(joint, prefix, budget);
  });
  return total;
}

TrainResult train(const EnergyModel& init, const BaseLM& lm, const DataDistribution& data,
                  const NCEConfig& config) {
  require(data.vocab() == init.vocab(), "data and energy disagree on the vocabulary");
  const auto spec = init.spec();
  return train_impl(
      init, lm, [&](Rng& rng) { return sample_sequence(data, spec, rng); }, config,
      [&](const JointModel& joint, TraceRecord& rec) {
        rec.log_z = exact_mean_log_partition(data, joint, config.enumeration_budget);
        rec.kl = exact_kl_data_to_joint(data, joint, config.enumeration_budget);
      });
}

TrainResult train(const EnergyModel& init, const BaseLM& lm, const Corpus& data,
                  const NCEConfig& config) {
  require(!data.sequences.empty(), "cannot train on an empty corpus");
  require(data.spec == init.spec() && data.vocab == init.vocab(),
          "corpus does not match the energy model's spec");
  const auto p = static_cast<std::ptrdiff_t>(data.spec.prefix_len());
  const int count = static_cast<int>(data.sequences.size());
  return train_impl(
      init, lm, [&](Rng& rng) { return data.sequences[static_cast<std::size_t>(rng.uniform_int(count))]; },
      config, [&](const JointModel& joint, TraceRecord& rec) {
        std::map<Sequence, double> log_z;
        double total = 0.0;
        for (const auto& seq : data.sequences) {
          Sequence prefix(seq.begin(), seq.begin() + p);
          auto it = log_z.find(prefix);
          if (it == log_z.end())
            it = log_z.emplace(prefix, exact_log_partition(joint, prefix, config.enumeration_budget)).first;
          total += it->second;
        }
        rec.log_z = total / count;
      });
}

void write_trace_csv(std::ostream& os, const TrainTrace& trace) {
  os << "step,objective,logZ,kl\n";
  for (const auto& r : trace.records) {
    os << r.step << ',' << format_real(r.objective) << ',';
    if (r.log_z) os << format_real(*r.log_z);
    os << ',';
    if (r.kl) os << format_real(*r.kl);
    os << '\n';
  }
}

}  // namespace resebm
