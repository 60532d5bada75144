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

#include <doctest.h>

#include <cmath>
#include <sstream>

#include "fixtures.hpp"
#include "resebm/energy.hpp"
#include "resebm/errors.hpp"

using namespace resebm;
using namespace resebm::testing;

namespace {

const EnergyKind kAllKinds[] = {EnergyKind::kLinearBag, EnergyKind::kPositionTable, EnergyKind::kMlp1};

}  // namespace

TEST_CASE("parameter counts per kind") {
  const Vocab v(3);
  const SequenceSpec spec(1, 5);
  CHECK(EnergyModel::param_count(EnergyKind::kLinearBag, v, spec, 0) == 3);
  CHECK(EnergyModel::param_count(EnergyKind::kPositionTable, v, spec, 0) == 12);
  CHECK(EnergyModel::param_count(EnergyKind::kMlp1, v, spec, 5) == 12 * 5 + 5 + 5 + 1);
  CHECK(EnergyModel::zeros(EnergyKind::kMlp1, v, spec).params().size() == 12 * kDefaultHidden + 2 * kDefaultHidden + 1);
  CHECK_THROWS_AS(EnergyModel(EnergyKind::kLinearBag, v, spec, Eigen::VectorXd::Zero(4)), ValidationError);
  CHECK_THROWS_AS(EnergyModel::zeros(EnergyKind::kMlp1, v, spec, 0), ValidationError);
  Eigen::VectorXd nan = Eigen::VectorXd::Zero(3);
  nan[1] = std::nan("");
  CHECK_THROWS_AS(EnergyModel(EnergyKind::kLinearBag, v, spec, nan), ValidationError);
}

TEST_CASE("kind names round-trip") {
  for (auto k : kAllKinds) CHECK(parse_energy_kind(to_string(k)) == k);
  CHECK(to_string(EnergyKind::kLinearBag) == "linear-bag");
  CHECK_THROWS_AS(parse_energy_kind("transformer"), ValidationError);
}

TEST_CASE("random_init is deterministic and bounded") {
  const Vocab v(4);
  const SequenceSpec spec(0, 3);
  const auto a = EnergyModel::random_init(EnergyKind::kMlp1, v, spec, 5);
  const auto b = EnergyModel::random_init(EnergyKind::kMlp1, v, spec, 5);
  CHECK(a.params() == b.params());
  CHECK(a.params().cwiseAbs().maxCoeff() <= 0.05);
  CHECK(a.params().cwiseAbs().maxCoeff() > 0.0);
}

TEST_CASE("zero parameters give zero energy") {
  Rng rng(1);
  for (auto k : kAllKinds) {
    const SequenceSpec spec(1, 4);
    const auto m = EnergyModel::zeros(k, Vocab(3), spec);
    for (int i = 0; i < 10; ++i) CHECK(energy(m, random_sequence(spec, 3, rng)) == 0.0);
  }
}

TEST_CASE("linear-bag energy examples") {
  const auto m = linear_bag(SequenceSpec(0, 2), {std::log(2.0), 0.0});
  CHECK(energy(m, {0, 0}) == doctest::Approx(-2 * std::log(2.0)).epsilon(1e-15));
  const auto bag = linear_bag(SequenceSpec(1, 4), {0.3, -1.2, 0.7});
  CHECK(energy(bag, {2, 0, 1, 2}) == energy(bag, {2, 1, 0, 2}));
  CHECK(energy(bag, {2, 0, 1, 2}) == doctest::Approx(energy(bag, {2, 2, 1, 0})).epsilon(1e-15));
  // prefix tokens are never read
  CHECK(energy(bag, {0, 0, 1, 2}) == energy(bag, {1, 0, 1, 2}));
}

TEST_CASE("energy rejects mismatched sequences") {
  const auto m = linear_bag(SequenceSpec(0, 2), {0.0, 0.0});
  CHECK_THROWS_AS(energy(m, {0, 0, 0}), ValidationError);
  CHECK_THROWS_AS(energy(m, {0, 2}), ValidationError);
  CHECK_THROWS_AS(param_grad(m, {0}), ValidationError);
}

TEST_CASE("param_grad examples for linear kinds") {
  const auto bag = linear_bag(SequenceSpec(0, 2), {std::log(2.0), 0.0});
  const auto g = param_grad(bag, {0, 0});
  CHECK(g[0] == -2.0);
  CHECK(g[1] == 0.0);
  const auto table = EnergyModel::zeros(EnergyKind::kPositionTable, Vocab(2), SequenceSpec(0, 2));
  const auto gt = param_grad(table, {1, 0});
  REQUIRE(gt.size() == 4);
  CHECK(gt[0] == 0.0);
  CHECK(gt[1] == -1.0);  // position 0, token 1
  CHECK(gt[2] == -1.0);  // position 1, token 0
  CHECK(gt[3] == 0.0);
}

TEST_CASE("param_grad matches central differences for every kind") {
  Rng rng(2024);
  for (auto k : kAllKinds) {
    for (int trial = 0; trial < 20; ++trial) {
      const int v = 2 + trial % 3;
      const SequenceSpec spec(trial % 2, trial % 2 + 1 + trial % 4);
      const auto m = EnergyModel::random_init(k, Vocab(v), spec, rng(), 6, 1.0);
      const auto s = random_sequence(spec, v, rng);
      const auto fd = central_differences(
          [&](const Eigen::VectorXd& theta) { return energy(m.with_params(theta), s); }, m.params());
      INFO("kind " << to_string(k) << " trial " << trial);
      CHECK(max_relative_error(param_grad(m, s), fd) <= 1e-6);
    }
  }
}

TEST_CASE("replacement_delta examples") {
  const auto bag = linear_bag(SequenceSpec(0, 2), {std::log(2.0), 0.0});
  CHECK(replacement_delta(bag, {0, 1}, 0, 0) == 0.0);
  CHECK(replacement_delta(bag, {0, 1}, 0, 1) == doctest::Approx(std::log(2.0)).epsilon(1e-15));
  const auto mlp = EnergyModel::random_init(EnergyKind::kMlp1, Vocab(3), SequenceSpec(1, 3), 4);
  CHECK(replacement_delta(mlp, {0, 2, 1}, 2, 1) == 0.0);
  CHECK_THROWS_AS(replacement_delta(bag, {0, 1}, 2, 0), ValidationError);
  const auto prefixed = linear_bag(SequenceSpec(1, 3), {0.1, 0.2});
  CHECK_THROWS_AS(replacement_delta(prefixed, {0, 1, 1}, 0, 1), ValidationError);
  CHECK_THROWS_AS(replacement_delta(prefixed, {0, 1, 1}, 1, 2), ValidationError);
}

TEST_CASE("replacement_delta is exact for linear kinds on every position and token") {
  Rng rng(77);
  for (auto k : {EnergyKind::kLinearBag, EnergyKind::kPositionTable}) {
    for (int v = 2; v <= 4; ++v) {
      for (int l = 1; l <= 4; ++l) {
        const SequenceSpec spec(1, 1 + l);
        const auto m = EnergyModel::random_init(k, Vocab(v), spec, rng(), 0, 2.0);
        const auto s = random_sequence(spec, v, rng);
        for (int pos = 1; pos <= l; ++pos) {
          for (int t = 0; t < v; ++t) {
            auto y = s;
            y[pos] = t;
            CHECK(std::abs(replacement_delta(m, s, pos, t) - (energy(m, y) - energy(m, s))) <= 1e-12);
          }
        }
      }
    }
  }
}

TEST_CASE("mlp1 replacement_delta is the first-order estimate") {
  // With tiny input weights the network is nearly linear in its input.
  const SequenceSpec spec(0, 3);
  auto m = EnergyModel::random_init(EnergyKind::kMlp1, Vocab(3), spec, 8, 4, 1.0);
  Eigen::VectorXd theta = m.params();
  theta.head(4 * 9) *= 1e-4;
  m = m.with_params(theta);
  const Sequence s{0, 1, 2};
  auto y = s;
  y[1] = 2;
  const double exact = energy(m, y) - energy(m, s);
  const double approx = replacement_delta(m, s, 1, 2);
  CHECK(std::abs(approx - exact) <= 1e-3 * std::abs(exact));
  CHECK(approx != 0.0);
}

TEST_CASE("log-ratio of order-0 chains is a linear-bag energy") {
  Rng rng(6);
  const int v = 3;
  const SequenceSpec spec(0, 3);
  Eigen::VectorXd q(v), r(v);
  for (int i = 0; i < v; ++i) {
    q[i] = 0.1 + rng.uniform();
    r[i] = 0.1 + rng.uniform();
  }
  q /= q.sum();
  r /= r.sum();
  std::vector<double> u(v);
  for (int i = 0; i < v; ++i) u[i] = std::log(q[i] / r[i]);
  const auto m = linear_bag(spec, u);
  for_each_completion({}, v, 3, [&](const Sequence& x) {
    double lq = 0.0, lr = 0.0;
    for (Token t : x) {
      lq += std::log(q[t]);
      lr += std::log(r[t]);
    }
    CHECK(std::abs(-energy(m, x) - (lq - lr)) < 1e-12);
  });
}

TEST_CASE("energy file round-trips bitwise") {
  for (auto k : kAllKinds) {
    const auto m = EnergyModel::random_init(k, Vocab(3), SequenceSpec(1, 4), 12, 5, 0.7);
    std::stringstream ss;
    write_energy(ss, m);
    const auto back = read_energy(ss);
    CHECK(back.kind() == k);
    CHECK(back.spec() == m.spec());
    CHECK(back.hidden() == m.hidden());
    CHECK(back.params() == m.params());
  }
  std::stringstream truncated("#energy kind=linear-bag V=3 p=0 T=2\n0.5\n");
  CHECK_THROWS_AS(read_energy(truncated), IoError);
  std::stringstream unknown("#energy kind=rnn V=2 p=0 T=2\n0\n0\n");
  CHECK_THROWS_AS(read_energy(unknown), IoError);
}
