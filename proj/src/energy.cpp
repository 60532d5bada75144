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

#include "resebm/energy.hpp"

#include <cmath>
#include <istream>
#include <ostream>

#include "format_util.hpp"
#include "resebm/errors.hpp"
#include "resebm/numeric.hpp"

namespace resebm {

namespace {

using RowMajorMap =
    Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>;

struct MlpView {
  RowMajorMap w;
  Eigen::Map<const Eigen::VectorXd> b1;
  Eigen::Map<const Eigen::VectorXd> w2;
  double b2;
};

MlpView mlp_view(const EnergyModel& m) {
  const int h = m.hidden();
  const Eigen::Index in = static_cast<Eigen::Index>(m.spec().suffix_len()) * m.vocab().size();
  const double* p = m.params().data();
  return MlpView{RowMajorMap(p, h, in), Eigen::Map<const Eigen::VectorXd>(p + h * in, h),
                 Eigen::Map<const Eigen::VectorXd>(p + h * in + h, h), p[h * in + 2 * h]};
}

// One-hot column of scored position i (0-based within the suffix) holding token t.
Eigen::Index onehot_col(const EnergyModel& m, int i, Token t) {
  return static_cast<Eigen::Index>(i) * m.vocab().size() + t;
}

Eigen::VectorXd mlp_preactivation(const EnergyModel& m, const MlpView& v, const Sequence& seq) {
  Eigen::VectorXd z = v.b1;
  const int p = m.spec().prefix_len();
  for (int i = 0; i < m.spec().suffix_len(); ++i)
    z += v.w.col(onehot_col(m, i, seq[static_cast<std::size_t>(p + i)]));
  return z;
}

void check_input(const EnergyModel& m, const Sequence& seq) {
  check_sequence(seq, m.spec(), m.vocab());
}

}  // namespace

std::string_view to_string(EnergyKind kind) {
  switch (kind) {
    case EnergyKind::kLinearBag:
      return "linear-bag";
    case EnergyKind::kPositionTable:
      return "position-table";
    case EnergyKind::kMlp1:
      return "mlp1";
  }
  return "unknown";
}

EnergyKind parse_energy_kind(std::string_view name) {
  if (name == "linear-bag") return EnergyKind::kLinearBag;
  if (name == "position-table") return EnergyKind::kPositionTable;
  if (name == "mlp1") return EnergyKind::kMlp1;
  throw ValidationError("unknown energy kind '" + std::string(name) + "'");
}

Eigen::Index EnergyModel::param_count(EnergyKind kind, const Vocab& vocab,
                                      const SequenceSpec& spec, int hidden) {
  const Eigen::Index v = vocab.size();
  const Eigen::Index l = spec.suffix_len();
  switch (kind) {
    case EnergyKind::kLinearBag:
      return v;
    case EnergyKind::kPositionTable:
      return l * v;
    case EnergyKind::kMlp1:
      require(hidden >= 1, "mlp1 needs a positive hidden width");
      return l * v * hidden + 2 * hidden + 1;
  }
  throw ValidationError("unknown energy kind");
}

EnergyModel::EnergyModel(EnergyKind kind, Vocab vocab, SequenceSpec spec, Eigen::VectorXd params,
                         int hidden)
    : kind_(kind),
      vocab_(vocab),
      spec_(spec),
      hidden_(kind == EnergyKind::kMlp1 ? hidden : 0),
      params_(std::move(params)) {
  require(params_.size() == param_count(kind_, vocab_, spec_, hidden_),
          "energy parameter count does not match kind " + std::string(to_string(kind_)));
  require(params_.allFinite(), "energy parameters must be finite");
}

EnergyModel EnergyModel::zeros(EnergyKind kind, const Vocab& vocab, const SequenceSpec& spec,
                               int hidden) {
  const int h = kind == EnergyKind::kMlp1 ? hidden : 0;
  return EnergyModel(kind, vocab, spec, Eigen::VectorXd::Zero(param_count(kind, vocab, spec, h)), h);
}

EnergyModel EnergyModel::random_init(EnergyKind kind, const Vocab& vocab, const SequenceSpec& spec,
                                     std::uint64_t seed, int hidden, double scale) {
  const int h = kind == EnergyKind::kMlp1 ? hidden : 0;
  Eigen::VectorXd params(param_count(kind, vocab, spec, h));
  Rng rng(seed);
  for (Eigen::Index i = 0; i < params.size(); ++i) params[i] = scale * (2.0 * rng.uniform() - 1.0);
  return EnergyModel(kind, vocab, spec, std::move(params), h);
}

EnergyModel EnergyModel::with_params(Eigen::VectorXd params) const {
  return EnergyModel(kind_, vocab_, spec_, std::move(params), hidden_);
}

double energy(const EnergyModel& model, const Sequence& seq) {
  check_input(model, seq);
  const int p = model.spec().prefix_len();
  const int l = model.spec().suffix_len();
  const auto& u = model.params();
  switch (model.kind()) {
    case EnergyKind::kLinearBag: {
      double s = 0.0;
      for (int i = 0; i < l; ++i) s += u[seq[static_cast<std::size_t>(p + i)]];
      return -s;
    }
    case EnergyKind::kPositionTable: {
      double s = 0.0;
      for (int i = 0; i < l; ++i) s += u[onehot_col(model, i, seq[static_cast<std::size_t>(p + i)])];
      return -s;
    }
    case EnergyKind::kMlp1: {
      const auto v = mlp_view(model);
      const Eigen::VectorXd a = mlp_preactivation(model, v, seq).array().tanh().matrix();
      return -(v.w2.dot(a) + v.b2);
    }
  }
  throw ValidationError("unknown energy kind");
}

Eigen::VectorXd param_grad(const EnergyModel& model, const Sequence& seq) {
  check_input(model, seq);
  const int p = model.spec().prefix_len();
  const int l = model.spec().suffix_len();
  Eigen::VectorXd g = Eigen::VectorXd::Zero(model.params().size());
  switch (model.kind()) {
    case EnergyKind::kLinearBag:
      for (int i = 0; i < l; ++i) g[seq[static_cast<std::size_t>(p + i)]] -= 1.0;
      return g;
    case EnergyKind::kPositionTable:
      for (int i = 0; i < l; ++i) g[onehot_col(model, i, seq[static_cast<std::size_t>(p + i)])] = -1.0;
      return g;
    case EnergyKind::kMlp1: {
      const auto v = mlp_view(model);
      const int h = model.hidden();
      const Eigen::Index in = v.w.cols();
      const Eigen::VectorXd a = mlp_preactivation(model, v, seq).array().tanh().matrix();
      // dE/dz for the hidden pre-activations
      const Eigen::VectorXd dz = -(v.w2.array() * (1.0 - a.array().square())).matrix();
      for (int i = 0; i < l; ++i) {
        const Eigen::Index col = onehot_col(model, i, seq[static_cast<std::size_t>(p + i)]);
        for (int r = 0; r < h; ++r) g[r * in + col] += dz[r];
      }
      g.segment(h * in, h) = dz;
      g.segment(h * in + h, h) = -a;
      g[h * in + 2 * h] = -1.0;
      return g;
    }
  }
  throw ValidationError("unknown energy kind");
}

double replacement_delta(const EnergyModel& model, const Sequence& seq, int pos, Token new_token) {
  check_input(model, seq);
  const int p = model.spec().prefix_len();
  require(pos >= p && pos < model.spec().total_len(), "replacement position outside scored range");
  require(model.vocab().contains(new_token), "replacement token out of range");
  const Token old_token = seq[static_cast<std::size_t>(pos)];
  if (old_token == new_token) return 0.0;
  const auto& u = model.params();
  const int i = pos - p;
  switch (model.kind()) {
    case EnergyKind::kLinearBag:
      return u[old_token] - u[new_token];
    case EnergyKind::kPositionTable:
      return u[onehot_col(model, i, old_token)] - u[onehot_col(model, i, new_token)];
    case EnergyKind::kMlp1: {
      const auto v = mlp_view(model);
      const Eigen::VectorXd a = mlp_preactivation(model, v, seq).array().tanh().matrix();
      const Eigen::VectorXd dz = -(v.w2.array() * (1.0 - a.array().square())).matrix();
      // Gradient wrt the one-hot input dotted with (e_new - e_old).
      return dz.dot(v.w.col(onehot_col(model, i, new_token)) - v.w.col(onehot_col(model, i, old_token)));
    }
  }
  throw ValidationError("unknown energy kind");
}

void write_energy(std::ostream& os, const EnergyModel& model) {
  os << "#energy kind=" << to_string(model.kind()) << " V=" << model.vocab().size()
     << " p=" << model.spec().prefix_len() << " T=" << model.spec().total_len();
  if (model.kind() == EnergyKind::kMlp1) os << " H=" << model.hidden();
  os << '\n';
  for (Eigen::Index i = 0; i < model.params().size(); ++i) os << format_real(model.params()[i]) << '\n';
}

EnergyModel read_energy(std::istream& is) {
  const auto fields = detail::parse_header(detail::read_line(is, "energy header"), "energy");
  try {
    const auto kind = parse_energy_kind(detail::header_field(fields, "kind"));
    Vocab vocab(static_cast<int>(detail::parse_int(detail::header_field(fields, "V"))));
    SequenceSpec spec(static_cast<int>(detail::parse_int(detail::header_field(fields, "p"))),
                      static_cast<int>(detail::parse_int(detail::header_field(fields, "T"))));
    int hidden = 0;
    if (kind == EnergyKind::kMlp1)
      hidden = static_cast<int>(detail::parse_int(detail::header_field(fields, "H")));
    Eigen::VectorXd params(EnergyModel::param_count(kind, vocab, spec, hidden));
    for (Eigen::Index i = 0; i < params.size(); ++i)
      params[i] = detail::parse_real(detail::read_line(is, "energy parameter"));
    return EnergyModel(kind, vocab, spec, std::move(params), hidden);
  } catch (const ValidationError& e) {
    throw IoError(std::string("invalid energy file: ") + e.what());
  }
}

}  // namespace resebm
