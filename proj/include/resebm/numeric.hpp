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

#ifndef RESEBM_NUMERIC_HPP_
#define RESEBM_NUMERIC_HPP_

#include <cmath>
#include <cstdint>
#include <limits>
#include <string>

#include <Eigen/Core>

namespace resebm {

inline constexpr double kNegInf = -std::numeric_limits<double>::infinity();

// Elementwise std::exp. Eigen's packet exp clamps very negative inputs, which
// would turn exp(-inf) into a tiny positive number instead of 0.
template <typename Derived>
auto exp_exact(const Eigen::ArrayBase<Derived>& x) {
  return x.unaryExpr([](double v) { return std::exp(v); });
}

// Max-shifted log(sum(exp(x))). Empty or all -inf input gives -inf.
template <typename Derived>
double log_sum_exp(const Eigen::DenseBase<Derived>& x) {
  if (x.size() == 0) return kNegInf;
  const double m = x.maxCoeff();
  if (!std::isfinite(m)) return m;
  return m + std::log(exp_exact(x.derived().array() - m).sum());
}

// log(mean(exp(x)))
template <typename Derived>
double log_mean_exp(const Eigen::DenseBase<Derived>& x) {
  return log_sum_exp(x) - std::log(static_cast<double>(x.size()));
}

// Normalized exp(x), max-shifted.
template <typename Derived>
Eigen::VectorXd softmax(const Eigen::DenseBase<Derived>& x) {
  const double m = x.maxCoeff();
  Eigen::VectorXd w = exp_exact(x.derived().array() - m).matrix();
  return w / w.sum();
}

// log(1 + exp(z)) without overflow.
inline double softplus(double z) {
  return z > 0.0 ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z));
}

inline double log_sigmoid(double z) { return -softplus(-z); }

inline double sigmoid(double z) {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

// Shortest round-trippable decimal form with 17 significant digits.
std::string format_real(double x);

// base^exp, or -1 if the result exceeds cap.
std::int64_t capped_pow(std::int64_t base, int exp, std::int64_t cap);

}  // namespace resebm

#endif  // RESEBM_NUMERIC_HPP_
