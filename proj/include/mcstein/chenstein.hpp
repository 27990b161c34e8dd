// Copyright 2026 The mcstein Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Poisson law utilities and the Chen-Stein equation
//   lambda f(k+1) - k f(k) = 1_A(k) - P(Po(lambda) in A),   f(0) = 0.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <boost/math/distributions/poisson.hpp>
#include <boost/math/special_functions/gamma.hpp>

#include "mcstein/error.hpp"
#include "mcstein/numeric.hpp"

namespace mcstein {

inline void require_lambda(double lambda) {
  if (!(lambda > 0.0) || !std::isfinite(lambda)) {
    fail(ErrorCode::invalid_lambda, "lambda must be a positive finite number");
  }
}

inline double poisson_log_pmf(double lambda, long long k) {
  require_lambda(lambda);
  if (k < 0) return -std::numeric_limits<double>::infinity();
  const double kd = static_cast<double>(k);
  return -lambda + kd * std::log(lambda) - std::lgamma(kd + 1.0);
}

inline double poisson_pmf(double lambda, long long k) {
  require_lambda(lambda);
  if (k < 0) return 0.0;
  return boost::math::pdf(boost::math::poisson_distribution<double>(lambda), static_cast<double>(k));
}

/// P(Po(lambda) <= k).
inline double poisson_cdf(double lambda, long long k) {
  require_lambda(lambda);
  if (k < 0) return 0.0;
  return boost::math::gamma_q(static_cast<double>(k) + 1.0, lambda);
}

/// P(Po(lambda) >= k).
inline double poisson_upper_tail(double lambda, long long k) {
  require_lambda(lambda);
  if (k <= 0) return 1.0;
  return boost::math::gamma_p(static_cast<double>(k), lambda);
}

/// A subset of N_0: a finite set of members, optionally together with every
/// integer >= tail_start.
struct TargetSet {
  std::set<long long> members;
  std::optional<long long> tail_start;

  static TargetSet finite(std::set<long long> m) { return {std::move(m), std::nullopt}; }
  static TargetSet everything() { return {{}, 0}; }
  static TargetSet at_least(long long k) { return {{}, k}; }

  bool contains(long long k) const {
    if (k < 0) return false;
    if (tail_start && k >= *tail_start) return true;
    return members.count(k) > 0;
  }

  bool cofinite() const noexcept { return tail_start.has_value(); }

  /// Largest integer after which membership no longer changes.
  long long boundary() const {
    long long b = members.empty() ? 0 : *members.rbegin() + 1;
    if (tail_start) b = std::max(b, *tail_start);
    return b;
  }

  std::string to_string() const {
    std::string s = "{";
    bool first = true;
    for (long long m : members) {
      if (tail_start && m >= *tail_start) break;
      s += (first ? "" : ",") + std::to_string(m);
      first = false;
    }
    if (tail_start) s += std::string(first ? "" : ",") + std::to_string(*tail_start) + "..";
    return s + "}";
  }
};

/// P(Po(lambda) in A) and P(Po(lambda) not in A), each computed from the
/// finite side so neither loses precision to cancellation.
struct SetProbability {
  double inside;
  double outside;
};

inline SetProbability poisson_set_probability(double lambda, const TargetSet& a) {
  require_lambda(lambda);
  // Below the boundary both sides are finite sums; above it the whole tail
  // belongs to one side.
  const long long top = std::max<long long>(a.boundary(), 0);
  CompensatedSum in, out;
  for (long long k = 0; k < top; ++k) (a.contains(k) ? in : out).add(poisson_pmf(lambda, k));
  (a.cofinite() ? in : out).add(poisson_upper_tail(lambda, top));
  return {in.value(), out.value()};
}

inline double poisson_set_prob(double lambda, const TargetSet& a) {
  return poisson_set_probability(lambda, a).inside;
}

/// Stein factors: bounds on sup|f|, sup|Delta f| and sup|Delta^2 f| that hold
/// uniformly in A, plus the alternative 2/lambda for the last one.
struct SteinFactors {
  double sup_bound;
  double diff_bound;
  double second_diff_bound;
  double second_diff_alternative;
};

inline SteinFactors stein_factors(double lambda) {
  require_lambda(lambda);
  const double kappa = -std::expm1(-lambda) / lambda;
  return {std::min(1.0, std::sqrt(2.0 / (std::exp(1.0) * lambda))), kappa, 2.0 * kappa,
          2.0 / lambda};
}

class SteinSolution {
 public:
  SteinSolution(double lambda, TargetSet a, double set_probability, std::vector<double> values)
      : lambda_(lambda), set_(std::move(a)), prob_(set_probability), values_(std::move(values)) {}

  double lambda() const noexcept { return lambda_; }
  const TargetSet& target_set() const noexcept { return set_; }
  double set_probability() const noexcept { return prob_; }
  int k_max() const noexcept { return static_cast<int>(values_.size()) - 1; }
  const std::vector<double>& values() const noexcept { return values_; }
  double operator()(int k) const { return values_.at(static_cast<std::size_t>(k)); }

  /// |lambda f(k+1) - k f(k) - (1_A(k) - P(A))| for 0 <= k < k_max.
  double residual(int k) const {
    if (k < 0 || k >= k_max()) fail(ErrorCode::index_out_of_range, "residual index");
    const double h = (set_.contains(k) ? 1.0 : 0.0) - prob_;
    return std::abs(lambda_ * values_[static_cast<std::size_t>(k) + 1] -
                    k * values_[static_cast<std::size_t>(k)] - h);
  }

  double max_residual() const {
    double r = 0.0;
    for (int k = 0; k < k_max(); ++k) r = std::max(r, residual(k));
    return r;
  }

 private:
  double lambda_;
  TargetSet set_;
  double prob_;
  std::vector<double> values_;
};

/// Tabulates the bounded solution on 0..k_max. Below floor(lambda)+1 the
/// forward recurrence is used; above it the recurrence is run backwards from
/// a tail series for f(k_max), since each direction damps rounding error only
/// on its own side of lambda.
inline SteinSolution solve(double lambda, const TargetSet& a, int k_max) {
  require_lambda(lambda);
  if (k_max < 1) fail(ErrorCode::range_too_short, "k_max must be at least 1");
  const SetProbability pa = poisson_set_probability(lambda, a);
  // 1_A(k) - P(A), with each branch taken from the accurate side.
  auto h = [&](long long k) { return a.contains(k) ? pa.outside : -pa.inside; };

  std::vector<double> f(static_cast<std::size_t>(k_max) + 1, 0.0);
  const long long split = std::min<long long>(k_max, static_cast<long long>(std::floor(lambda)) + 1);
  for (long long k = 0; k < split; ++k) {
    f[static_cast<std::size_t>(k) + 1] = (static_cast<double>(k) * f[static_cast<std::size_t>(k)] + h(k)) / lambda;
  }
  if (split < k_max) {
    // f(K) = -sum_{j>=K} h(j) (K-1)! lambda^{j-K} / j!
    const long long big_k = k_max;
    double weight = 1.0 / static_cast<double>(big_k);
    CompensatedSum tail;
    for (long long j = big_k;; ++j) {
      tail.add(-h(j) * weight);
      if (j >= a.boundary() && weight < 1e-18 * std::max(1e-300, std::abs(tail.value()))) break;
      if (weight == 0.0) break;
      weight *= lambda / static_cast<double>(j + 1);
    }
    f[static_cast<std::size_t>(big_k)] = tail.value();
    for (long long k = big_k - 1; k > split; --k) {
      f[static_cast<std::size_t>(k)] =
          (lambda * f[static_cast<std::size_t>(k) + 1] - h(k)) / static_cast<double>(k);
    }
  }
  return SteinSolution(lambda, a, pa.inside, std::move(f));
}

/// Delta f(k) = f(k+1) - f(k) for 0 <= k < k_max.
inline std::vector<double> forward_diff(const SteinSolution& s) {
  if (s.k_max() < 2) fail(ErrorCode::range_too_short, "forward difference needs k_max >= 2");
  std::vector<double> d(static_cast<std::size_t>(s.k_max()));
  for (std::size_t k = 0; k < d.size(); ++k) d[k] = s.values()[k + 1] - s.values()[k];
  return d;
}

/// Delta^2 f(k) for 0 <= k < k_max - 1.
inline std::vector<double> second_forward_diff(const SteinSolution& s) {
  if (s.k_max() < 3) fail(ErrorCode::range_too_short, "second difference needs k_max >= 3");
  const std::vector<double> d = forward_diff(s);
  std::vector<double> d2(d.size() - 1);
  for (std::size_t k = 0; k < d2.size(); ++k) d2[k] = d[k + 1] - d[k];
  return d2;
}

/// Smallest K with P(Po(lambda) > K) < tolerance.
inline long long poisson_truncation_point(double lambda, double tolerance = 1e-14) {
  require_lambda(lambda);
  long long k = static_cast<long long>(std::floor(lambda));
  while (poisson_upper_tail(lambda, k + 1) >= tolerance) ++k;
  return k;
}

/// Default tabulation range: at least max(support_max, 10 lambda) and past
/// the 1e-14 Poisson tail.
inline int default_k_max(double lambda, long long support_max = 0) {
  const long long floor_k = std::max<long long>(
      {support_max, static_cast<long long>(std::ceil(10.0 * lambda)), 2});
  return static_cast<int>(std::max(floor_k, poisson_truncation_point(lambda)));
}

}  // namespace mcstein
