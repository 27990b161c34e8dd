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

// Total variation and Wasserstein distances between the law of a functional
// and a Poisson law, exactly by enumeration or by Monte Carlo sampling.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "mcstein/chenstein.hpp"
#include "mcstein/error.hpp"
#include "mcstein/model.hpp"
#include "mcstein/numeric.hpp"
#include "mcstein/parallel.hpp"
#include "mcstein/random.hpp"

namespace mcstein {

enum class DistanceMethod { exact, monte_carlo };

struct DistanceResult {
  double value = 0.0;
  double tail_error = 0.0;
  DistanceMethod method = DistanceMethod::exact;
  long long samples = 0;
  std::uint64_t seed = 0;
  double standard_error = 0.0;
};

namespace detail {

inline long long comparison_top(const DistributionTable& d, double lambda) {
  long long top = poisson_truncation_point(lambda);
  if (!d.pmf.empty()) top = std::max(top, d.max_support());
  return top;
}

inline long long comparison_bottom(const DistributionTable& d) {
  return d.pmf.empty() ? 0 : std::min<long long>(0, d.min_support());
}

}  // namespace detail

/// (1/2) sum_k |P(F = k) - P(Po(lambda) = k)| over k up to the truncation
/// point; the Poisson mass beyond it is reported as tail_error.
inline DistanceResult tv_exact(const DistributionTable& d, double lambda) {
  require_lambda(lambda);
  const long long top = detail::comparison_top(d, lambda);
  CompensatedSum s;
  for (long long k = detail::comparison_bottom(d); k <= top; ++k) {
    s.add(std::abs(d.probability(k) - poisson_pmf(lambda, k)));
  }
  DistanceResult r;
  r.value = 0.5 * s.value();
  r.tail_error = 0.5 * poisson_upper_tail(lambda, top + 1);
  return r;
}

/// sum over A* = {k : P(F = k) > P(Po(lambda) = k)} of the pmf difference.
inline double tv_maximizing_set(const DistributionTable& d, double lambda) {
  require_lambda(lambda);
  const long long top = detail::comparison_top(d, lambda);
  CompensatedSum s;
  for (long long k = detail::comparison_bottom(d); k <= top; ++k) {
    const double diff = d.probability(k) - poisson_pmf(lambda, k);
    if (diff > 0.0) s.add(diff);
  }
  return s.value();
}

/// sum_k |CDF_F(k) - CDF_Po(k)|.
inline DistanceResult w1_exact(const DistributionTable& d, double lambda) {
  require_lambda(lambda);
  const long long top = detail::comparison_top(d, lambda);
  CompensatedSum s, cdf_f, cdf_po;
  for (long long k = detail::comparison_bottom(d); k <= top; ++k) {
    cdf_f.add(d.probability(k));
    cdf_po.add(poisson_pmf(lambda, k));
    s.add(std::abs(cdf_f.value() - cdf_po.value()));
  }
  // Beyond top the law of F has no mass: the remainder is sum_{k>top} P(Po > k).
  CompensatedSum tail;
  for (long long k = top + 1;; ++k) {
    const double t = poisson_upper_tail(lambda, k + 1);
    tail.add(t);
    if (t < 1e-30) break;
  }
  DistanceResult r;
  r.value = s.value();
  r.tail_error = tail.value();
  return r;
}

/// TV distance to Po(lambda) for an arbitrary finite law given by its atoms;
/// mass on points outside N_0 counts in full.
inline DistanceResult tv_exact_atoms(const std::map<double, double>& law, double lambda) {
  require_lambda(lambda);
  DistributionTable lattice;
  CompensatedSum off_lattice;
  for (const auto& [x, w] : law) {
    long long k = 0;
    if (near_integer(x, kIntegralityTolerance, &k) && k >= 0) {
      lattice.pmf[k] += w;
    } else {
      off_lattice.add(w);
    }
  }
  const long long top = detail::comparison_top(lattice, lambda);
  CompensatedSum s;
  s.add(off_lattice);
  for (long long k = 0; k <= top; ++k) s.add(std::abs(lattice.probability(k) - poisson_pmf(lambda, k)));
  DistanceResult r;
  r.value = 0.5 * s.value();
  r.tail_error = 0.5 * poisson_upper_tail(lambda, top + 1);
  return r;
}

/// Law of a sum of independent Bernoulli(p_k) variables.
inline DistributionTable poisson_binomial_pmf(const std::vector<double>& p) {
  std::vector<double> pmf{1.0};
  for (double pk : p) {
    if (!(pk > 0.0 && pk < 1.0)) {
      fail(ErrorCode::out_of_range_probability, "p_k = " + std::to_string(pk) + " is not inside (0,1)");
    }
    std::vector<double> next(pmf.size() + 1, 0.0);
    for (std::size_t j = 0; j < pmf.size(); ++j) {
      next[j] += pmf[j] * (1.0 - pk);
      next[j + 1] += pmf[j] * pk;
    }
    pmf = std::move(next);
  }
  DistributionTable d;
  for (std::size_t j = 0; j < pmf.size(); ++j) d.pmf[static_cast<long long>(j)] = pmf[j];
  return d;
}

inline constexpr long long kMinMonteCarloSamples = 10000;

/// The outcome drawn as sample `index`: coordinate k is +1 when the uniform
/// keyed by (seed, index, k) falls below p_k.
inline Outcome sample_outcome(const ProbabilityModel& model, std::uint64_t seed, std::uint64_t index) {
  std::vector<int> signs(static_cast<std::size_t>(model.size()));
  for (int k = 1; k <= model.size(); ++k) {
    const double u = to_unit_interval(counter_hash(seed, index, static_cast<std::uint64_t>(k)));
    signs[static_cast<std::size_t>(k - 1)] = u < model.p(k) ? 1 : -1;
  }
  return Outcome(std::move(signs));
}

/// Empirical TV distance from `samples` independent draws. The standard error
/// is that of the empirical mass of the maximizing set.
inline DistanceResult tv_monte_carlo(const ProbabilityModel& model,
                                     const std::function<double(const Outcome&)>& functional,
                                     double lambda, long long samples, std::uint64_t seed) {
  require_lambda(lambda);
  if (samples < kMinMonteCarloSamples) {
    fail(ErrorCode::too_few_samples, "Monte Carlo needs at least " +
                                         std::to_string(kMinMonteCarloSamples) + " samples");
  }
  const std::size_t count = static_cast<std::size_t>(samples);
  std::vector<std::map<long long, long long>> partial((count + kChunkSize - 1) / kChunkSize);
  for_each_chunk(count, [&](std::size_t c, std::size_t b, std::size_t e) {
    auto& counts = partial[c];
    for (std::size_t i = b; i < e; ++i) {
      const Outcome omega = sample_outcome(model, seed, i);
      const double v = functional(omega);
      long long k = 0;
      if (!near_integer(v, kIntegralityTolerance, &k)) {
        fail(ErrorCode::non_integer_value,
             "F" + omega.to_string() + " = " + std::to_string(v) + " is not an integer");
      }
      ++counts[k];
    }
  });
  std::map<long long, long long> counts;
  for (const auto& part : partial) {
    for (const auto& [k, n] : part) counts[k] += n;
  }
  const double n = static_cast<double>(samples);
  CompensatedSum l1, po_seen, mass_star;
  for (const auto& [k, c] : counts) {
    const double emp = static_cast<double>(c) / n;
    const double po = poisson_pmf(lambda, k);
    l1.add(std::abs(emp - po));
    po_seen.add(po);
    if (emp > po) mass_star.add(emp);
  }
  l1.add(std::max(0.0, 1.0 - po_seen.value()));
  DistanceResult r;
  r.value = 0.5 * l1.value();
  r.method = DistanceMethod::monte_carlo;
  r.samples = samples;
  r.seed = seed;
  const double ps = mass_star.value();
  r.standard_error = std::sqrt(std::max(0.0, ps * (1.0 - ps)) / n);
  return r;
}

}  // namespace mcstein
