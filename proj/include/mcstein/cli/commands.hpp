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

// The bound, j2-rate and bernoulli commands.

#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "mcstein/bounds.hpp"
#include "mcstein/chaos.hpp"
#include "mcstein/chenstein.hpp"
#include "mcstein/cli/experiment.hpp"
#include "mcstein/cli/format.hpp"
#include "mcstein/distance.hpp"
#include "mcstein/model.hpp"

namespace mcstein::cli {

inline constexpr int kExitValidation = 2;
inline constexpr int kExitDominationViolation = 4;

/// Largest N for which j2-rate also enumerates the exact distance.
inline constexpr int kJ2ExactLimit = 12;
/// Largest N for which j2-rate also recomputes A_1..A_7 from contractions.
inline constexpr int kJ2ModuleLimit = 30;

struct RunOptions {
  std::uint64_t seed = 1;
  std::optional<long long> mc_samples;
  // Added to every bound total before the comparison (negative control only).
  double total_offset = 0.0;
};

/// The functional of an experiment in every form the bounds need.
struct Prepared {
  ProbabilityModel model;
  ChaosExpansion expansion;
  std::optional<SampleSpace> space;
  std::optional<FunctionalTable> table;
  bool bernoulli = false;
  std::optional<int> j2_n;
  double mean = 0.0;
  double variance = 0.0;
};

inline Prepared prepare(const ExperimentSpec& spec) {
  Prepared p{ProbabilityModel(spec.p), ChaosExpansion{}, std::nullopt, std::nullopt, false, std::nullopt, 0.0, 0.0};
  const ProbabilityModel& model = p.model;
  if (const auto* c = std::get_if<ChaosFunctional>(&spec.functional)) {
    for (const auto& [n, f] : c->expansion.kernels()) require_indices_within(f, model.size());
    p.expansion = c->expansion;
  } else if (std::holds_alternative<BernoulliSum>(spec.functional)) {
    p.bernoulli = true;
    Kernel f(1);
    double mean = 0.0;
    for (int k = 1; k <= model.size(); ++k) {
      f.add({k}, model.sigma(k));
      mean += model.p(k);
    }
    p.expansion = ChaosExpansion(mean);
    p.expansion.add(f);
  } else {
    const int n = std::get<J2ExampleFunctional>(spec.functional).n;
    p.j2_n = n;
    p.expansion = ChaosExpansion::integral(j2_example_kernel(n));
  }
  p.mean = p.expansion.mean();
  p.variance = chaos_variance(p.expansion);
  if (model.size() <= kEnumerationCap) {
    p.space.emplace(model);
    p.table = p.bernoulli ? FunctionalTable::from_masks(model.size(), [](std::uint64_t m) {
                              return static_cast<double>(popcount(m));
                            })
                          : to_table(model, p.expansion);
  }
  return p;
}

inline double resolve_lambda(const LambdaPolicy& policy, const Prepared& p) {
  double lambda = policy.value;
  if (policy.kind == LambdaPolicy::Kind::mean) lambda = p.mean;
  if (policy.kind == LambdaPolicy::Kind::variance) lambda = p.variance;
  require_lambda(lambda);
  return lambda;
}

namespace detail {

struct Reference {
  std::string distance;  // "tv" or "w1"
  DistanceResult result;
  bool integer_valued = true;
};

inline Reference exact_reference(const Prepared& p, double lambda, bool wasserstein,
                                 const RunOptions& opt) {
  Reference ref;
  ref.distance = wasserstein ? "w1" : "tv";
  if (p.table) {
    ref.integer_valued = is_integer_valued(*p.table, false);
    if (ref.integer_valued) {
      const DistributionTable d = distribution(*p.space, *p.table);
      ref.result = wasserstein ? w1_exact(d, lambda) : tv_exact(d, lambda);
    } else {
      if (wasserstein) require_integer_valued(*p.table);
      ref.result = tv_exact_atoms(atoms(*p.space, *p.table), lambda);
    }
    return ref;
  }
  if (p.bernoulli) {
    std::vector<double> probs;
    for (int k = 1; k <= p.model.size(); ++k) probs.push_back(p.model.p(k));
    const DistributionTable d = poisson_binomial_pmf(probs);
    ref.result = wasserstein ? w1_exact(d, lambda) : tv_exact(d, lambda);
    return ref;
  }
  if (wasserstein) {
    fail(ErrorCode::enumeration_cap_exceeded, "the Wasserstein distance needs enumeration");
  }
  if (!opt.mc_samples) {
    fail(ErrorCode::enumeration_cap_exceeded,
         "N = " + std::to_string(p.model.size()) + " exceeds the enumeration cap; set mc_samples");
  }
  const ProbabilityModel& model = p.model;
  const ChaosExpansion& F = p.expansion;
  ref.result = tv_monte_carlo(
      model, [&](const Outcome& w) { return evaluate(model, F, w); }, lambda, *opt.mc_samples,
      opt.seed);
  return ref;
}

inline const SampleSpace& require_space(const Prepared& p, const std::string& method) {
  if (!p.space) {
    fail(ErrorCode::enumeration_cap_exceeded,
         "bound '" + method + "' enumerates the sample space; N = " +
             std::to_string(p.model.size()) + " exceeds the cap");
  }
  return *p.space;
}

/// The single kernel of an expansion with exactly one nonzero order.
inline Kernel single_kernel(const Prepared& p, const std::string& method, int min_order,
                            int exact_order) {
  const auto& ks = p.expansion.kernels();
  if (ks.size() > 1) {
    fail(ErrorCode::order_mismatch, "bound '" + method + "' needs a single chaos order");
  }
  const int order = ks.empty() ? (exact_order > 0 ? exact_order : min_order) : ks.begin()->first;
  if (exact_order > 0 && order != exact_order) {
    if (order < min_order) fail(ErrorCode::order_too_small, "bound '" + method + "' got order " + std::to_string(order));
    fail(ErrorCode::order_mismatch, "bound '" + method + "' needs order " +
                                        std::to_string(exact_order) + ", got " + std::to_string(order));
  }
  if (order < min_order) {
    fail(ErrorCode::order_too_small, "bound '" + method + "' got order " + std::to_string(order));
  }
  return ks.empty() ? Kernel(order) : ks.begin()->second;
}

inline BoundReport evaluate_bound(const std::string& method, const Prepared& p, double lambda) {
  // Kernel bounds check integer values by enumeration when possible. The
  // order-2 example is evaluated as stated; its distance column shows the
  // actual law.
  const IntegralityCheck check =
      (p.space && !p.j2_n) ? IntegralityCheck::enforce : IntegralityCheck::skip;
  if (method == "main") return main_bound(require_space(p, method), *p.table, lambda);
  if (method == "main_reduced") return main_bound_reduced(require_space(p, method), *p.table, lambda);
  if (method == "second_order") return second_order_bound(require_space(p, method), *p.table, lambda);
  if (method == "wasserstein") return wasserstein_bound(require_space(p, method), *p.table, lambda);
  if (method == "j1") return j1_bound(p.model, single_kernel(p, method, 1, 1), p.mean, lambda, check);
  if (method == "jm") return jm_bound(p.model, single_kernel(p, method, 2, 0), p.mean, lambda, check);
  if (method == "j2") return j2_bound(p.model, single_kernel(p, method, 2, 2), p.mean, lambda, check);
  if (method == "bernoulli") {
    if (!p.bernoulli) fail(ErrorCode::invalid_argument, "bound 'bernoulli' needs the bernoulli_sum functional");
    std::vector<double> probs;
    for (int k = 1; k <= p.model.size(); ++k) probs.push_back(p.model.p(k));
    return bernoulli_bound(probs, lambda);
  }
  if (method == "j2_example") {
    if (!p.j2_n) fail(ErrorCode::invalid_argument, "bound 'j2_example' needs the j2_example functional");
    const J2Example e = j2_example_closed(*p.j2_n);
    BoundReport r;
    r.method = "j2_example";
    r.lambda = e.lambda;
    r.mean_shift = e.closed[0];
    r.variance_like = 2.0 * std::sqrt(e.closed[2]) + 2.0 * std::sqrt(2.0 * e.closed[3]);
    r.remainder = 2.0 * std::sqrt(2.0 * e.closed[4]) + 4.0 * std::sqrt(e.closed[5]);
    r.total = e.total;
    return r;
  }
  fail(ErrorCode::invalid_argument, "unknown bound method '" + method + "'");
}

inline bool dominates(double total, const DistanceResult& d) {
  if (d.method == DistanceMethod::monte_carlo) return total >= d.value - 3.0 * d.standard_error;
  return total >= d.value;
}

inline std::vector<std::string> bound_columns() {
  return {"method",   "lambda",         "mean_shift",     "variance_like", "remainder",
          "total",    "distance",       "distance_value", "tail_error",    "standard_error",
          "distance_method", "integer_valued", "dominated"};
}

}  // namespace detail

inline Report cmd_bound(const ExperimentSpec& spec, const RunOptions& opt) {
  const Prepared p = prepare(spec);
  const double lambda = resolve_lambda(spec.lambda, p);
  Report r;
  r.command = "bound";
  r.table.columns = detail::bound_columns();
  std::optional<detail::Reference> tv, w1;
  std::string violation;
  for (const std::string& method : spec.bounds) {
    BoundReport b = detail::evaluate_bound(method, p, lambda);
    b.total += opt.total_offset;
    const bool wass = method == "wasserstein";
    // The closed-form example row is compared at its own lambda.
    std::optional<detail::Reference> own;
    const detail::Reference* ref = nullptr;
    if (b.lambda != lambda) {
      own = detail::exact_reference(p, b.lambda, wass, opt);
      ref = &*own;
    } else {
      auto& slot = wass ? w1 : tv;
      if (!slot) slot = detail::exact_reference(p, lambda, wass, opt);
      ref = &*slot;
    }
    const bool ok = detail::dominates(b.total, ref->result);
    if (!ok && violation.empty()) violation = method;
    const bool mc = ref->result.method == DistanceMethod::monte_carlo;
    r.table.add_row({b.method, b.lambda, b.mean_shift, b.variance_like, b.remainder, b.total,
                     ref->distance, ref->result.value, ref->result.tail_error,
                     mc ? Cell{ref->result.standard_error} : Cell{nullptr},
                     std::string(mc ? "monte_carlo" : "exact"), ref->integer_valued, ok});
  }
  r.exit_code = violation.empty() ? 0 : kExitDominationViolation;
  r.message = violation.empty() ? "all bounds dominate the distance"
                                : "domination violated by '" + violation + "'";
  return r;
}

inline Report cmd_bernoulli(const std::vector<double>& p, std::optional<double> lambda,
                            const RunOptions& opt) {
  ExperimentSpec spec;
  spec.p = p;
  spec.functional = BernoulliSum{};
  if (lambda) spec.lambda = {LambdaPolicy::Kind::value, *lambda};
  spec.bounds = {"bernoulli"};
  Report r = cmd_bound(spec, opt);
  r.command = "bernoulli";
  return r;
}

inline Report cmd_j2_rate(int n_min, int n_max, int step, const RunOptions& opt) {
  if (n_min < 2 || n_max < n_min) fail(ErrorCode::invalid_argument, "need 2 <= n_min <= n_max");
  if (step < 1) fail(ErrorCode::invalid_argument, "step must be positive");
  Report r;
  r.command = "j2-rate";
  r.table.columns = {"n",  "lambda", "A1",   "A2",      "A3",          "A4",
                     "A5", "A6",     "A7",   "total",   "rate",        "rate_ok",
                     "module_max_rel_error", "exact_tv", "integer_valued", "exact_ok"};
  std::string violation;
  for (long long n = n_min; n <= n_max; n += step) {
    const int ni = static_cast<int>(n);
    const J2Example e = ni <= kJ2ModuleLimit ? j2_example(ni) : j2_example_closed(ni);
    const double total = e.total + opt.total_offset;
    const double rate = total * std::sqrt(static_cast<double>(n));
    const bool rate_ok = rate <= kJ2RateConstant;
    Cell module_err{nullptr};
    if (ni <= kJ2ModuleLimit) {
      double worst = 0.0;
      for (std::size_t i = 0; i < 7; ++i) {
        const double scale = std::max(std::abs(e.closed[i]), 1e-300);
        const double diff = std::abs(e.computed[i] - e.closed[i]);
        worst = std::max(worst, e.closed[i] == 0.0 ? diff : diff / scale);
      }
      module_err = worst;
    }
    Cell exact{nullptr}, integer{nullptr}, exact_ok{nullptr};
    if (ni <= kJ2ExactLimit) {
      const ProbabilityModel model = j2_example_model(ni);
      const SampleSpace space(model);
      const FunctionalTable F = to_table(model, ChaosExpansion::integral(j2_example_kernel(ni)));
      const double tv = tv_exact_atoms(atoms(space, F), e.lambda).value;
      exact = tv;
      integer = is_integer_valued(F, true);
      exact_ok = tv <= total;
      if (tv > total && violation.empty()) violation = "exact distance above the bound at n = " + std::to_string(n);
    }
    if (!rate_ok && violation.empty()) violation = "rate constant exceeded at n = " + std::to_string(n);
    r.table.add_row({n, e.lambda, e.closed[0], e.closed[1], e.closed[2], e.closed[3], e.closed[4],
                     e.closed[5], e.closed[6], total, rate, rate_ok, module_err, exact, integer,
                     exact_ok});
  }
  r.exit_code = violation.empty() ? 0 : kExitDominationViolation;
  r.message = violation.empty() ? "all rows within the bound" : violation;
  return r;
}

}  // namespace mcstein::cli
