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

// Explicit upper bounds on the total variation (and Wasserstein) distance
// between an integer-valued functional and a Poisson law. Every expectation
// is computed exactly, by enumeration or from kernel norms.

#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "mcstein/chaos.hpp"
#include "mcstein/chenstein.hpp"
#include "mcstein/kernel.hpp"
#include "mcstein/malliavin.hpp"
#include "mcstein/model.hpp"
#include "mcstein/numeric.hpp"

namespace mcstein {

/// How gradients are obtained: by flipping coordinates of a table, or from
/// the chaos expansion.
enum class GradientRoute { pathwise, chaos };

/// Whether kernel-based bounds verify integer values by enumeration first.
enum class IntegralityCheck { enforce, skip };

struct BoundReport {
  std::string method;
  double lambda = 0.0;
  double mean_shift = 0.0;
  double variance_like = 0.0;
  double remainder = 0.0;
  double total = 0.0;
  std::vector<std::pair<std::string, double>> components;

  double component(const std::string& name) const {
    for (const auto& [k, v] : components) {
      if (k == name) return v;
    }
    fail(ErrorCode::invalid_argument, "no component named " + name);
  }
};

namespace detail {

inline double mean_factor(double lambda) { return stein_factors(lambda).sup_bound; }
inline double diff_factor(double lambda) { return stein_factors(lambda).diff_bound; }

inline BoundReport finish(BoundReport r) {
  r.total = r.mean_shift + r.variance_like + r.remainder;
  return r;
}

/// Gradient data shared by the first-order bounds.
struct FirstOrderData {
  double mean = 0.0;
  // <DF, -DL^{-1}(F - EF)> at each outcome.
  std::vector<double> inner;
  // sum_k (1/sigma_k) E[D_kF (D_kF + sigma_k X_k) |-D_kL^{-1}(F - EF)|]
  double remainder_pathwise = 0.0;
  // the same with X_k replaced by p_k - q_k
  double remainder_reduced = 0.0;
};

inline FirstOrderData first_order_data(const SampleSpace& space, const FunctionalTable& F,
                                        GradientRoute route) {
  space.require_matches(F);
  const ProbabilityModel& model = space.model();
  FirstOrderData d;
  d.mean = expectation(space, F);
  d.inner.assign(F.size(), 0.0);

  FunctionalTable inverse = F;
  ChaosExpansion expansion, inverse_expansion;
  if (route == GradientRoute::pathwise) {
    inverse = inverse_ou_table(model, F);
  } else {
    expansion = decompose(model, F);
    inverse_expansion = pseudo_inverse(expansion);
  }
  CompensatedSum rem, rem_reduced;
  for (int k = 1; k <= model.size(); ++k) {
    FunctionalTable dk = route == GradientRoute::pathwise
                             ? gradient_pathwise(model, F, k)
                             : to_table(model, gradient_chaos(model, expansion, k));
    FunctionalTable wk = route == GradientRoute::pathwise
                             ? -1.0 * gradient_pathwise(model, inverse, k)
                             : to_table(model, -1.0 * gradient_chaos(model, inverse_expansion, k));
    const double s = model.sigma(k);
    const double drift = model.p(k) - model.q(k);
    const std::uint64_t bit = std::uint64_t{1} << (k - 1);
    for (std::size_t m = 0; m < F.size(); ++m) d.inner[m] += dk[m] * wk[m];
    rem.add(space.expect([&](std::uint64_t m) {
      const double x = (m & bit) ? 1.0 : -1.0;
      return dk[m] * (dk[m] + s * x) * std::abs(wk[m]) / s;
    }));
    rem_reduced.add(space.expect([&](std::uint64_t m) {
      return dk[m] * (dk[m] + s * drift) * std::abs(wk[m]) / s;
    }));
  }
  d.remainder_pathwise = rem.value();
  d.remainder_reduced = rem_reduced.value();
  return d;
}

inline double expected_gap(const SampleSpace& space, const std::vector<double>& inner, double lambda) {
  return space.expect([&](std::uint64_t m) { return std::abs(lambda - inner[m]); });
}

/// Fails with NonIntegerValue unless c + J_m(f) takes values in N_0.
inline void require_integer_functional(const ProbabilityModel& model, const Kernel& f, double shift) {
  ChaosExpansion F(shift);
  F.add(f);
  require_integer_valued(to_table(model, F));
}

}  // namespace detail

/// Bound for a general functional with values in N_0.
inline BoundReport main_bound(const SampleSpace& space, const FunctionalTable& F, double lambda,
                              GradientRoute route = GradientRoute::pathwise) {
  require_lambda(lambda);
  require_integer_valued(F);
  const detail::FirstOrderData d = detail::first_order_data(space, F, route);
  const double kappa = detail::diff_factor(lambda);
  const double gap = detail::expected_gap(space, d.inner, lambda);
  BoundReport r;
  r.method = "main";
  r.lambda = lambda;
  r.mean_shift = detail::mean_factor(lambda) * std::abs(lambda - d.mean);
  r.variance_like = kappa * gap;
  r.remainder = kappa * d.remainder_pathwise;
  r.components = {{"mean", d.mean}, {"expected_gap", gap}, {"remainder_expectation", d.remainder_pathwise}};
  return detail::finish(std::move(r));
}

/// As main_bound, with the remainder written without the Rademacher sequence.
inline BoundReport main_bound_reduced(const SampleSpace& space, const FunctionalTable& F,
                                      double lambda, GradientRoute route = GradientRoute::pathwise) {
  require_lambda(lambda);
  require_integer_valued(F);
  const detail::FirstOrderData d = detail::first_order_data(space, F, route);
  const double kappa = detail::diff_factor(lambda);
  const double gap = detail::expected_gap(space, d.inner, lambda);
  BoundReport r;
  r.method = "main_reduced";
  r.lambda = lambda;
  r.mean_shift = detail::mean_factor(lambda) * std::abs(lambda - d.mean);
  r.variance_like = kappa * gap;
  r.remainder = kappa * d.remainder_reduced;
  r.components = {{"mean", d.mean}, {"expected_gap", gap}, {"remainder_expectation", d.remainder_reduced}};
  return detail::finish(std::move(r));
}

/// Wasserstein-distance bound with the Lipschitz-class Stein factors.
inline BoundReport wasserstein_bound(const SampleSpace& space, const FunctionalTable& F,
                                     double lambda, GradientRoute route = GradientRoute::pathwise) {
  require_lambda(lambda);
  require_integer_valued(F);
  const detail::FirstOrderData d = detail::first_order_data(space, F, route);
  const double gap = detail::expected_gap(space, d.inner, lambda);
  const double c1 = std::min(1.0, 8.0 / (3.0 * std::sqrt(2.0 * std::exp(1.0) * lambda)));
  const double c2 = std::min(4.0 / 3.0, 2.0 / lambda);
  BoundReport r;
  r.method = "wasserstein";
  r.lambda = lambda;
  r.mean_shift = std::abs(lambda - d.mean);
  r.variance_like = c1 * gap;
  r.remainder = c2 * 0.5 * d.remainder_pathwise;
  r.components = {{"mean", d.mean}, {"expected_gap", gap}, {"remainder_expectation", 0.5 * d.remainder_pathwise}};
  return detail::finish(std::move(r));
}

/// Bound for F = c + J_1(f).
inline BoundReport j1_bound(const ProbabilityModel& model, const Kernel& f, double shift,
                            double lambda, IntegralityCheck check = IntegralityCheck::enforce) {
  require_lambda(lambda);
  if (f.order() != 1) {
    fail(ErrorCode::order_mismatch, "first-order bound needs an order-1 kernel, got order " +
                                        std::to_string(f.order()));
  }
  require_indices_within(f, model.size());
  if (check == IntegralityCheck::enforce) detail::require_integer_functional(model, f, shift);
  const double kappa = detail::diff_factor(lambda);
  const double var = norm_squared(f);
  CompensatedSum cubic_form, product_form;
  for (const auto& [idx, v] : f.coefficients()) {
    const int k = idx[0];
    const double s = model.sigma(k), drift = model.p(k) - model.q(k);
    cubic_form.add((std::abs(v * v * v) + s * drift * v * v) / s);
    product_form.add((v * v + s * drift * v) * std::abs(v) / s);
  }
  BoundReport r;
  r.method = "j1";
  r.lambda = lambda;
  r.mean_shift = detail::mean_factor(lambda) * std::abs(lambda - shift);
  r.variance_like = kappa * std::abs(lambda - var);
  r.remainder = kappa * product_form.value();
  r.components = {{"variance", var},
                  {"cubic_form", cubic_form.value()},
                  {"product_form", product_form.value()}};
  return detail::finish(std::move(r));
}

/// Bound for a sum of independent Bernoulli(p_k) variables.
inline BoundReport bernoulli_bound(const std::vector<double>& p, double lambda) {
  require_lambda(lambda);
  const ProbabilityModel model(p);
  CompensatedSum mean, var, cubic;
  for (int k = 1; k <= model.size(); ++k) {
    const double pk = model.p(k), qk = model.q(k);
    mean.add(pk);
    var.add(pk * qk);
    cubic.add(pk * pk * qk);
  }
  const double kappa = detail::diff_factor(lambda);
  BoundReport r;
  r.method = "bernoulli";
  r.lambda = lambda;
  r.mean_shift = detail::mean_factor(lambda) * std::abs(lambda - mean.value());
  r.variance_like = kappa * std::abs(lambda - var.value());
  r.remainder = 2.0 * kappa * cubic.value();
  r.components = {{"mean", mean.value()}, {"variance", var.value()}, {"sum_p2q", cubic.value()}};
  return detail::finish(std::move(r));
}

namespace detail {

/// sum over (r, l) with 2m - r - l = s of
///   (r-1)! C(m-1, r-1)^2 C(r-1, l-1) sym(phi^{*(r-l)}(a star_{r-1+shift}^{l-1+shift} a)) 1_Delta
/// grouped by s >= 1. With shift = 1 the contraction is of f with itself;
/// with shift = 0 it is of a slice f(., k) with itself.
inline std::map<int, Kernel> grouped_square(const ProbabilityModel& model, const Kernel& a, int m,
                                            int shift) {
  std::map<int, Kernel> out;
  for (int r = 1; r <= m; ++r) {
    for (int l = 1; l <= r; ++l) {
      const int s = 2 * m - r - l;
      if (s < 1) continue;
      const double coeff = factorial(r - 1) * binomial(m - 1, r - 1) * binomial(m - 1, r - 1) *
                           binomial(r - 1, l - 1);
      const Kernel h = to_kernel(weighted_contract(model, a, a, r - 1 + shift, l - 1 + shift));
      auto [it, inserted] = out.try_emplace(s, s);
      it->second = it->second + coeff * h;
    }
  }
  return out;
}

}  // namespace detail

/// Bound for F = c + J_m(f), m >= 2, from contraction norms.
inline BoundReport jm_bound(const ProbabilityModel& model, const Kernel& f, double shift,
                            double lambda, IntegralityCheck check = IntegralityCheck::enforce) {
  require_lambda(lambda);
  const int m = f.order();
  if (m < 2) fail(ErrorCode::order_too_small, "order " + std::to_string(m) + " is below 2");
  require_indices_within(f, model.size());
  if (check == IntegralityCheck::enforce) detail::require_integer_functional(model, f, shift);
  const double kappa = detail::diff_factor(lambda);
  const double var = factorial(m) * norm_squared(f);
  const double md = m;

  CompensatedSum first;
  for (const auto& [s, g] : detail::grouped_square(model, f, m, 1)) {
    first.add(factorial(s) * norm_squared(g));
  }
  const double first_root = md * md * first.value();

  CompensatedSum second;
  for (int k = 1; k <= model.size(); ++k) {
    const Kernel fk = slice(f, k);
    if (fk.empty()) continue;
    const double pq = model.p(k) * model.q(k);
    const double s_k = model.sigma(k), drift = model.p(k) - model.q(k);
    const double slice_norm = factorial(m - 1) * norm_squared(fk);
    CompensatedSum inner;
    inner.add(slice_norm * slice_norm);
    std::map<int, Kernel> h = detail::grouped_square(model, fk, m, 0);
    Kernel middle = (s_k * drift / md) * fk;
    if (auto it = h.find(m - 1); it != h.end()) middle = middle + it->second;
    for (const auto& [s, g] : h) {
      if (s != m - 1) inner.add(factorial(s) * norm_squared(g));
    }
    inner.add(factorial(m - 1) * norm_squared(middle));
    second.add(md * md * md * inner.value() / pq);
  }

  BoundReport r;
  r.method = "jm";
  r.lambda = lambda;
  r.mean_shift = detail::mean_factor(lambda) * std::abs(lambda - shift);
  r.variance_like = kappa * (std::abs(lambda - var) + std::sqrt(first_root));
  r.remainder = kappa * std::sqrt(var) * std::sqrt(second.value());
  r.components = {{"variance", var}, {"first_root_sum", first_root}, {"second_root_sum", second.value()}};
  return detail::finish(std::move(r));
}

/// The order-2 bound written through five named contraction norms.
inline BoundReport j2_bound(const ProbabilityModel& model, const Kernel& f, double shift,
                            double lambda, IntegralityCheck check = IntegralityCheck::enforce) {
  require_lambda(lambda);
  if (f.order() < 2) fail(ErrorCode::order_too_small, "order " + std::to_string(f.order()) + " is below 2");
  if (f.order() != 2) {
    fail(ErrorCode::order_mismatch, "order-2 bound given order " + std::to_string(f.order()));
  }
  require_indices_within(f, model.size());
  if (check == IntegralityCheck::enforce) detail::require_integer_functional(model, f, shift);
  const double kappa = detail::diff_factor(lambda);
  const double var = 2.0 * norm_squared(f);

  const double a3 = norm_squared(weighted_contract(model, f, f, 2, 1));
  const double a4 = norm_squared(mask_diagonal(contract(f, f, 1, 1)));
  CompensatedSum a5, a6, a7;
  for (int k = 1; k <= model.size(); ++k) {
    const Kernel fk = slice(f, k);
    if (fk.empty()) continue;
    const double inv_pq = 1.0 / (model.p(k) * model.q(k));
    const double half_drift = 0.5 * model.sigma(k) * (model.p(k) - model.q(k));
    const double nk = norm_squared(fk);
    a5.add(inv_pq * nk * nk);
    a6.add(inv_pq * norm_squared(mask_diagonal(contract(fk, fk, 0, 0))));
    a7.add(inv_pq * norm_squared(weighted_contract(model, fk, fk, 1, 0) +
                                 kernel_as_raw(fk).scaled(half_drift)));
  }
  BoundReport r;
  r.method = "j2";
  r.lambda = lambda;
  r.mean_shift = detail::mean_factor(lambda) * std::abs(lambda - shift);
  r.variance_like = kappa * (std::abs(lambda - var) + std::sqrt(4.0 * a3 + 8.0 * a4));
  r.remainder = kappa * std::sqrt(var) *
                std::sqrt(8.0 * a5.value() + 16.0 * a6.value() + 8.0 * a7.value());
  r.components = {{"variance", var},      {"phi_contraction_21", a3},
                  {"contraction_11", a4}, {"slice_norm4", a5.value()},
                  {"slice_tensor", a6.value()}, {"slice_phi_drift", a7.value()}};
  return detail::finish(std::move(r));
}

/// Bound in terms of moments of first and second gradients only.
inline BoundReport second_order_bound(const SampleSpace& space, const FunctionalTable& F,
                                      double lambda) {
  require_lambda(lambda);
  require_integer_valued(F);
  space.require_matches(F);
  const ProbabilityModel& model = space.model();
  const int n = model.size();
  const auto un = static_cast<std::size_t>(n);
  const double mean = expectation(space, F);
  const double var = variance(space, F);
  const double kappa = detail::diff_factor(lambda);

  std::vector<FunctionalTable> d;
  d.reserve(un);
  for (int k = 1; k <= n; ++k) d.push_back(gradient_pathwise(model, F, k));

  // E[(D_jF)^2 (D_kF)^2]
  std::vector<double> first(un * un, 0.0);
  for (std::size_t j = 0; j < un; ++j) {
    for (std::size_t k = j; k < un; ++k) {
      const double v = space.expect([&](std::uint64_t m) {
        return d[j][m] * d[j][m] * d[k][m] * d[k][m];
      });
      first[j * un + k] = first[k * un + j] = v;
    }
  }
  CompensatedSum mixed, weighted;
  for (int l = 1; l <= n; ++l) {
    std::vector<FunctionalTable> dd;
    dd.reserve(un);
    for (std::size_t j = 0; j < un; ++j) dd.push_back(gradient_pathwise(model, d[j], l));
    const double inv_pq = 1.0 / (model.p(l) * model.q(l));
    for (std::size_t j = 0; j < un; ++j) {
      for (std::size_t k = j; k < un; ++k) {
        const double e = space.expect([&](std::uint64_t m) {
          return dd[j][m] * dd[j][m] * dd[k][m] * dd[k][m];
        });
        const double mult = j == k ? 1.0 : 2.0;
        mixed.add(mult * std::sqrt(first[j * un + k]) * std::sqrt(e));
        weighted.add(mult * inv_pq * e);
      }
    }
  }
  CompensatedSum tail;
  for (int k = 1; k <= n; ++k) {
    const FunctionalTable& dk = d[static_cast<std::size_t>(k - 1)];
    const double s = model.sigma(k), drift = model.p(k) - model.q(k);
    const double a = space.expect([&](std::uint64_t m) {
      const double t = dk[m] + s * drift;
      return dk[m] * dk[m] * t * t;
    });
    const double b = space.expect([&](std::uint64_t m) { return dk[m] * dk[m]; });
    tail.add(std::sqrt(a) * std::sqrt(b) / s);
  }
  const double root_mixed = std::sqrt(3.75 * mixed.value());
  const double root_weighted = std::sqrt(0.75 * weighted.value());
  BoundReport r;
  r.method = "second_order";
  r.lambda = lambda;
  r.mean_shift = detail::mean_factor(lambda) * std::abs(lambda - mean);
  r.variance_like = kappa * (std::abs(lambda - var) + root_mixed + root_weighted);
  r.remainder = kappa * tail.value();
  r.components = {{"mean", mean},
                  {"variance", var},
                  {"mixed_root", root_mixed},
                  {"weighted_root", root_weighted},
                  {"gradient_tail", tail.value()}};
  return detail::finish(std::move(r));
}

/// The order-2 example with p_k = 1/n and f_n(1, j) = (n-1)/(2n^2), j = 2..n.
struct J2Example {
  int n = 0;
  double lambda = 0.0;
  std::array<double, 7> closed{};    // A_1..A_7 from closed forms
  std::array<double, 7> computed{};  // the same from contraction norms (empty if skipped)
  double total = 0.0;                // A1 + 2 sqrt(A3) + 2 sqrt(2 A4) + 2 sqrt(2 A5) + 4 sqrt(A6)
  double rate = 0.0;                 // total * sqrt(n)
};

inline constexpr double kJ2RateConstant = 2.5 + 1.4142135623730951;

inline ProbabilityModel j2_example_model(int n) {
  if (n < 2) fail(ErrorCode::invalid_argument, "the order-2 example needs n >= 2");
  return ProbabilityModel(std::vector<double>(static_cast<std::size_t>(n), 1.0 / n));
}

inline Kernel j2_example_kernel(int n) {
  if (n < 2) fail(ErrorCode::invalid_argument, "the order-2 example needs n >= 2");
  const double nd = n;
  const double v = (nd - 1.0) / (2.0 * nd * nd);
  Kernel f(2);
  for (int j = 2; j <= n; ++j) f.add({1, j}, v);
  return f;
}

inline double j2_example_total(const std::array<double, 7>& a) {
  return a[0] + 2.0 * std::sqrt(a[2]) + 2.0 * std::sqrt(2.0 * a[3]) + 2.0 * std::sqrt(2.0 * a[4]) +
         4.0 * std::sqrt(a[5]);
}

/// Closed forms only; cheap for very large n.
inline J2Example j2_example_closed(int n) {
  if (n < 2) fail(ErrorCode::invalid_argument, "the order-2 example needs n >= 2");
  const double nd = n, a = nd - 1.0, b = nd - 2.0;
  J2Example e;
  e.n = n;
  e.lambda = a * a * a / std::pow(nd, 4);
  e.closed = {e.lambda,
              0.0,
              std::pow(a, 4) * b * b / (16.0 * std::pow(nd, 7)),
              std::pow(a, 5) * b / (16.0 * std::pow(nd, 8)),
              std::pow(a, 4) / (16.0 * std::pow(nd, 5)),
              std::pow(a, 4) * b / (16.0 * std::pow(nd, 6)),
              0.0};
  e.total = j2_example_total(e.closed);
  e.rate = e.total * std::sqrt(nd);
  return e;
}

/// Closed forms together with the same quantities from contraction norms.
inline J2Example j2_example(int n) {
  J2Example e = j2_example_closed(n);
  const ProbabilityModel model = j2_example_model(n);
  const Kernel f = j2_example_kernel(n);
  const double var = 2.0 * norm_squared(f);
  const BoundReport r = j2_bound(model, f, 0.0, var, IntegralityCheck::skip);
  e.computed = {std::abs(var - 0.0),
                std::abs(var - r.component("variance")),
                r.component("phi_contraction_21"),
                r.component("contraction_11"),
                r.component("slice_norm4"),
                r.component("slice_tensor"),
                r.component("slice_phi_drift")};
  return e;
}

}  // namespace mcstein
