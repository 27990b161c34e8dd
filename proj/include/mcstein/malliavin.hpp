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

// Discrete Malliavin calculus: gradient D, iterated gradients, divergence,
// the Ornstein-Uhlenbeck operator L and its pseudo-inverse, in pathwise
// (table) form and in chaos form.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "mcstein/chaos.hpp"
#include "mcstein/kernel.hpp"
#include "mcstein/model.hpp"
#include "mcstein/numeric.hpp"
#include "mcstein/spectral.hpp"

namespace mcstein {

namespace detail {

inline void require_coordinate(int k, int n) {
  if (k < 1 || k > n) {
    fail(ErrorCode::index_out_of_range,
         "coordinate " + std::to_string(k) + " outside 1.." + std::to_string(n));
  }
}

inline void require_table_for(const ProbabilityModel& model, const FunctionalTable& f) {
  if (f.dimension() != model.size()) {
    fail(ErrorCode::length_mismatch, "table of dimension " + std::to_string(f.dimension()) +
                                         " for model of size " + std::to_string(model.size()));
  }
}

}  // namespace detail

/// D_k F(omega) = sqrt(p_k q_k) (F(omega with +1 at k) - F(omega with -1 at k)).
inline FunctionalTable gradient_pathwise(const ProbabilityModel& model, const FunctionalTable& F,
                                         int k) {
  detail::require_table_for(model, F);
  detail::require_coordinate(k, model.size());
  const std::uint64_t bit = std::uint64_t{1} << (k - 1);
  const double s = model.sigma(k);
  return FunctionalTable::from_masks(F.dimension(), [&](std::uint64_t m) {
    return s * (F[m | bit] - F[m & ~bit]);
  });
}

/// D_{k_1..k_m} F, applying D_{k_1} first. An empty list returns F.
inline FunctionalTable iterated_gradient(const ProbabilityModel& model, const FunctionalTable& F,
                                         const std::vector<int>& ks) {
  FunctionalTable out = F;
  for (int k : ks) out = gradient_pathwise(model, out, k);
  return out;
}

/// D_k F = sum_n n J_{n-1}(f_n(., k)).
inline ChaosExpansion gradient_chaos(const ChaosExpansion& F, int k) {
  if (k < 1) fail(ErrorCode::index_out_of_range, "coordinate " + std::to_string(k));
  ChaosExpansion out;
  for (const auto& [n, f] : F.kernels()) out.add(static_cast<double>(n) * slice(f, k));
  return out;
}

/// Same as gradient_chaos but checks k against the model size.
inline ChaosExpansion gradient_chaos(const ProbabilityModel& model, const ChaosExpansion& F, int k) {
  detail::require_coordinate(k, model.size());
  return gradient_chaos(F, k);
}

/// L F = -sum_n n J_n(f_n).
inline ChaosExpansion ou_operator(const ChaosExpansion& F) {
  ChaosExpansion out;
  for (const auto& [n, f] : F.kernels()) out.add(-static_cast<double>(n) * f);
  return out;
}

/// L^{-1}(F - E[F]) = -sum_n (1/n) J_n(f_n).
inline ChaosExpansion pseudo_inverse(const ChaosExpansion& F) {
  ChaosExpansion out;
  for (const auto& [n, f] : F.kernels()) out.add((-1.0 / n) * f);
  return out;
}

/// A sequence u = (u_1..u_N) of functionals in chaos form.
struct GradientField {
  std::vector<ChaosExpansion> components;

  int size() const noexcept { return static_cast<int>(components.size()); }
  const ChaosExpansion& operator[](int k) const {
    return components.at(static_cast<std::size_t>(k - 1));
  }
};

/// DF as a field in chaos form.
inline GradientField gradient_field(const ProbabilityModel& model, const ChaosExpansion& F) {
  GradientField u;
  u.components.reserve(static_cast<std::size_t>(model.size()));
  for (int k = 1; k <= model.size(); ++k) u.components.push_back(gradient_chaos(model, F, k));
  return u;
}

/// delta(u) = sum_n J_n(sym(f_n) 1_Delta) where u_k = sum_n J_{n-1}(f_n(., k)).
/// At an increasing tuple S of size n the symmetrized kernel equals
/// (1/n) sum_{k in S} g_{n,k}(S \ {k}), g_{n,k} being the order n-1 kernel of u_k.
inline ChaosExpansion divergence(const ProbabilityModel& model, const GradientField& u) {
  const int n_coords = model.size();
  if (u.size() != n_coords) {
    fail(ErrorCode::malformed_field, "field has " + std::to_string(u.size()) +
                                         " components for a model of size " +
                                         std::to_string(n_coords));
  }
  std::map<int, Kernel> assembled;
  auto target = [&](int order) -> Kernel& {
    return assembled.try_emplace(order, order).first->second;
  };
  for (int k = 1; k <= n_coords; ++k) {
    const ChaosExpansion& uk = u[k];
    if (uk.max_index() > n_coords) {
      fail(ErrorCode::malformed_field, "component " + std::to_string(k) +
                                           " references coordinate " +
                                           std::to_string(uk.max_index()));
    }
    if (uk.mean() != 0.0) target(1).add({k}, uk.mean());
    for (const auto& [order, g] : uk.kernels()) {
      const int n = order + 1;
      for (const auto& [idx, c] : g.coefficients()) {
        if (std::binary_search(idx.begin(), idx.end(), k)) continue;  // diagonal
        Index s = idx;
        s.insert(std::upper_bound(s.begin(), s.end(), k), k);
        target(n).add(s, c / n);
      }
    }
  }
  ChaosExpansion out;
  for (const auto& [n, f] : assembled) out.add(f);
  return out;
}

/// L^{-1}(F - E[F]) as a table, through the dense product-basis transform.
inline FunctionalTable inverse_ou_table(const ProbabilityModel& model, const FunctionalTable& F) {
  std::vector<double> c = forward_transform(model, F);
  c[0] = 0.0;
  for (std::size_t m = 1; m < c.size(); ++m) c[m] /= -static_cast<double>(popcount(m));
  return inverse_transform(model, std::move(c));
}

/// L F as a table.
inline FunctionalTable ou_table(const ProbabilityModel& model, const FunctionalTable& F) {
  std::vector<double> c = forward_transform(model, F);
  c[0] = 0.0;
  for (std::size_t m = 1; m < c.size(); ++m) c[m] *= -static_cast<double>(popcount(m));
  return inverse_transform(model, std::move(c));
}

/// -D_k L^{-1}(F - E[F]) for k = 1..N.
inline std::vector<FunctionalTable> covariance_field(const ProbabilityModel& model,
                                                     const FunctionalTable& F) {
  const FunctionalTable g = inverse_ou_table(model, F);
  std::vector<FunctionalTable> out;
  out.reserve(static_cast<std::size_t>(model.size()));
  for (int k = 1; k <= model.size(); ++k) out.push_back(-1.0 * gradient_pathwise(model, g, k));
  return out;
}

/// |E[(F - EF) G] - E[<-D L^{-1}(F - EF), D G>]|.
inline double integration_by_parts_residual(const SampleSpace& space, const FunctionalTable& F,
                                            const FunctionalTable& G) {
  space.require_matches(F);
  space.require_matches(G);
  const ProbabilityModel& model = space.model();
  const double ef = expectation(space, F);
  const double lhs = space.expect([&](std::uint64_t m) { return (F[m] - ef) * G[m]; });
  const std::vector<FunctionalTable> w = covariance_field(model, F);
  CompensatedSum rhs;
  for (int k = 1; k <= model.size(); ++k) {
    const FunctionalTable dg = gradient_pathwise(model, G, k);
    const FunctionalTable& wk = w[static_cast<std::size_t>(k - 1)];
    rhs.add(space.expect([&](std::uint64_t m) { return wk[m] * dg[m]; }));
  }
  return std::abs(lhs - rhs.value());
}

/// E|D^m_{ks} L^{-1}(F - EF)|^alpha - E|D^m_{ks} F|^alpha; never positive in
/// exact arithmetic.
inline double mehler_gap(const SampleSpace& space, const FunctionalTable& F,
                         const std::vector<int>& ks, double alpha) {
  space.require_matches(F);
  const ProbabilityModel& model = space.model();
  const FunctionalTable a = iterated_gradient(model, inverse_ou_table(model, F), ks);
  const FunctionalTable b = iterated_gradient(model, F, ks);
  const double lhs = space.expect([&](std::uint64_t m) { return std::pow(std::abs(a[m]), alpha); });
  const double rhs = space.expect([&](std::uint64_t m) { return std::pow(std::abs(b[m]), alpha); });
  return lhs - rhs;
}

/// E||DF||^2.
inline double gradient_energy(const SampleSpace& space, const FunctionalTable& F) {
  space.require_matches(F);
  CompensatedSum s;
  for (int k = 1; k <= space.dimension(); ++k) {
    const FunctionalTable d = gradient_pathwise(space.model(), F, k);
    s.add(space.expect([&](std::uint64_t m) { return d[m] * d[m]; }));
  }
  return s.value();
}

/// Var(F) - E||DF||^2; never positive in exact arithmetic.
inline double poincare_gap(const SampleSpace& space, const FunctionalTable& F) {
  return variance(space, F) - gradient_energy(space, F);
}

}  // namespace mcstein
