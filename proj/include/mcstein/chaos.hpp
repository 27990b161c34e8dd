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

// Discrete multiple stochastic integrals J_n(f) = n! sum_{i_1<..<i_n}
// f(i_1..i_n) Y_{i_1}..Y_{i_n}, finite chaos expansions, and the product
// formula for the non-symmetric, non-homogeneous case.

#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <vector>

#include "mcstein/kernel.hpp"
#include "mcstein/model.hpp"
#include "mcstein/numeric.hpp"
#include "mcstein/parallel.hpp"
#include "mcstein/spectral.hpp"

namespace mcstein {

/// E[F] + sum_n J_n(f_n), with at most one (nonempty) kernel per order n >= 1.
class ChaosExpansion {
 public:
  ChaosExpansion() = default;
  explicit ChaosExpansion(double mean) : mean_(mean) {}

  /// The single integral J_n(f); order 0 gives the constant.
  static ChaosExpansion integral(const Kernel& f) {
    ChaosExpansion out;
    out.add(f);
    return out;
  }

  double mean() const noexcept { return mean_; }
  void set_mean(double m) noexcept { mean_ = m; }

  const std::map<int, Kernel>& kernels() const noexcept { return kernels_; }

  const Kernel* kernel(int order) const {
    auto it = kernels_.find(order);
    return it == kernels_.end() ? nullptr : &it->second;
  }

  /// Adds J_n(f) (or the constant, for order 0), merging with an existing
  /// kernel of the same order.
  void add(const Kernel& f) {
    if (f.order() == 0) {
      mean_ += f.scalar_value();
      return;
    }
    if (f.empty()) return;
    auto it = kernels_.find(f.order());
    if (it == kernels_.end()) {
      kernels_.emplace(f.order(), f);
      return;
    }
    it->second = it->second + f;
    if (it->second.empty()) kernels_.erase(it);
  }

  int max_order() const { return kernels_.empty() ? 0 : kernels_.rbegin()->first; }

  int max_index() const {
    int m = 0;
    for (const auto& [n, f] : kernels_) m = std::max(m, f.max_index());
    return m;
  }

  ChaosExpansion centered() const {
    ChaosExpansion out = *this;
    out.mean_ = 0.0;
    return out;
  }

  friend ChaosExpansion operator+(const ChaosExpansion& a, const ChaosExpansion& b) {
    ChaosExpansion out = a;
    out.mean_ += b.mean_;
    for (const auto& [n, f] : b.kernels_) out.add(f);
    return out;
  }

  friend ChaosExpansion operator*(double s, const ChaosExpansion& a) {
    ChaosExpansion out(s * a.mean_);
    for (const auto& [n, f] : a.kernels_) out.add(s * f);
    return out;
  }

  friend bool operator==(const ChaosExpansion&, const ChaosExpansion&) = default;

 private:
  double mean_ = 0.0;
  std::map<int, Kernel> kernels_;
};

/// J_n(f)(omega).
inline double integral_value(const ProbabilityModel& model, const Kernel& f, const Outcome& omega) {
  require_same_length(model, omega);
  require_indices_within(f, model.size());
  if (f.order() == 0) return f.scalar_value();
  CompensatedSum s;
  for (const auto& [idx, c] : f.coefficients()) {
    double term = c;
    for (int i : idx) term *= standardized_value(model, i, omega[i]);
    s.add(term);
  }
  return factorial(f.order()) * s.value();
}

inline double evaluate(const ProbabilityModel& model, const ChaosExpansion& F, const Outcome& omega) {
  CompensatedSum s;
  s.add(F.mean());
  for (const auto& [n, f] : F.kernels()) s.add(integral_value(model, f, omega));
  return s.value();
}

/// evaluate() on all 2^N outcomes.
inline FunctionalTable to_table(const ProbabilityModel& model, const ChaosExpansion& F) {
  const int n = model.size();
  struct Term {
    double weight;
    std::vector<int> coords;  // 0-based
  };
  std::vector<Term> terms;
  for (const auto& [order, f] : F.kernels()) {
    require_indices_within(f, n);
    const double nf = factorial(order);
    for (const auto& [idx, c] : f.coefficients()) {
      Term t{nf * c, {}};
      for (int i : idx) t.coords.push_back(i - 1);
      terms.push_back(std::move(t));
    }
  }
  std::vector<double> y_plus(static_cast<std::size_t>(n)), y_minus(static_cast<std::size_t>(n));
  for (int k = 1; k <= n; ++k) {
    y_plus[static_cast<std::size_t>(k - 1)] = standardized_value(model, k, 1);
    y_minus[static_cast<std::size_t>(k - 1)] = standardized_value(model, k, -1);
  }
  const double mean = F.mean();
  return FunctionalTable::from_masks(n, [&](std::uint64_t mask) {
    CompensatedSum s;
    s.add(mean);
    for (const auto& t : terms) {
      double v = t.weight;
      for (int c : t.coords) {
        v *= (mask >> c) & 1u ? y_plus[static_cast<std::size_t>(c)]
                              : y_minus[static_cast<std::size_t>(c)];
      }
      s.add(v);
    }
    return s.value();
  });
}

/// Chaos expansion of a tabulated functional. The coefficient of the
/// increasing tuple S is E[F prod_{k in S} Y_k] / |S|!.
inline ChaosExpansion decompose(const ProbabilityModel& model, const FunctionalTable& F) {
  const std::vector<double> c = forward_transform(model, F);
  ChaosExpansion out(c[0]);
  std::map<int, Kernel> kernels;
  for (std::size_t mask = 1; mask < c.size(); ++mask) {
    if (c[mask] == 0.0) continue;
    const int order = popcount(mask);
    Index idx;
    idx.reserve(static_cast<std::size_t>(order));
    for (int k = 0; k < model.size(); ++k) {
      if ((mask >> k) & 1u) idx.push_back(k + 1);
    }
    auto [it, inserted] = kernels.try_emplace(order, order);
    it->second.add(idx, c[mask] / factorial(order));
  }
  for (const auto& [n, f] : kernels) out.add(f);
  return out;
}

/// Chaos expansion of J_n(f) J_m(g):
///   sum_{r=0}^{n^m} r! C(n,r) C(m,r) sum_{l=0}^{r} C(r,l)
///       J_{n+m-r-l}( sym(phi^{*(r-l)}(f star_r^l g)) 1_Delta ).
inline ChaosExpansion multiply(const ProbabilityModel& model, const Kernel& f, const Kernel& g) {
  require_indices_within(f, model.size());
  require_indices_within(g, model.size());
  if (f.order() == 0) return f.scalar_value() * ChaosExpansion::integral(g);
  if (g.order() == 0) return g.scalar_value() * ChaosExpansion::integral(f);
  const int n = f.order(), m = g.order();
  ChaosExpansion out;
  for (int r = 0; r <= std::min(n, m); ++r) {
    const double outer = factorial(r) * binomial(n, r) * binomial(m, r);
    for (int l = 0; l <= r; ++l) {
      const Kernel h = to_kernel(weighted_contract(model, f, g, r, l));
      if (h.empty()) continue;
      out.add((outer * binomial(r, l)) * h);
    }
  }
  return out;
}

/// E[J_n(f) J_m(g)].
inline double covariance(const Kernel& f, const Kernel& g) {
  if (f.order() != g.order()) return 0.0;
  return factorial(f.order()) * inner_product(f, g);
}

/// Var(F) = sum_n n! ||f_n||^2.
inline double chaos_variance(const ChaosExpansion& F) {
  CompensatedSum s;
  for (const auto& [n, f] : F.kernels()) s.add(factorial(n) * norm_squared(f));
  return s.value();
}

}  // namespace mcstein
