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

// Seeded identity suite: each check runs over random instances and records
// the largest residual together with the first failing instance.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "mcstein/chaos.hpp"
#include "mcstein/chenstein.hpp"
#include "mcstein/cli/format.hpp"
#include "mcstein/kernel.hpp"
#include "mcstein/malliavin.hpp"
#include "mcstein/model.hpp"
#include "mcstein/random.hpp"
#include "mcstein/sampling.hpp"

namespace mcstein::cli {

inline constexpr int kExitIdentityFailure = 3;

struct VerifyOptions {
  std::uint64_t seed = 20261014;
  // Names of checks whose inputs are deliberately corrupted (negative controls).
  std::set<std::string> faults;
};

struct IdentityResult {
  std::string name;
  int instances = 0;
  double max_residual = 0.0;
  double tolerance = 0.0;
  std::string witness;

  bool passed() const { return max_residual <= tolerance && std::isfinite(max_residual); }
};

namespace detail {

inline std::string describe(const ProbabilityModel& m) {
  std::string s = "p=[";
  for (int k = 1; k <= m.size(); ++k) s += (k > 1 ? " " : "") + shortest(m.p(k));
  return s + "]";
}

inline std::string describe(const Kernel& f) {
  std::string s = "order " + std::to_string(f.order()) + " {";
  bool first = true;
  for (const auto& [idx, c] : f.coefficients()) {
    s += (first ? "" : " ") + index_string(idx) + ":" + shortest(c);
    first = false;
  }
  return s + "}";
}

inline double max_abs_diff(const FunctionalTable& a, const FunctionalTable& b) {
  double r = 0.0;
  for (std::size_t m = 0; m < a.size(); ++m) r = std::max(r, std::abs(a[m] - b[m]));
  return r;
}

class Check {
 public:
  Check(std::string name, double tolerance) { result_.name = std::move(name); result_.tolerance = tolerance; }

  void record(double residual, const std::function<std::string()>& witness) {
    ++result_.instances;
    if (std::isnan(residual)) residual = std::numeric_limits<double>::infinity();
    if (residual > result_.max_residual) result_.max_residual = residual;
    if (residual > result_.tolerance && result_.witness.empty()) result_.witness = witness();
  }

  IdentityResult result() const { return result_; }

 private:
  IdentityResult result_;
};

inline std::uint64_t stream_seed(std::uint64_t seed, std::uint64_t tag) { return counter_hash(seed, tag, 0); }

}  // namespace detail

inline std::vector<IdentityResult> run_identity_suite(const VerifyOptions& opt) {
  using detail::Check;
  using detail::describe;
  std::vector<IdentityResult> out;
  const bool corrupt_product = opt.faults.count("product_formula") > 0;

  {
    Check c("product_formula", 1e-10);
    Rng rng(detail::stream_seed(opt.seed, 1));
    for (int t = 0; t < 60; ++t) {
      const int n = rng.uniform_int(1, 7);
      const ProbabilityModel model = random_model(rng, n);
      const Kernel f = random_kernel(rng, rng.uniform_int(1, std::min(3, n)), n, 4);
      const Kernel g = random_kernel(rng, rng.uniform_int(1, std::min(3, n)), n, 4);
      ChaosExpansion prod = multiply(model, f, g);
      if (corrupt_product && !prod.kernels().empty()) {
        Kernel bad = prod.kernels().begin()->second;
        bad.add(bad.coefficients().begin()->first, 0.01);
        ChaosExpansion tampered(prod.mean());
        for (const auto& [order, h] : prod.kernels()) tampered.add(order == bad.order() ? bad : h);
        prod = tampered;
      }
      const FunctionalTable lhs = to_table(model, prod);
      const FunctionalTable jf = to_table(model, ChaosExpansion::integral(f));
      const FunctionalTable jg = to_table(model, ChaosExpansion::integral(g));
      double r = 0.0;
      for (std::size_t m = 0; m < lhs.size(); ++m) r = std::max(r, std::abs(lhs[m] - jf[m] * jg[m]));
      c.record(r, [&] { return describe(model) + " f=" + describe(f) + " g=" + describe(g); });
    }
    out.push_back(c.result());
  }
  {
    Check c("isometry", 1e-10);
    Rng rng(detail::stream_seed(opt.seed, 2));
    for (int t = 0; t < 40; ++t) {
      const int n = rng.uniform_int(2, 8);
      const ProbabilityModel model = random_model(rng, n);
      const SampleSpace space(model);
      const int a = rng.uniform_int(1, std::min(3, n));
      const int b = t % 2 == 0 ? a : rng.uniform_int(1, std::min(3, n));
      const Kernel f = random_kernel(rng, a, n, 5), g = random_kernel(rng, b, n, 5);
      const FunctionalTable jf = to_table(model, ChaosExpansion::integral(f));
      const FunctionalTable jg = to_table(model, ChaosExpansion::integral(g));
      const double e = space.expect([&](std::uint64_t m) { return jf[m] * jg[m]; });
      c.record(std::abs(e - covariance(f, g)),
               [&] { return describe(model) + " f=" + describe(f) + " g=" + describe(g); });
    }
    out.push_back(c.result());
  }
  {
    Check c("adjointness", 1e-10);
    Check ou("ou_divergence", 1e-10);
    Rng rng(detail::stream_seed(opt.seed, 3));
    for (int t = 0; t < 30; ++t) {
      const int n = rng.uniform_int(2, 7);
      const ProbabilityModel model = random_model(rng, n);
      const SampleSpace space(model);
      const ChaosExpansion F = random_expansion(rng, n, 3, 4);
      GradientField u;
      for (int k = 1; k <= n; ++k) u.components.push_back(random_expansion(rng, n, 2, 3));
      const FunctionalTable ft = to_table(model, F);
      const FunctionalTable du = to_table(model, divergence(model, u));
      const double lhs = space.expect([&](std::uint64_t m) { return ft[m] * du[m]; });
      CompensatedSum rhs;
      for (int k = 1; k <= n; ++k) {
        const FunctionalTable dk = gradient_pathwise(model, ft, k);
        const FunctionalTable uk = to_table(model, u[k]);
        rhs.add(space.expect([&](std::uint64_t m) { return dk[m] * uk[m]; }));
      }
      c.record(std::abs(lhs - rhs.value()), [&] { return describe(model); });

      const FunctionalTable l = to_table(model, ou_operator(F));
      const FunctionalTable mdd = to_table(model, -1.0 * divergence(model, gradient_field(model, F)));
      ou.record(detail::max_abs_diff(l, mdd), [&] { return describe(model); });
    }
    out.push_back(c.result());
    out.push_back(ou.result());
  }
  {
    Check c("integration_by_parts", 1e-10);
    Rng rng(detail::stream_seed(opt.seed, 4));
    for (int t = 0; t < 30; ++t) {
      const int n = rng.uniform_int(1, 8);
      const ProbabilityModel model = random_model(rng, n);
      const SampleSpace space(model);
      const FunctionalTable F = random_table(rng, n), G = random_table(rng, n);
      c.record(integration_by_parts_residual(space, F, G), [&] { return describe(model); });
    }
    out.push_back(c.result());
  }
  {
    Check c("structure_equation", 1e-12);
    Rng rng(detail::stream_seed(opt.seed, 5));
    for (int t = 0; t < 50; ++t) {
      const ProbabilityModel model = random_model(rng, 4, 0.01, 0.99);
      double r = 0.0;
      for (int k = 1; k <= model.size(); ++k) {
        for (int sign : {-1, 1}) {
          const double y = standardized_value(model, k, sign);
          r = std::max(r, std::abs(y * y - 1.0 - model.phi(k) * y) / std::max(1.0, y * y));
        }
      }
      c.record(r, [&] { return describe(model); });
    }
    out.push_back(c.result());
  }
  {
    Check c("gradient_routes", 1e-10);
    Check rt("decompose_roundtrip", 1e-9);
    Rng rng(detail::stream_seed(opt.seed, 6));
    for (int t = 0; t < 30; ++t) {
      const int n = rng.uniform_int(1, 7);
      const ProbabilityModel model = random_model(rng, n);
      const ChaosExpansion F = random_expansion(rng, n, 3, 4);
      const FunctionalTable ft = to_table(model, F);
      double r = 0.0;
      for (int k = 1; k <= n; ++k) {
        r = std::max(r, detail::max_abs_diff(gradient_pathwise(model, ft, k),
                                             to_table(model, gradient_chaos(model, F, k))));
      }
      c.record(r, [&] { return describe(model); });
      rt.record(detail::max_abs_diff(to_table(model, decompose(model, ft)), ft),
                [&] { return describe(model); });
    }
    out.push_back(c.result());
    out.push_back(rt.result());
  }
  {
    Check c("stein_equation", 1e-12);
    Rng rng(detail::stream_seed(opt.seed, 7));
    for (double lambda : {0.1, 0.5, 1.0, 2.0, 5.0, 20.0}) {
      for (int t = 0; t < 20; ++t) {
        std::set<long long> members;
        for (long long k = 0; k <= 10; ++k) {
          if (rng.bernoulli(0.4)) members.insert(k);
        }
        const TargetSet a = TargetSet::finite(members);
        const SteinSolution s = solve(lambda, a, default_k_max(lambda, 10) + 1);
        c.record(s.max_residual(),
                 [&] { return "lambda=" + shortest(lambda) + " A=" + a.to_string(); });
      }
    }
    out.push_back(c.result());
  }
  {
    Check mehler("mehler", 1e-10);
    Check poincare("poincare", 1e-10);
    Rng rng(detail::stream_seed(opt.seed, 8));
    for (int t = 0; t < 30; ++t) {
      const int n = rng.uniform_int(2, 8);
      const ProbabilityModel model = random_model(rng, n);
      const SampleSpace space(model);
      const FunctionalTable F = random_table(rng, n);
      for (int order : {1, 2}) {
        std::vector<int> ks;
        for (int i = 0; i < order; ++i) ks.push_back(rng.uniform_int(1, n));
        for (double alpha : {1.0, 2.0}) {
          mehler.record(std::max(0.0, mehler_gap(space, F, ks, alpha)),
                        [&] { return describe(model) + " order " + std::to_string(order); });
        }
      }
      poincare.record(std::max(0.0, poincare_gap(space, F)), [&] { return describe(model); });
    }
    out.push_back(mehler.result());
    out.push_back(poincare.result());
  }
  return out;
}

inline Report cmd_verify(const VerifyOptions& opt) {
  Report r;
  r.command = "verify";
  r.table.columns = {"identity", "instances", "max_residual", "tolerance", "passed", "witness"};
  std::string first_failure;
  for (const IdentityResult& res : run_identity_suite(opt)) {
    r.table.add_row({res.name, static_cast<long long>(res.instances), res.max_residual,
                     res.tolerance, res.passed(),
                     res.witness.empty() ? Cell{nullptr} : Cell{res.witness}});
    if (!res.passed() && first_failure.empty()) first_failure = res.name;
  }
  r.exit_code = first_failure.empty() ? 0 : kExitIdentityFailure;
  r.message = first_failure.empty() ? "all identities hold" : "identity failed: " + first_failure;
  return r;
}

}  // namespace mcstein::cli
