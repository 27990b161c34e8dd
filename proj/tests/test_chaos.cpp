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

#include <gtest/gtest.h>

#include <cmath>

#include "mcstein.hpp"
#include "oracles.hpp"

using namespace mcstein;

namespace {

template <class Fn>
ErrorCode code_of(Fn&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no error raised";
  return ErrorCode::invalid_argument;
}

double max_pointwise_gap(const FunctionalTable& a, const FunctionalTable& b) {
  double r = 0.0;
  for (std::size_t m = 0; m < a.size(); ++m) r = std::max(r, std::abs(a[m] - b[m]));
  return r;
}

}  // namespace

TEST(Integral, ScalarAndIndicator) {
  const ProbabilityModel m({0.2, 0.6, 0.9});
  for (std::uint64_t s = 0; s < 8; ++s) {
    const Outcome w = Outcome::from_mask(s, 3);
    EXPECT_EQ(integral_value(m, Kernel::scalar(5.0), w), 5.0);
    EXPECT_DOUBLE_EQ(integral_value(m, Kernel::indicator(2), w), standardized_value(m, 2, w));
  }
  EXPECT_EQ(code_of([&] { (void)integral_value(m, Kernel::indicator(4), Outcome({1, 1, 1})); }),
            ErrorCode::index_out_of_range);
}

TEST(Integral, MatchesOrderedSumOverDistinctTuples) {
  Rng rng(41);
  for (int t = 0; t < 20; ++t) {
    const int n = rng.uniform_int(2, 6);
    const ProbabilityModel m = random_model(rng, n);
    const Kernel f = random_kernel(rng, rng.uniform_int(1, std::min(3, n)), n, 5);
    const FunctionalTable table = to_table(m, ChaosExpansion::integral(f));
    for (std::uint64_t s = 0; s < table.size(); ++s) {
      const Outcome w = Outcome::from_mask(s, n);
      EXPECT_NEAR(table[s], oracle::integral_dense(m, f, w), 1e-12);
      EXPECT_NEAR(integral_value(m, f, w), table[s], 1e-13);
    }
  }
}

TEST(Integral, ExampleIntegralIsCenteredBernoulliProduct) {
  // With B_k = (X_k + 1)/2 the order-2 example equals
  // (B_1 - 1/n) sum_{i>=2} (B_i - 1/n); it is never an integer.
  for (int n = 2; n <= 8; ++n) {
    const ProbabilityModel m = j2_example_model(n);
    const FunctionalTable F = to_table(m, ChaosExpansion::integral(j2_example_kernel(n)));
    const double inv = 1.0 / n;
    for (std::uint64_t s = 0; s < F.size(); ++s) {
      const Outcome w = Outcome::from_mask(s, n);
      auto b = [&](int k) { return (w[k] + 1) / 2.0; };
      double tail = 0.0;
      for (int i = 2; i <= n; ++i) tail += b(i) - inv;
      EXPECT_NEAR(F[s], (b(1) - inv) * tail, 1e-13);
      long long r = 0;
      EXPECT_FALSE(near_integer(F[s], 1e-9, &r)) << "n=" << n << " at " << w.to_string();
    }
  }
  // n = 2: the two values are +-1/4.
  const FunctionalTable F2 = to_table(j2_example_model(2), ChaosExpansion::integral(j2_example_kernel(2)));
  for (std::size_t s = 0; s < 4; ++s) EXPECT_NEAR(std::abs(F2[s]), 0.25, 1e-15);
}

TEST(Integral, ShiftedBernoulliExpressionIsPositiveInteger) {
  // (B_1 - n) sum_{i>=2} (B_i - n) is a strictly positive integer, but its law
  // is not that of the order-2 example integral.
  for (int n = 2; n <= 6; ++n) {
    const SampleSpace space(j2_example_model(n));
    const FunctionalTable G = FunctionalTable::from_outcomes(n, [&](const Outcome& w) {
      auto b = [&](int k) { return (w[k] + 1) / 2.0; };
      double tail = 0.0;
      for (int i = 2; i <= n; ++i) tail += b(i) - n;
      return (b(1) - n) * tail;
    });
    const DistributionTable d = distribution(space, G);
    EXPECT_GE(d.min_support(), 1);
    const FunctionalTable F = to_table(space.model(), ChaosExpansion::integral(j2_example_kernel(n)));
    EXPECT_GT(max_pointwise_gap(F, G), 1.0);
  }
}

TEST(Expansion, MeanAndVarianceByEnumeration) {
  Rng rng(43);
  for (int t = 0; t < 20; ++t) {
    const int n = rng.uniform_int(1, 8);
    const ProbabilityModel m = random_model(rng, n);
    const SampleSpace s(m);
    const ChaosExpansion F = random_expansion(rng, n, 3, 5);
    const FunctionalTable table = to_table(m, F);
    EXPECT_NEAR(expectation(s, table), F.mean(), 1e-12);
    EXPECT_NEAR(variance(s, table), chaos_variance(F), 1e-11);
  }
  const ChaosExpansion c(3.5);
  const FunctionalTable t = to_table(ProbabilityModel({0.3, 0.3}), c);
  for (std::size_t i = 0; i < t.size(); ++i) EXPECT_EQ(t[i], 3.5);
}

TEST(Decompose, ConstantAndProductExamples) {
  const ProbabilityModel m({0.3, 0.65, 0.1});
  const ChaosExpansion c = decompose(m, FunctionalTable::constant(3, 2.0));
  EXPECT_NEAR(c.mean(), 2.0, 1e-15);
  for (const auto& [n, f] : c.kernels()) {
    for (const auto& [idx, v] : f.coefficients()) EXPECT_NEAR(v, 0.0, 1e-15);
  }
  const FunctionalTable y1y2 = FunctionalTable::from_outcomes(3, [&](const Outcome& w) {
    return standardized_value(m, 1, w) * standardized_value(m, 2, w);
  });
  const ChaosExpansion d = decompose(m, y1y2);
  ASSERT_NE(d.kernel(2), nullptr);
  EXPECT_NEAR((*d.kernel(2))({1, 2}), 0.5, 1e-14);
  EXPECT_NEAR(d.mean(), 0.0, 1e-15);
}

TEST(Decompose, BernoulliSumHasLinearChaos) {
  const std::vector<double> p{0.1, 0.45, 0.8, 0.33};
  const ProbabilityModel m(p);
  const FunctionalTable F =
      FunctionalTable::from_masks(4, [](std::uint64_t s) { return static_cast<double>(popcount(s)); });
  const ChaosExpansion d = decompose(m, F);
  EXPECT_NEAR(d.mean(), 0.1 + 0.45 + 0.8 + 0.33, 1e-14);
  ASSERT_NE(d.kernel(1), nullptr);
  for (int k = 1; k <= 4; ++k) EXPECT_NEAR((*d.kernel(1))({k}), m.sigma(k), 1e-14);
  for (const auto& [n, f] : d.kernels()) {
    if (n == 1) continue;
    for (const auto& [idx, v] : f.coefficients()) EXPECT_NEAR(v, 0.0, 1e-14);
  }
}

TEST(Decompose, InvertsTabulationCoefficientwise) {
  Rng rng(47);
  for (int t = 0; t < 20; ++t) {
    const int n = rng.uniform_int(1, 9);
    const ProbabilityModel m = random_model(rng, n);
    const ChaosExpansion F = random_expansion(rng, n, std::min(n, 4), 6);
    const ChaosExpansion G = decompose(m, to_table(m, F));
    EXPECT_NEAR(G.mean(), F.mean(), 1e-9);
    for (int order = 1; order <= n; ++order) {
      const Kernel* a = F.kernel(order);
      const Kernel* b = G.kernel(order);
      auto coef = [](const Kernel* k, const Index& idx) { return k ? (*k)(idx) : 0.0; };
      std::set<Index> keys;
      if (a) for (const auto& [idx, v] : a->coefficients()) keys.insert(idx);
      if (b) for (const auto& [idx, v] : b->coefficients()) keys.insert(idx);
      for (const Index& idx : keys) EXPECT_NEAR(coef(a, idx), coef(b, idx), 1e-9);
    }
  }
}

TEST(Decompose, SingleChaosStaysInItsOrder) {
  Rng rng(53);
  const ProbabilityModel m = random_model(rng, 7);
  for (int order = 1; order <= 4; ++order) {
    const Kernel f = random_kernel(rng, order, 7, 6);
    const ChaosExpansion d = decompose(m, to_table(m, ChaosExpansion::integral(f)));
    for (const auto& [n, g] : d.kernels()) {
      for (const auto& [idx, v] : g.coefficients()) {
        EXPECT_NEAR(v, n == order ? f(idx) : 0.0, 1e-12);
      }
    }
  }
}

TEST(Decompose, RejectsMismatchedTable) {
  EXPECT_EQ(code_of([] { (void)decompose(ProbabilityModel({0.5, 0.5}), FunctionalTable::constant(3, 1.0)); }),
            ErrorCode::length_mismatch);
}

TEST(Product, PointwiseIdentityOnRandomPairs) {
  Rng rng(59);
  for (int t = 0; t < 60; ++t) {
    const int n = rng.uniform_int(1, 8);
    const ProbabilityModel m = random_model(rng, n);
    const Kernel f = random_kernel(rng, rng.uniform_int(1, std::min(3, n)), n, 4);
    const Kernel g = random_kernel(rng, rng.uniform_int(1, std::min(3, n)), n, 4);
    const FunctionalTable lhs = to_table(m, multiply(m, f, g));
    for (std::uint64_t s = 0; s < lhs.size(); ++s) {
      const Outcome w = Outcome::from_mask(s, n);
      EXPECT_NEAR(lhs[s], oracle::integral_dense(m, f, w) * oracle::integral_dense(m, g, w), 1e-10);
    }
  }
}

TEST(Product, SquareOfStandardizedCoordinate) {
  const ProbabilityModel m({0.2, 0.7});
  for (int k = 1; k <= 2; ++k) {
    const ChaosExpansion sq = multiply(m, Kernel::indicator(k), Kernel::indicator(k));
    EXPECT_NEAR(sq.mean(), 1.0, 1e-15);
    ASSERT_NE(sq.kernel(1), nullptr);
    EXPECT_NEAR((*sq.kernel(1))({k}), m.phi(k), 1e-14);
    EXPECT_EQ(sq.kernel(2), nullptr);
  }
}

TEST(Product, SymmetricModelUsesOnlyFullySummedTerms) {
  Rng rng(61);
  const ProbabilityModel m(std::vector<double>(6, 0.5));
  for (int t = 0; t < 30; ++t) {
    const int a = rng.uniform_int(1, 3), b = rng.uniform_int(1, 3);
    const Kernel f = random_kernel(rng, a, 6, 4), g = random_kernel(rng, b, 6, 4);
    ChaosExpansion reduced;
    for (int r = 0; r <= std::min(a, b); ++r) {
      reduced.add((factorial(r) * binomial(a, r) * binomial(b, r)) * to_kernel(contract(f, g, r, r)));
    }
    EXPECT_EQ(multiply(m, f, g), reduced);
  }
}

TEST(Product, ScalarFactorsScale) {
  const ProbabilityModel m({0.4, 0.3});
  const Kernel f = Kernel::from_pairs(1, {{{1}, 2.0}});
  const ChaosExpansion p = multiply(m, Kernel::scalar(3.0), f);
  ASSERT_NE(p.kernel(1), nullptr);
  EXPECT_EQ((*p.kernel(1))({1}), 6.0);
  EXPECT_EQ(code_of([&] { (void)multiply(m, Kernel::indicator(3), f); }), ErrorCode::index_out_of_range);
}

TEST(Covariance, IsometryAndOrthogonality) {
  Rng rng(67);
  for (int t = 0; t < 30; ++t) {
    const int n = rng.uniform_int(2, 8);
    const ProbabilityModel m = random_model(rng, n);
    const int a = rng.uniform_int(1, std::min(3, n)), b = t % 3 ? a : rng.uniform_int(1, std::min(3, n));
    const Kernel f = random_kernel(rng, a, n, 5), g = random_kernel(rng, b, n, 5);
    const double e = oracle::expect(m, [&](const Outcome& w) {
      return integral_value(m, f, w) * integral_value(m, g, w);
    });
    EXPECT_NEAR(covariance(f, g), e, 1e-10);
    if (a != b) {
      EXPECT_EQ(covariance(f, g), 0.0);
    } else {
      EXPECT_NEAR(covariance(f, f), factorial(a) * norm_squared(f), 1e-14);
    }
  }
}

TEST(Covariance, ExampleVariance) {
  for (int n = 2; n <= 20; ++n) {
    const Kernel f = j2_example_kernel(n);
    const double nd = n;
    EXPECT_NEAR(covariance(f, f), std::pow(nd - 1, 3) / std::pow(nd, 4), 1e-15);
  }
}
