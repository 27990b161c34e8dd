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

#include <algorithm>
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

/// Random kernel with coefficients in (1/8)Z so that every product and sum in
/// a small contraction is exact.
Kernel dyadic_kernel(Rng& rng, int order, int n, int entries) {
  Kernel f(order);
  for (int e = 0; e < entries; ++e) {
    f.add(random_tuple(rng, order, n), rng.uniform_int(-8, 8) / 8.0);
  }
  return f;
}

double dense_norm_squared(const Kernel& f, int n) {
  double s = 0.0;
  oracle::for_each_tuple(n, f.order(), [&](const Index& t) { s += f(t) * f(t); });
  return s;
}

}  // namespace

TEST(Kernel, LiteralValidation) {
  EXPECT_EQ(code_of([] { (void)Kernel::from_pairs(2, {{{2, 1}, 1.0}}); }), ErrorCode::invalid_argument);
  EXPECT_EQ(code_of([] { (void)Kernel::from_pairs(2, {{{1, 1}, 1.0}}); }), ErrorCode::invalid_argument);
  EXPECT_EQ(code_of([] { (void)Kernel::from_pairs(2, {{{0, 1}, 1.0}}); }), ErrorCode::invalid_argument);
  EXPECT_EQ(code_of([] { (void)Kernel::from_pairs(2, {{{1, 2, 3}, 1.0}}); }), ErrorCode::order_mismatch);
  EXPECT_EQ(code_of([] { (void)Kernel::from_pairs(1, {{{1}, 1.0}, {{1}, 2.0}}); }),
            ErrorCode::invalid_argument);
  const Kernel f = Kernel::from_pairs(2, {{{1, 3}, 0.0}, {{2, 3}, 0.5}});
  EXPECT_EQ(f.coefficients().size(), 1u);
}

TEST(Kernel, EvaluatesSymmetricallyAndVanishesOnDiagonals) {
  const Kernel f = Kernel::from_pairs(3, {{{1, 2, 4}, 0.75}});
  EXPECT_EQ(f({4, 1, 2}), 0.75);
  EXPECT_EQ(f({2, 4, 1}), 0.75);
  EXPECT_EQ(f({1, 1, 2}), 0.0);
  EXPECT_EQ(f({1, 2, 3}), 0.0);
  EXPECT_EQ(f.max_index(), 4);
}

TEST(Kernel, NormCountsEveryPermutation) {
  Rng rng(3);
  for (int t = 0; t < 20; ++t) {
    const int order = rng.uniform_int(1, 3), n = rng.uniform_int(order, 6);
    const Kernel f = random_kernel(rng, order, n, 5);
    EXPECT_NEAR(norm_squared(f), dense_norm_squared(f, n), 1e-13);
    EXPECT_NEAR(inner_product(f, f), norm_squared(f), 1e-13);
  }
  EXPECT_EQ(code_of([] { (void)inner_product(Kernel(1), Kernel(2)); }), ErrorCode::order_mismatch);
}

TEST(Kernel, ExampleKernelNormsMatchClosedForms) {
  for (int n = 2; n <= 12; ++n) {
    const double nd = n;
    const Kernel f = j2_example_kernel(n);
    EXPECT_NEAR(2.0 * norm_squared(f), std::pow(nd - 1, 3) / std::pow(nd, 4), 1e-15);
    for (int k = 1; k <= n; ++k) {
      const double s = norm_squared(slice(f, k));
      const double expected = std::pow(nd - 1, 4) / (16 * std::pow(nd, 8)) *
                              (k == 1 ? (nd - 1) * (nd - 1) : 1.0);
      EXPECT_NEAR(s * s, expected, 1e-15);
    }
  }
}

TEST(Kernel, SliceOutsideSupportIsEmpty) {
  const Kernel f = Kernel::from_pairs(2, {{{1, 2}, 1.0}});
  EXPECT_TRUE(slice(f, 5).empty());
  EXPECT_EQ(slice(f, 2)({1}), 1.0);
  EXPECT_EQ(code_of([&] { (void)slice(f, 0); }), ErrorCode::index_out_of_range);
  EXPECT_EQ(code_of([] { (void)slice(Kernel::scalar(1.0), 1); }), ErrorCode::order_mismatch);
}

TEST(Contraction, MatchesDenseNestedLoopsExactly) {
  Rng rng(17);
  int checked = 0;
  for (int t = 0; t < 60; ++t) {
    const int n = rng.uniform_int(1, 3), m = rng.uniform_int(1, 3);
    const int coords = rng.uniform_int(std::max(n, m), 6);
    const Kernel f = dyadic_kernel(rng, n, coords, 4), g = dyadic_kernel(rng, m, coords, 4);
    for (int r = 0; r <= std::min(n, m); ++r) {
      for (int l = 0; l <= r; ++l) {
        const RawTensor c = contract(f, g, r, l);
        EXPECT_EQ(c.order(), n + m - r - l);
        oracle::for_each_tuple(coords, n + m - r - l, [&](const Index& pt) {
          ASSERT_EQ(c.at(pt), oracle::contraction_at(f, g, r, l, pt, coords))
              << "r=" << r << " l=" << l << " at " << index_string(pt);
        });
        ++checked;
      }
    }
  }
  EXPECT_GT(checked, 100);
}

TEST(Contraction, WeightedVersionMultipliesByPhiOverTheUnsummedBlock) {
  Rng rng(19);
  for (int t = 0; t < 30; ++t) {
    const int coords = rng.uniform_int(3, 5);
    const ProbabilityModel model = random_model(rng, coords);
    const int n = rng.uniform_int(1, 3), m = rng.uniform_int(1, 3);
    const Kernel f = random_kernel(rng, n, coords, 4), g = random_kernel(rng, m, coords, 4);
    for (int r = 1; r <= std::min(n, m); ++r) {
      for (int l = 0; l <= r; ++l) {
        const RawTensor w = weighted_contract(model, f, g, r, l);
        oracle::for_each_tuple(coords, n + m - r - l, [&](const Index& pt) {
          const double expected = oracle::contraction_at(f, g, r, l, pt, coords) *
                                  oracle::weight_at(model, f, r, l, pt);
          ASSERT_NEAR(w.at(pt), expected, 1e-13);
        });
      }
    }
  }
}

TEST(Contraction, ExampleValues) {
  const Kernel f = j2_example_kernel(3);
  EXPECT_DOUBLE_EQ(f({2, 1}), 1.0 / 9.0);
  const RawTensor c = contract(f, f, 2, 1);
  EXPECT_NEAR(c.at({1}), 2.0 / 81.0, 1e-17);
  EXPECT_NEAR(c.at({2}), 1.0 / 81.0, 1e-17);
  EXPECT_NEAR(c.at({3}), 1.0 / 81.0, 1e-17);
  for (int n = 2; n <= 15; ++n) {
    const double nd = n;
    const ProbabilityModel model = j2_example_model(n);
    const Kernel fn = j2_example_kernel(n);
    EXPECT_NEAR(norm_squared(weighted_contract(model, fn, fn, 2, 1)),
                std::pow(nd - 1, 4) * std::pow(nd - 2, 2) / (16 * std::pow(nd, 7)), 1e-15);
    const Kernel f1 = slice(fn, 1);
    EXPECT_NEAR(norm_squared(to_kernel(contract(f1, f1, 0, 0))) ,
                std::pow(nd - 1, 5) * (nd - 2) / (16 * std::pow(nd, 8)), 1e-15);
    EXPECT_NEAR(norm_squared(mask_diagonal(contract(f1, f1, 0, 0))),
                std::pow(nd - 1, 5) * (nd - 2) / (16 * std::pow(nd, 8)), 1e-15);
  }
}

TEST(Contraction, TensorProductAndUnitScalar) {
  const Kernel f = Kernel::from_pairs(2, {{{1, 2}, 2.0}, {{2, 3}, -1.0}});
  const RawTensor t = contract(f, Kernel::scalar(1.0), 0, 0);
  EXPECT_EQ(to_kernel(t), f);
  const Kernel g = Kernel::indicator(3);
  const RawTensor fg = contract(f, g, 0, 0);
  EXPECT_EQ(fg.at({1, 2, 3}), 2.0);
  EXPECT_EQ(fg.at({2, 1, 3}), 2.0);
  EXPECT_EQ(fg.at({3, 2, 3}), -1.0);
  EXPECT_TRUE(contract(f, Kernel(2), 1, 1).empty());
}

TEST(Contraction, RejectsInvalidIndexPairs) {
  const Kernel f = Kernel::from_pairs(2, {{{1, 2}, 1.0}});
  const Kernel g = Kernel::indicator(1);
  EXPECT_EQ(code_of([&] { (void)contract(f, g, 2, 0); }), ErrorCode::invalid_contraction_indices);
  EXPECT_EQ(code_of([&] { (void)contract(f, f, 1, 2); }), ErrorCode::invalid_contraction_indices);
  EXPECT_EQ(code_of([&] { (void)contract(f, f, -1, 0); }), ErrorCode::invalid_contraction_indices);
}

TEST(Contraction, NormIsBoundedByProductOfNorms) {
  Rng rng(23);
  for (int t = 0; t < 100; ++t) {
    const int coords = rng.uniform_int(3, 8);
    const int n = rng.uniform_int(1, 3), m = rng.uniform_int(1, 3);
    const Kernel f = random_kernel(rng, n, coords, 6), g = random_kernel(rng, m, coords, 6);
    for (int r = 0; r <= std::min(n, m); ++r) {
      for (int l = 0; l <= r; ++l) {
        EXPECT_LE(norm(contract(f, g, r, l)), norm(f) * norm(g) + 1e-12);
      }
    }
  }
}

TEST(Contraction, SymmetricModelKillsWeightedTerms) {
  Rng rng(29);
  const ProbabilityModel model(std::vector<double>(6, 0.5));
  for (int t = 0; t < 40; ++t) {
    const int n = rng.uniform_int(1, 3), m = rng.uniform_int(1, 3);
    const Kernel f = random_kernel(rng, n, 6, 5), g = random_kernel(rng, m, 6, 5);
    for (int r = 1; r <= std::min(n, m); ++r) {
      for (int l = 0; l < r; ++l) EXPECT_TRUE(weighted_contract(model, f, g, r, l).empty());
      EXPECT_EQ(weighted_contract(model, f, g, r, r), contract(f, g, r, r));
    }
  }
}

TEST(Symmetrize, AveragesOverPermutations) {
  RawTensor t(2);
  t.add({1, 2}, 1.0);
  const RawTensor s = symmetrize(t);
  EXPECT_EQ(s.at({1, 2}), 0.5);
  EXPECT_EQ(s.at({2, 1}), 0.5);
  EXPECT_EQ(s.size(), 2u);
}

TEST(Symmetrize, IsANormNonIncreasingProjection) {
  Rng rng(31);
  for (int t = 0; t < 50; ++t) {
    const int order = rng.uniform_int(1, 4);
    RawTensor raw(order);
    for (int e = 0; e < 6; ++e) {
      Index idx;
      for (int i = 0; i < order; ++i) idx.push_back(rng.uniform_int(1, 4));
      raw.add(idx, rng.uniform(-1.0, 1.0));
    }
    const RawTensor s = symmetrize(raw);
    EXPECT_LE(norm(s), norm(raw) + 1e-14);
    const RawTensor ss = symmetrize(s);
    for (const auto& [idx, v] : ss.entries()) EXPECT_NEAR(v, s.at(idx), 1e-15);
    for (const auto& [idx, v] : s.entries()) {
      Index perm = idx;
      std::reverse(perm.begin(), perm.end());
      EXPECT_NEAR(s.at(perm), v, 1e-15);
    }
  }
}

TEST(ToKernel, DropsDiagonalsAndRoundTrips) {
  RawTensor diag(2);
  diag.add({1, 1}, 3.0);
  diag.add({2, 2}, -1.0);
  EXPECT_TRUE(to_kernel(diag).empty());
  Rng rng(37);
  for (int t = 0; t < 30; ++t) {
    const int order = rng.uniform_int(0, 4);
    const Kernel f = random_kernel(rng, order, 6, 5);
    EXPECT_EQ(to_kernel(kernel_as_raw(f)), f);
  }
}
