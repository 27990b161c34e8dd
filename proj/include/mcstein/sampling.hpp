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

// Seeded random models, kernels, expansions and tables.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <vector>

#include "mcstein/chaos.hpp"
#include "mcstein/kernel.hpp"
#include "mcstein/model.hpp"
#include "mcstein/random.hpp"

namespace mcstein {

inline ProbabilityModel random_model(Rng& rng, int n, double lo = 0.05, double hi = 0.95) {
  std::vector<double> p(static_cast<std::size_t>(n));
  for (auto& x : p) x = rng.uniform(lo, hi);
  return ProbabilityModel(std::move(p));
}

/// `order` distinct coordinates from 1..n, sorted.
inline Index random_tuple(Rng& rng, int order, int n) {
  std::vector<int> pool(static_cast<std::size_t>(n));
  std::iota(pool.begin(), pool.end(), 1);
  for (int i = 0; i < order; ++i) {
    const int j = rng.uniform_int(i, n - 1);
    std::swap(pool[static_cast<std::size_t>(i)], pool[static_cast<std::size_t>(j)]);
  }
  Index idx(pool.begin(), pool.begin() + order);
  std::sort(idx.begin(), idx.end());
  return idx;
}

/// A kernel of the given order on coordinates 1..n with up to `entries`
/// nonzero coefficients uniform in (-1, 1).
inline Kernel random_kernel(Rng& rng, int order, int n, int entries) {
  Kernel f(order);
  if (order == 0) return Kernel::scalar(rng.uniform(-1.0, 1.0));
  if (order > n) return f;
  for (int e = 0; e < entries; ++e) f.add(random_tuple(rng, order, n), rng.uniform(-1.0, 1.0));
  return f;
}

inline ChaosExpansion random_expansion(Rng& rng, int n, int max_order, int entries) {
  ChaosExpansion F(rng.uniform(-1.0, 1.0));
  for (int order = 1; order <= std::min(max_order, n); ++order) {
    F.add(random_kernel(rng, order, n, entries));
  }
  return F;
}

inline FunctionalTable random_table(Rng& rng, int n) {
  std::vector<double> v(std::size_t{1} << n);
  for (auto& x : v) x = rng.uniform(-1.0, 1.0);
  return FunctionalTable(n, std::move(v));
}

/// Integer values in 0..max_value at every outcome.
inline FunctionalTable random_integer_table(Rng& rng, int n, int max_value) {
  std::vector<double> v(std::size_t{1} << n);
  for (auto& x : v) x = rng.uniform_int(0, max_value);
  return FunctionalTable(n, std::move(v));
}

}  // namespace mcstein
