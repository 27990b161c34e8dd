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

// Dense transforms between a functional table and its coefficients in the
// orthonormal product basis {prod_{k in S} Y_k}, S ranging over subsets of
// {1..N} encoded as bitmasks. Both directions cost O(N 2^N).

#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "mcstein/model.hpp"
#include "mcstein/numeric.hpp"

namespace mcstein {

/// c[S] = E[F prod_{k in S} Y_k].
inline std::vector<double> forward_transform(const ProbabilityModel& model,
                                             const FunctionalTable& f) {
  if (f.dimension() != model.size()) fail(ErrorCode::length_mismatch, "table/model size");
  std::vector<double> a = f.values();
  for (int k = 0; k < model.size(); ++k) {
    const std::size_t bit = std::size_t{1} << k;
    const double p = model.p(k + 1), q = model.q(k + 1), s = model.sigma(k + 1);
    for (std::size_t m = 0; m < a.size(); ++m) {
      if (m & bit) continue;
      const double lo = a[m], hi = a[m | bit];
      a[m] = q * lo + p * hi;
      a[m | bit] = s * (hi - lo);
    }
  }
  return a;
}

/// F = sum_S c[S] prod_{k in S} Y_k.
inline FunctionalTable inverse_transform(const ProbabilityModel& model,
                                         std::vector<double> c) {
  if (c.size() != (std::size_t{1} << model.size())) {
    fail(ErrorCode::length_mismatch, "coefficient vector size");
  }
  for (int k = 0; k < model.size(); ++k) {
    const std::size_t bit = std::size_t{1} << k;
    const double s = model.sigma(k + 1);
    const double y_minus = -s / model.q(k + 1), y_plus = s / model.p(k + 1);
    for (std::size_t m = 0; m < c.size(); ++m) {
      if (m & bit) continue;
      const double lo = c[m], hi = c[m | bit];
      c[m] = lo + y_minus * hi;
      c[m | bit] = lo + y_plus * hi;
    }
  }
  return FunctionalTable(model.size(), std::move(c));
}

}  // namespace mcstein
