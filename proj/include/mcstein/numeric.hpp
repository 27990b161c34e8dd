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

#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

#include "mcstein/error.hpp"

namespace mcstein {

/// Neumaier's variant of Kahan summation. Partial sums from disjoint ranges
/// are merged with `add(const CompensatedSum&)`, which keeps the compensation
/// term of both operands.
class CompensatedSum {
 public:
  void add(double x) noexcept {
    const double t = sum_ + x;
    if (std::fabs(sum_) >= std::fabs(x)) {
      compensation_ += (sum_ - t) + x;
    } else {
      compensation_ += (x - t) + sum_;
    }
    sum_ = t;
  }

  void add(const CompensatedSum& other) noexcept {
    add(other.sum_);
    add(other.compensation_);
  }

  double value() const noexcept { return sum_ + compensation_; }

 private:
  double sum_ = 0.0;
  double compensation_ = 0.0;
};

inline double factorial(int n) {
  if (n < 0) fail(ErrorCode::invalid_argument, "factorial of negative number");
  double r = 1.0;
  for (int i = 2; i <= n; ++i) r *= i;
  return r;
}

inline double binomial(int n, int k) {
  if (k < 0 || k > n) return 0.0;
  k = k < n - k ? k : n - k;
  double r = 1.0;
  for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
  return std::round(r);
}

inline double compensated_sum(const std::vector<double>& xs) {
  CompensatedSum s;
  for (double x : xs) s.add(x);
  return s.value();
}

/// Nearest integer if `x` lies within `tolerance` of one.
inline bool near_integer(double x, double tolerance, long long* rounded = nullptr) {
  if (!std::isfinite(x)) return false;
  const double r = std::round(x);
  if (std::fabs(x - r) > tolerance) return false;
  if (rounded != nullptr) *rounded = static_cast<long long>(r);
  return true;
}

inline int popcount(std::uint64_t x) noexcept { return __builtin_popcountll(x); }

}  // namespace mcstein
