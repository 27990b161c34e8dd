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

// Finitely supported kernels on N^n and their contractions.
//
// A Kernel is a symmetric function vanishing on diagonals, stored once per
// strictly increasing index tuple. A RawTensor is an arbitrary finitely
// supported function on N^n; contractions produce RawTensors, and
// to_kernel() maps them back through symmetrization and the off-diagonal
// mask. Norms are taken over all of N^n, so a Kernel's norm counts each
// stored coefficient n! times.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "mcstein/error.hpp"
#include "mcstein/model.hpp"
#include "mcstein/numeric.hpp"

namespace mcstein {

/// 1-based index tuple.
using Index = std::vector<int>;

inline bool strictly_increasing(const Index& idx) {
  for (std::size_t i = 1; i < idx.size(); ++i) {
    if (idx[i - 1] >= idx[i]) return false;
  }
  return true;
}

inline bool has_repeat_sorted(const Index& sorted) {
  return std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end();
}

inline std::string index_string(const Index& idx) {
  std::string s = "(";
  for (std::size_t i = 0; i < idx.size(); ++i) {
    if (i) s += ',';
    s += std::to_string(idx[i]);
  }
  return s + ")";
}

class RawTensor {
 public:
  explicit RawTensor(int order = 0) : order_(order) {
    if (order < 0) fail(ErrorCode::invalid_argument, "negative tensor order");
  }

  int order() const noexcept { return order_; }
  bool empty() const noexcept { return entries_.empty(); }
  std::size_t size() const noexcept { return entries_.size(); }
  const std::map<Index, double>& entries() const noexcept { return entries_; }

  /// Accumulates `value` at `idx`; entries that become exactly zero are erased.
  void add(const Index& idx, double value) {
    if (static_cast<int>(idx.size()) != order_) {
      fail(ErrorCode::order_mismatch, "index " + index_string(idx) + " for order " +
                                          std::to_string(order_));
    }
    if (value == 0.0) return;
    auto [it, inserted] = entries_.try_emplace(idx, value);
    if (!inserted) {
      it->second += value;
      if (it->second == 0.0) entries_.erase(it);
    }
  }

  double at(const Index& idx) const {
    auto it = entries_.find(idx);
    return it == entries_.end() ? 0.0 : it->second;
  }

  RawTensor scaled(double c) const {
    RawTensor out(order_);
    for (const auto& [idx, v] : entries_) out.add(idx, c * v);
    return out;
  }

  friend RawTensor operator+(const RawTensor& a, const RawTensor& b) {
    if (a.order_ != b.order_) fail(ErrorCode::order_mismatch, "adding tensors of different order");
    RawTensor out = a;
    for (const auto& [idx, v] : b.entries_) out.add(idx, v);
    return out;
  }

  friend bool operator==(const RawTensor&, const RawTensor&) = default;

 private:
  int order_;
  std::map<Index, double> entries_;
};

class Kernel {
 public:
  Kernel() = default;
  explicit Kernel(int order) : order_(order) {
    if (order < 0) fail(ErrorCode::invalid_argument, "negative kernel order");
  }

  static Kernel scalar(double c) {
    Kernel k(0);
    k.add({}, c);
    return k;
  }

  /// e_k: order 1, value 1 at k.
  static Kernel indicator(int k) {
    Kernel out(1);
    out.add({k}, 1.0);
    return out;
  }

  /// Builds a kernel from (strictly increasing tuple, coefficient) pairs.
  static Kernel from_pairs(int order, const std::vector<std::pair<Index, double>>& pairs) {
    Kernel out(order);
    for (const auto& [idx, c] : pairs) {
      if (static_cast<int>(idx.size()) != order) {
        fail(ErrorCode::order_mismatch, "tuple " + index_string(idx) + " in an order-" +
                                            std::to_string(order) + " kernel");
      }
      if (!strictly_increasing(idx) || (!idx.empty() && idx.front() < 1)) {
        fail(ErrorCode::invalid_argument,
             "kernel tuple " + index_string(idx) + " must be strictly increasing and 1-based");
      }
      if (out.coefficients_.count(idx) != 0) {
        fail(ErrorCode::invalid_argument, "duplicate kernel tuple " + index_string(idx));
      }
      if (!std::isfinite(c)) fail(ErrorCode::invalid_argument, "non-finite kernel coefficient");
      if (c != 0.0) out.coefficients_.emplace(idx, c);
    }
    return out;
  }

  int order() const noexcept { return order_; }
  bool empty() const noexcept { return coefficients_.empty(); }
  std::size_t size() const noexcept { return coefficients_.size(); }
  const std::map<Index, double>& coefficients() const noexcept { return coefficients_; }

  /// Value at an arbitrary tuple: symmetric, zero on diagonals.
  double operator()(Index idx) const {
    if (static_cast<int>(idx.size()) != order_) {
      fail(ErrorCode::order_mismatch, "evaluating order-" + std::to_string(order_) +
                                          " kernel at " + index_string(idx));
    }
    std::sort(idx.begin(), idx.end());
    if (has_repeat_sorted(idx)) return 0.0;
    auto it = coefficients_.find(idx);
    return it == coefficients_.end() ? 0.0 : it->second;
  }

  double scalar_value() const {
    if (order_ != 0) fail(ErrorCode::order_mismatch, "scalar value of a non-scalar kernel");
    return empty() ? 0.0 : coefficients_.begin()->second;
  }

  int max_index() const {
    int m = 0;
    for (const auto& [idx, c] : coefficients_) {
      if (!idx.empty()) m = std::max(m, idx.back());
    }
    return m;
  }

  /// Accumulates at a strictly increasing tuple.
  void add(const Index& increasing, double value) {
    if (value == 0.0) return;
    auto [it, inserted] = coefficients_.try_emplace(increasing, value);
    if (!inserted) {
      it->second += value;
      if (it->second == 0.0) coefficients_.erase(it);
    }
  }

  friend Kernel operator+(const Kernel& a, const Kernel& b) {
    if (a.order_ != b.order_) fail(ErrorCode::order_mismatch, "adding kernels of different order");
    Kernel out = a;
    for (const auto& [idx, c] : b.coefficients_) out.add(idx, c);
    return out;
  }

  friend Kernel operator*(double s, const Kernel& a) {
    Kernel out(a.order_);
    for (const auto& [idx, c] : a.coefficients_) out.add(idx, s * c);
    return out;
  }

  friend bool operator==(const Kernel&, const Kernel&) = default;

 private:
  int order_ = 0;
  std::map<Index, double> coefficients_;
};

inline void require_indices_within(const Kernel& f, int n) {
  if (f.max_index() > n) {
    fail(ErrorCode::index_out_of_range, "kernel index " + std::to_string(f.max_index()) +
                                            " exceeds model size " + std::to_string(n));
  }
}

/// All n! permuted copies of every stored coefficient.
inline RawTensor kernel_as_raw(const Kernel& f) {
  RawTensor out(f.order());
  for (const auto& [idx, c] : f.coefficients()) {
    Index perm = idx;
    do {
      out.add(perm, c);
    } while (std::next_permutation(perm.begin(), perm.end()));
  }
  return out;
}

namespace detail {

struct Entry {
  Index index;
  double value;
};

// Expanded entries of `f` grouped by their last r coordinates.
inline std::map<Index, std::vector<Entry>> group_by_tail(const Kernel& f, int r) {
  std::map<Index, std::vector<Entry>> groups;
  const int head = f.order() - r;
  for (const auto& [idx, c] : f.coefficients()) {
    Index perm = idx;
    do {
      Index tail(perm.begin() + head, perm.end());
      groups[std::move(tail)].push_back({Index(perm.begin(), perm.begin() + head), c});
    } while (std::next_permutation(perm.begin(), perm.end()));
  }
  return groups;
}

inline void check_contraction(const Kernel& f, const Kernel& g, int r, int l) {
  if (r < 0 || l < 0 || l > r || r > std::min(f.order(), g.order())) {
    fail(ErrorCode::invalid_contraction_indices,
         "r = " + std::to_string(r) + ", l = " + std::to_string(l) + " for orders " +
             std::to_string(f.order()) + " and " + std::to_string(g.order()));
  }
}

}  // namespace detail

/// f star_r^l g: identify r variables of f with r variables of g and sum the
/// last l of them. Output coordinates are ordered
/// (free of f, identified-but-not-summed, free of g).
inline RawTensor contract(const Kernel& f, const Kernel& g, int r, int l) {
  detail::check_contraction(f, g, r, l);
  const int kept = r - l;
  RawTensor out(f.order() + g.order() - r - l);
  const auto fg = detail::group_by_tail(f, r);
  const auto gg = detail::group_by_tail(g, r);
  for (const auto& [key, fs] : fg) {
    auto it = gg.find(key);
    if (it == gg.end()) continue;
    for (const auto& fe : fs) {
      for (const auto& ge : it->second) {
        Index idx = fe.index;
        idx.insert(idx.end(), key.begin(), key.begin() + kept);
        idx.insert(idx.end(), ge.index.begin(), ge.index.end());
        out.add(idx, fe.value * ge.value);
      }
    }
  }
  return out;
}

/// phi^{*(r-l)}(f star_r^l g): the contraction multiplied by phi at each
/// identified-but-not-summed coordinate. For l = r it is the plain contraction.
inline RawTensor weighted_contract(const ProbabilityModel& model, const Kernel& f,
                                   const Kernel& g, int r, int l) {
  RawTensor plain = contract(f, g, r, l);
  if (l == r) return plain;
  const int begin = f.order() - r;
  const int end = begin + (r - l);
  RawTensor out(plain.order());
  for (const auto& [idx, v] : plain.entries()) {
    double w = v;
    for (int i = begin; i < end; ++i) w *= model.phi(idx[static_cast<std::size_t>(i)]);
    out.add(idx, w);
  }
  return out;
}

/// Canonical symmetrization (1/n!) sum over permutations.
inline RawTensor symmetrize(const RawTensor& t) {
  const int n = t.order();
  std::map<Index, long double> groups;
  for (const auto& [idx, v] : t.entries()) {
    Index key = idx;
    std::sort(key.begin(), key.end());
    groups[std::move(key)] += v;
  }
  const long double nfact = factorial(n);
  RawTensor out(n);
  for (const auto& [key, sum] : groups) {
    // Each distinct arrangement of a multiset occurs prod(mult!) times among
    // the n! permutations.
    long double multiplicity = 1.0L;
    for (std::size_t i = 0; i < key.size();) {
      std::size_t j = i;
      while (j < key.size() && key[j] == key[i]) ++j;
      multiplicity *= factorial(static_cast<int>(j - i));
      i = j;
    }
    const double value = static_cast<double>(sum * multiplicity / nfact);
    Index perm = key;
    do {
      out.add(perm, value);
    } while (std::next_permutation(perm.begin(), perm.end()));
  }
  return out;
}

/// Restriction to the off-diagonal set Delta_n without symmetrizing.
inline RawTensor mask_diagonal(const RawTensor& t) {
  RawTensor out(t.order());
  for (const auto& [idx, v] : t.entries()) {
    Index key = idx;
    std::sort(key.begin(), key.end());
    if (!has_repeat_sorted(key)) out.add(idx, v);
  }
  return out;
}

/// Symmetrization followed by the off-diagonal mask, stored canonically.
inline Kernel to_kernel(const RawTensor& t) {
  const int n = t.order();
  std::map<Index, long double> groups;
  for (const auto& [idx, v] : t.entries()) {
    Index key = idx;
    std::sort(key.begin(), key.end());
    if (has_repeat_sorted(key)) continue;
    groups[std::move(key)] += v;
  }
  const long double nfact = factorial(n);
  Kernel out(n);
  for (const auto& [key, sum] : groups) out.add(key, static_cast<double>(sum / nfact));
  return out;
}

inline double norm_squared(const RawTensor& t) {
  CompensatedSum s;
  for (const auto& [idx, v] : t.entries()) s.add(v * v);
  return s.value();
}

inline double norm(const RawTensor& t) { return std::sqrt(norm_squared(t)); }

inline double norm_squared(const Kernel& f) {
  CompensatedSum s;
  for (const auto& [idx, c] : f.coefficients()) s.add(c * c);
  return factorial(f.order()) * s.value();
}

inline double norm(const Kernel& f) { return std::sqrt(norm_squared(f)); }

inline double inner_product(const Kernel& f, const Kernel& g) {
  if (f.order() != g.order()) {
    fail(ErrorCode::order_mismatch, "inner product of orders " + std::to_string(f.order()) +
                                        " and " + std::to_string(g.order()));
  }
  CompensatedSum s;
  const auto& gc = g.coefficients();
  for (const auto& [idx, c] : f.coefficients()) {
    auto it = gc.find(idx);
    if (it != gc.end()) s.add(c * it->second);
  }
  return factorial(f.order()) * s.value();
}

/// f(., k): the order n-1 kernel with one argument fixed to k.
inline Kernel slice(const Kernel& f, int k) {
  if (f.order() < 1) fail(ErrorCode::order_mismatch, "cannot slice a scalar kernel");
  if (k < 1) fail(ErrorCode::index_out_of_range, "slice index " + std::to_string(k));
  Kernel out(f.order() - 1);
  for (const auto& [idx, c] : f.coefficients()) {
    auto pos = std::find(idx.begin(), idx.end(), k);
    if (pos == idx.end()) continue;
    Index rest;
    rest.reserve(idx.size() - 1);
    rest.insert(rest.end(), idx.begin(), pos);
    rest.insert(rest.end(), pos + 1, idx.end());
    out.add(rest, c);
  }
  return out;
}

}  // namespace mcstein
