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

// Finite Rademacher model: success probabilities p_1..p_N, the outcome space
// {-1,+1}^N, exact expectations by enumeration and laws of integer-valued
// functionals. Indices are 1-based in every public signature. Outcomes are
// enumerated by bitmask, bit k-1 set meaning omega_k = +1.

#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "mcstein/error.hpp"
#include "mcstein/numeric.hpp"
#include "mcstein/parallel.hpp"

namespace mcstein {

/// Largest N for which the 2^N outcome space is enumerated.
inline constexpr int kEnumerationCap = 24;

/// Distance to the nearest integer below which a value counts as integral.
inline constexpr double kIntegralityTolerance = 1e-9;

class ProbabilityModel {
 public:
  explicit ProbabilityModel(std::vector<double> p) : p_(std::move(p)) {
    if (p_.empty()) fail(ErrorCode::empty_model, "model needs at least one coordinate");
    q_.resize(p_.size());
    sigma_.resize(p_.size());
    phi_.resize(p_.size());
    for (std::size_t i = 0; i < p_.size(); ++i) {
      const double pk = p_[i];
      if (!(pk > 0.0 && pk < 1.0)) {
        std::ostringstream os;
        os << "p_" << i + 1 << " = " << pk << " is not inside (0,1)";
        fail(ErrorCode::out_of_range_probability, os.str());
      }
      q_[i] = 1.0 - pk;
      sigma_[i] = std::sqrt(pk * q_[i]);
      phi_[i] = (q_[i] - pk) / sigma_[i];
    }
  }

  int size() const noexcept { return static_cast<int>(p_.size()); }

  double p(int k) const { return p_[checked(k)]; }
  double q(int k) const { return q_[checked(k)]; }
  /// sqrt(p_k q_k)
  double sigma(int k) const { return sigma_[checked(k)]; }
  /// (q_k - p_k) / sqrt(p_k q_k)
  double phi(int k) const { return phi_[checked(k)]; }

  const std::vector<double>& success() const noexcept { return p_; }

  bool symmetric() const noexcept {
    for (double pk : p_) {
      if (pk != 0.5) return false;
    }
    return true;
  }

  friend bool operator==(const ProbabilityModel& a, const ProbabilityModel& b) {
    return a.p_ == b.p_;
  }

 private:
  std::size_t checked(int k) const {
    if (k < 1 || k > size()) {
      fail(ErrorCode::index_out_of_range,
           "index " + std::to_string(k) + " outside 1.." + std::to_string(size()));
    }
    return static_cast<std::size_t>(k - 1);
  }

  std::vector<double> p_, q_, sigma_, phi_;
};

inline ProbabilityModel build_model(std::vector<double> p) {
  return ProbabilityModel(std::move(p));
}

/// A realization omega of X_1..X_N.
class Outcome {
 public:
  explicit Outcome(std::vector<int> signs) : signs_(std::move(signs)) {
    for (int s : signs_) {
      if (s != 1 && s != -1) fail(ErrorCode::invalid_argument, "outcome entries must be +1 or -1");
    }
  }

  static Outcome from_mask(std::uint64_t mask, int n) {
    std::vector<int> s(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) s[static_cast<std::size_t>(i)] = (mask >> i) & 1u ? 1 : -1;
    return Outcome(std::move(s));
  }

  int size() const noexcept { return static_cast<int>(signs_.size()); }

  int operator[](int k) const {
    if (k < 1 || k > size()) {
      fail(ErrorCode::index_out_of_range, "outcome index " + std::to_string(k));
    }
    return signs_[static_cast<std::size_t>(k - 1)];
  }

  std::uint64_t mask() const {
    if (size() > 64) fail(ErrorCode::enumeration_cap_exceeded, "outcome too long for a bitmask");
    std::uint64_t m = 0;
    for (int i = 0; i < size(); ++i) {
      if (signs_[static_cast<std::size_t>(i)] == 1) m |= std::uint64_t{1} << i;
    }
    return m;
  }

  const std::vector<int>& signs() const noexcept { return signs_; }

  std::string to_string() const {
    std::string s = "(";
    for (std::size_t i = 0; i < signs_.size(); ++i) {
      if (i) s += ',';
      s += signs_[i] == 1 ? "+1" : "-1";
    }
    return s + ")";
  }

  friend bool operator==(const Outcome&, const Outcome&) = default;

 private:
  std::vector<int> signs_;
};

inline void require_same_length(const ProbabilityModel& model, const Outcome& omega) {
  if (omega.size() != model.size()) {
    fail(ErrorCode::length_mismatch, "outcome of length " + std::to_string(omega.size()) +
                                         " for model of size " + std::to_string(model.size()));
  }
}

inline double outcome_weight(const ProbabilityModel& model, const Outcome& omega) {
  require_same_length(model, omega);
  double w = 1.0;
  for (int k = 1; k <= model.size(); ++k) w *= omega[k] == 1 ? model.p(k) : model.q(k);
  return w;
}

/// Y_k for a given sign of omega_k.
inline double standardized_value(const ProbabilityModel& model, int k, int sign) {
  return sign == 1 ? std::sqrt(model.q(k) / model.p(k)) : -std::sqrt(model.p(k) / model.q(k));
}

inline double standardized_value(const ProbabilityModel& model, int k, const Outcome& omega) {
  require_same_length(model, omega);
  return standardized_value(model, k, omega[k]);
}

/// omega with coordinate k forced to `sign`.
inline Outcome flip(const Outcome& omega, int k, int sign) {
  if (k < 1 || k > omega.size()) fail(ErrorCode::index_out_of_range, "flip index " + std::to_string(k));
  if (sign != 1 && sign != -1) fail(ErrorCode::invalid_argument, "flip sign must be +1 or -1");
  std::vector<int> s = omega.signs();
  s[static_cast<std::size_t>(k - 1)] = sign;
  return Outcome(std::move(s));
}

/// Values F(omega) for all 2^N outcomes, indexed by bitmask.
class FunctionalTable {
 public:
  FunctionalTable(int dimension, std::vector<double> values)
      : dimension_(dimension), values_(std::move(values)) {
    if (dimension < 1 || dimension > kEnumerationCap) {
      fail(ErrorCode::enumeration_cap_exceeded,
           "table dimension " + std::to_string(dimension) + " outside 1.." +
               std::to_string(kEnumerationCap));
    }
    if (values_.size() != (std::size_t{1} << dimension)) {
      fail(ErrorCode::length_mismatch, "table needs 2^" + std::to_string(dimension) + " values");
    }
    for (std::size_t i = 0; i < values_.size(); ++i) {
      if (!std::isfinite(values_[i])) {
        fail(ErrorCode::invalid_argument,
             "non-finite value at " + Outcome::from_mask(i, dimension).to_string());
      }
    }
  }

  /// Tabulates `fn(mask)` over every outcome.
  template <class Fn>
  static FunctionalTable from_masks(int dimension, Fn&& fn) {
    if (dimension < 1 || dimension > kEnumerationCap) {
      fail(ErrorCode::enumeration_cap_exceeded, "dimension " + std::to_string(dimension));
    }
    std::vector<double> v(std::size_t{1} << dimension);
    for_each_chunk(v.size(), [&](std::size_t, std::size_t b, std::size_t e) {
      for (std::size_t m = b; m < e; ++m) v[m] = fn(static_cast<std::uint64_t>(m));
    });
    return FunctionalTable(dimension, std::move(v));
  }

  static FunctionalTable from_outcomes(int dimension,
                                       const std::function<double(const Outcome&)>& fn) {
    return from_masks(dimension,
                      [&](std::uint64_t m) { return fn(Outcome::from_mask(m, dimension)); });
  }

  static FunctionalTable constant(int dimension, double c) {
    return from_masks(dimension, [c](std::uint64_t) { return c; });
  }

  int dimension() const noexcept { return dimension_; }
  std::size_t size() const noexcept { return values_.size(); }
  double operator[](std::size_t mask) const { return values_[mask]; }
  double at(const Outcome& omega) const {
    if (omega.size() != dimension_) fail(ErrorCode::length_mismatch, "outcome length");
    return values_[omega.mask()];
  }
  const std::vector<double>& values() const noexcept { return values_; }

 private:
  int dimension_;
  std::vector<double> values_;
};

inline FunctionalTable operator-(const FunctionalTable& a, const FunctionalTable& b) {
  if (a.dimension() != b.dimension()) fail(ErrorCode::length_mismatch, "table dimensions differ");
  return FunctionalTable::from_masks(a.dimension(), [&](std::uint64_t m) { return a[m] - b[m]; });
}

inline FunctionalTable operator+(const FunctionalTable& a, const FunctionalTable& b) {
  if (a.dimension() != b.dimension()) fail(ErrorCode::length_mismatch, "table dimensions differ");
  return FunctionalTable::from_masks(a.dimension(), [&](std::uint64_t m) { return a[m] + b[m]; });
}

/// Pointwise product.
inline FunctionalTable operator*(const FunctionalTable& a, const FunctionalTable& b) {
  if (a.dimension() != b.dimension()) fail(ErrorCode::length_mismatch, "table dimensions differ");
  return FunctionalTable::from_masks(a.dimension(), [&](std::uint64_t m) { return a[m] * b[m]; });
}

inline FunctionalTable operator*(double c, const FunctionalTable& a) {
  return FunctionalTable::from_masks(a.dimension(), [&](std::uint64_t m) { return c * a[m]; });
}

/// A model together with the weights of all its outcomes. Construction fails
/// above the enumeration cap.
class SampleSpace {
 public:
  explicit SampleSpace(ProbabilityModel model) : model_(std::move(model)) {
    const int n = model_.size();
    if (n > kEnumerationCap) {
      fail(ErrorCode::enumeration_cap_exceeded,
           "N = " + std::to_string(n) + " exceeds the enumeration cap " +
               std::to_string(kEnumerationCap) + "; use Monte Carlo mode");
    }
    weights_.assign(std::size_t{1} << n, 1.0);
    // Weight of mask m is built from m with its top bit cleared.
    for (int k = 0; k < n; ++k) {
      const std::size_t top = std::size_t{1} << k;
      const double pk = model_.p(k + 1), qk = model_.q(k + 1);
      for (std::size_t m = 0; m < top; ++m) {
        weights_[m | top] = weights_[m] * pk;
        weights_[m] *= qk;
      }
    }
  }

  const ProbabilityModel& model() const noexcept { return model_; }
  int dimension() const noexcept { return model_.size(); }
  std::size_t size() const noexcept { return weights_.size(); }
  double weight(std::size_t mask) const { return weights_[mask]; }
  const std::vector<double>& weights() const noexcept { return weights_; }

  void require_matches(const FunctionalTable& f) const {
    if (f.dimension() != dimension()) {
      fail(ErrorCode::length_mismatch, "table of dimension " + std::to_string(f.dimension()) +
                                           " for model of size " + std::to_string(dimension()));
    }
  }

  /// E[g(mask)] for an arbitrary per-outcome function.
  template <class Fn>
  double expect(Fn&& g) const {
    return sum_over(size(), [&](std::size_t m) { return weights_[m] * g(static_cast<std::uint64_t>(m)); });
  }

 private:
  ProbabilityModel model_;
  std::vector<double> weights_;
};

inline double expectation(const SampleSpace& space, const FunctionalTable& f) {
  space.require_matches(f);
  return space.expect([&](std::uint64_t m) { return f[m]; });
}

inline double variance(const SampleSpace& space, const FunctionalTable& f) {
  const double mean = expectation(space, f);
  const double v = space.expect([&](std::uint64_t m) {
    const double d = f[m] - mean;
    return d * d;
  });
  return v < 0.0 ? 0.0 : v;
}

/// Law of an integer-valued functional.
struct DistributionTable {
  std::map<long long, double> pmf;

  double probability(long long k) const {
    auto it = pmf.find(k);
    return it == pmf.end() ? 0.0 : it->second;
  }
  long long min_support() const { return pmf.empty() ? 0 : pmf.begin()->first; }
  long long max_support() const { return pmf.empty() ? 0 : pmf.rbegin()->first; }
  double mean() const {
    CompensatedSum s;
    for (const auto& [k, pr] : pmf) s.add(static_cast<double>(k) * pr);
    return s.value();
  }
  double total_mass() const {
    CompensatedSum s;
    for (const auto& [k, pr] : pmf) s.add(pr);
    return s.value();
  }
};

/// Throws NonIntegerValue naming the first outcome (in mask order) whose value
/// is not within kIntegralityTolerance of an integer, or of a nonnegative
/// integer when `nonnegative` is set.
inline void require_integer_valued(const FunctionalTable& f, bool nonnegative = true) {
  for (std::size_t m = 0; m < f.size(); ++m) {
    long long r = 0;
    if (!near_integer(f[m], kIntegralityTolerance, &r) || (nonnegative && r < 0)) {
      std::ostringstream os;
      os.precision(17);
      os << "F" << Outcome::from_mask(m, f.dimension()).to_string() << " = " << f[m]
         << " is not a " << (nonnegative ? "nonnegative " : "") << "integer";
      fail(ErrorCode::non_integer_value, os.str());
    }
  }
}

inline bool is_integer_valued(const FunctionalTable& f, bool nonnegative = true) {
  for (std::size_t m = 0; m < f.size(); ++m) {
    long long r = 0;
    if (!near_integer(f[m], kIntegralityTolerance, &r) || (nonnegative && r < 0)) return false;
  }
  return true;
}

inline DistributionTable distribution(const SampleSpace& space, const FunctionalTable& f) {
  space.require_matches(f);
  require_integer_valued(f, /*nonnegative=*/false);
  const std::size_t chunks = (f.size() + kChunkSize - 1) / kChunkSize;
  std::vector<std::map<long long, CompensatedSum>> partial(chunks);
  for_each_chunk(f.size(), [&](std::size_t c, std::size_t b, std::size_t e) {
    for (std::size_t m = b; m < e; ++m) {
      partial[c][static_cast<long long>(std::round(f[m]))].add(space.weight(m));
    }
  });
  std::map<long long, CompensatedSum> merged;
  for (const auto& chunk : partial) {
    for (const auto& [k, s] : chunk) merged[k].add(s);
  }
  DistributionTable out;
  for (const auto& [k, s] : merged) out.pmf[k] = s.value();
  return out;
}

/// Law of an arbitrary real-valued functional: atoms keyed by exact value.
inline std::map<double, double> atoms(const SampleSpace& space, const FunctionalTable& f) {
  space.require_matches(f);
  std::map<double, CompensatedSum> merged;
  for (std::size_t m = 0; m < f.size(); ++m) merged[f[m]].add(space.weight(m));
  std::map<double, double> out;
  for (const auto& [x, s] : merged) out[x] = s.value();
  return out;
}

}  // namespace mcstein
