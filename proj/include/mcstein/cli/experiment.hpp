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

// JSON experiment descriptions:
//
//   {
//     "model": {"p": [0.1, 0.2]},
//     "functional": {"type": "chaos", "mean": 1, "kernels": [[[1], 0.3], [[1, 2], 0.1]]},
//     "lambda": "mean",
//     "bounds": ["main", "second_order"],
//     "format": "csv",
//     "seed": 7,
//     "mc_samples": 100000
//   }
//
// Functional types: "chaos" (mean plus [tuple, coefficient] pairs with
// 1-based strictly increasing tuples), "bernoulli_sum" (sum of (X_k + 1)/2),
// and "j2_example" with an integer "n" (the model is then implied).

#pragma once

#include <cstdint>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

#include "mcstein/bounds.hpp"
#include "mcstein/chaos.hpp"
#include "mcstein/cli/format.hpp"
#include "mcstein/error.hpp"
#include "mcstein/kernel.hpp"
#include "mcstein/model.hpp"

namespace mcstein::cli {

struct ChaosFunctional {
  ChaosExpansion expansion;
};
struct BernoulliSum {};
struct J2ExampleFunctional {
  int n = 2;
};

using Functional = std::variant<ChaosFunctional, BernoulliSum, J2ExampleFunctional>;

struct LambdaPolicy {
  enum class Kind { value, mean, variance } kind = Kind::mean;
  double value = 0.0;
};

struct ExperimentSpec {
  std::vector<double> p;
  Functional functional;
  LambdaPolicy lambda;
  std::vector<std::string> bounds;
  Format format = Format::csv;
  std::uint64_t seed = 1;
  std::optional<long long> mc_samples;
};

inline const std::vector<std::string>& known_bounds() {
  static const std::vector<std::string> names = {"main", "main_reduced", "second_order",
                                                 "wasserstein", "j1", "jm", "j2",
                                                 "bernoulli", "j2_example"};
  return names;
}

namespace detail {

[[noreturn]] inline void parse_error(const std::string& where, const std::string& what) {
  fail(ErrorCode::spec_parse_error, where + ": " + what);
}

inline const nlohmann::json& field(const nlohmann::json& obj, const std::string& key,
                                   const std::string& where) {
  if (!obj.is_object()) parse_error(where, "expected an object");
  auto it = obj.find(key);
  if (it == obj.end()) parse_error(where, "missing field '" + key + "'");
  return *it;
}

inline double number(const nlohmann::json& v, const std::string& where) {
  if (!v.is_number()) parse_error(where, "expected a number");
  return v.get<double>();
}

inline ChaosExpansion parse_chaos(const nlohmann::json& fn, const std::string& where) {
  ChaosExpansion out(fn.contains("mean") ? number(fn["mean"], where + ".mean") : 0.0);
  if (!fn.contains("kernels")) return out;
  const nlohmann::json& ks = fn["kernels"];
  if (!ks.is_array()) parse_error(where + ".kernels", "expected an array");
  std::map<int, std::vector<std::pair<Index, double>>> by_order;
  for (std::size_t i = 0; i < ks.size(); ++i) {
    const std::string at = where + ".kernels[" + std::to_string(i) + "]";
    const nlohmann::json& e = ks[i];
    if (!e.is_array() || e.size() != 2 || !e[0].is_array()) {
      parse_error(at, "expected [tuple, coefficient]");
    }
    Index idx;
    for (const auto& x : e[0]) {
      if (!x.is_number_integer()) parse_error(at, "tuple entries must be integers");
      idx.push_back(x.get<int>());
    }
    by_order[static_cast<int>(idx.size())].emplace_back(std::move(idx), number(e[1], at));
  }
  for (const auto& [order, pairs] : by_order) {
    try {
      out.add(Kernel::from_pairs(order, pairs));
    } catch (const Error& err) {
      parse_error(where + ".kernels", err.what());
    }
  }
  return out;
}

}  // namespace detail

inline ExperimentSpec parse_spec(const nlohmann::json& doc) {
  using detail::field;
  using detail::parse_error;
  ExperimentSpec s;
  const nlohmann::json& fn = field(doc, "functional", "$");
  const nlohmann::json& type = field(fn, "type", "$.functional");
  if (!type.is_string()) parse_error("$.functional.type", "expected a string");
  const std::string t = type.get<std::string>();
  if (t == "chaos") {
    s.functional = ChaosFunctional{detail::parse_chaos(fn, "$.functional")};
  } else if (t == "bernoulli_sum") {
    s.functional = BernoulliSum{};
  } else if (t == "j2_example") {
    const nlohmann::json& n = field(fn, "n", "$.functional");
    if (!n.is_number_integer() || n.get<long long>() < 2) {
      parse_error("$.functional.n", "expected an integer >= 2");
    }
    s.functional = J2ExampleFunctional{n.get<int>()};
  } else {
    parse_error("$.functional.type", "unknown functional type '" + t + "'");
  }

  if (std::holds_alternative<J2ExampleFunctional>(s.functional)) {
    if (doc.contains("model")) parse_error("$.model", "the j2_example functional implies its model");
    const int n = std::get<J2ExampleFunctional>(s.functional).n;
    s.p.assign(static_cast<std::size_t>(n), 1.0 / n);
  } else {
    const nlohmann::json& p = field(field(doc, "model", "$"), "p", "$.model");
    if (!p.is_array()) parse_error("$.model.p", "expected an array");
    for (std::size_t i = 0; i < p.size(); ++i) {
      s.p.push_back(detail::number(p[i], "$.model.p[" + std::to_string(i) + "]"));
    }
  }

  const bool j2 = std::holds_alternative<J2ExampleFunctional>(s.functional);
  s.lambda.kind = j2 ? LambdaPolicy::Kind::variance : LambdaPolicy::Kind::mean;
  if (doc.contains("lambda")) {
    const nlohmann::json& l = doc["lambda"];
    if (l.is_number()) {
      s.lambda = {LambdaPolicy::Kind::value, l.get<double>()};
    } else if (l == "mean") {
      s.lambda.kind = LambdaPolicy::Kind::mean;
    } else if (l == "variance") {
      s.lambda.kind = LambdaPolicy::Kind::variance;
    } else {
      parse_error("$.lambda", "expected a number, \"mean\" or \"variance\"");
    }
  }

  if (doc.contains("bounds")) {
    const nlohmann::json& b = doc["bounds"];
    if (!b.is_array()) parse_error("$.bounds", "expected an array");
    for (std::size_t i = 0; i < b.size(); ++i) {
      const std::string at = "$.bounds[" + std::to_string(i) + "]";
      if (!b[i].is_string()) parse_error(at, "expected a string");
      const std::string name = b[i].get<std::string>();
      bool known = false;
      for (const auto& k : known_bounds()) known = known || k == name;
      if (!known) parse_error(at, "unknown bound method '" + name + "'");
      s.bounds.push_back(name);
    }
  } else if (j2) {
    s.bounds = {"j2_example", "j2"};
  } else if (std::holds_alternative<BernoulliSum>(s.functional)) {
    s.bounds = {"bernoulli", "main"};
  } else {
    s.bounds = {"main"};
  }

  if (doc.contains("format")) {
    if (!doc["format"].is_string()) parse_error("$.format", "expected a string");
    try {
      s.format = parse_format(doc["format"].get<std::string>());
    } catch (const Error& e) {
      parse_error("$.format", e.what());
    }
  }
  if (doc.contains("seed")) {
    if (!doc["seed"].is_number_unsigned()) parse_error("$.seed", "expected a non-negative integer");
    s.seed = doc["seed"].get<std::uint64_t>();
  }
  if (doc.contains("mc_samples")) {
    if (!doc["mc_samples"].is_number_integer()) parse_error("$.mc_samples", "expected an integer");
    s.mc_samples = doc["mc_samples"].get<long long>();
  }
  return s;
}

inline ExperimentSpec parse_spec_text(const std::string& text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    fail(ErrorCode::spec_parse_error, std::string("$: ") + e.what());
  }
  return parse_spec(doc);
}

inline ExperimentSpec load_spec(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::spec_parse_error, "cannot open " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_spec_text(buf.str());
}

}  // namespace mcstein::cli
