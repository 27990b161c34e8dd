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
#include <sys/wait.h>
#include <unistd.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <regex>
#include <set>
#include <sstream>
#include <string>

#include <json.hpp>

#include "mcstein/cli/commands.hpp"
#include "mcstein/cli/experiment.hpp"
#include "mcstein/cli/format.hpp"

using namespace mcstein;
using namespace mcstein::cli;
namespace fs = std::filesystem;

namespace {

struct CliRun {
  int exit_code = -1;
  std::string out;
  std::string err;
};

fs::path scratch() {
  static const fs::path dir = [] {
    fs::path d = fs::temp_directory_path() / ("mcstein_cli_test_" + std::to_string(::getpid()));
    fs::create_directories(d);
    return d;
  }();
  return dir;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

CliRun run(const std::string& args) {
  const fs::path err = scratch() / "stderr.txt";
  const std::string cmd = std::string(MCSTEIN_CLI_PATH) + " " + args + " 2>" + err.string();
  CliRun r;
  FILE* pipe = ::popen(cmd.c_str(), "r");
  if (!pipe) return r;
  char buf[4096];
  std::size_t n = 0;
  while ((n = std::fread(buf, 1, sizeof buf, pipe)) > 0) r.out.append(buf, n);
  const int status = ::pclose(pipe);
  r.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  r.err = slurp(err);
  return r;
}

std::string sample(const std::string& name) { return std::string(MCSTEIN_SAMPLES_DIR) + "/" + name; }

std::string write_spec(const std::string& name, const std::string& text) {
  const fs::path p = scratch() / name;
  std::ofstream(p) << text;
  return p.string();
}

nlohmann::ordered_json parse_json(const std::string& text) { return nlohmann::ordered_json::parse(text); }

const nlohmann::ordered_json& row_for(const nlohmann::ordered_json& doc, const std::string& key, const std::string& value) {
  for (const auto& r : doc["rows"]) {
    if (r[key] == value) return r;
  }
  throw std::runtime_error("no row " + value);
}

std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream in(line);
  while (std::getline(in, cur, sep)) out.push_back(cur);
  if (!line.empty() && line.back() == sep) out.emplace_back();
  return out;
}

}  // namespace

TEST(Format, ShortestRoundTrip) {
  Rng rng(271);
  for (int i = 0; i < 2000; ++i) {
    const double x = (rng.uniform() - 0.5) * std::pow(10.0, rng.uniform_int(-30, 30));
    EXPECT_EQ(std::strtod(shortest(x).c_str(), nullptr), x);
  }
  EXPECT_EQ(shortest(0.1), "0.1");
  EXPECT_EQ(shortest(3.0), "3");
  EXPECT_EQ(parse_format("json"), Format::json);
  EXPECT_THROW((void)parse_format("xml"), Error);
}

TEST(Spec, ParsesAllFunctionalForms) {
  const ExperimentSpec a = parse_spec_text(
      R"({"model":{"p":[0.5,0.5]},"functional":{"type":"chaos","mean":1,"kernels":[[[1,2],0.25]]},)"
      R"("lambda":2.5,"bounds":["main","jm"],"format":"json","seed":9,"mc_samples":20000})");
  EXPECT_EQ(a.p.size(), 2u);
  const auto& chaos = std::get<ChaosFunctional>(a.functional).expansion;
  EXPECT_EQ(chaos.mean(), 1.0);
  EXPECT_EQ((*chaos.kernel(2))({1, 2}), 0.25);
  EXPECT_EQ(a.lambda.kind, LambdaPolicy::Kind::value);
  EXPECT_EQ(a.lambda.value, 2.5);
  EXPECT_EQ(a.format, Format::json);
  EXPECT_EQ(a.seed, 9u);
  EXPECT_EQ(*a.mc_samples, 20000);

  const ExperimentSpec b = parse_spec_text(R"({"model":{"p":[0.2,0.3]},"functional":{"type":"bernoulli_sum"}})");
  EXPECT_TRUE(std::holds_alternative<BernoulliSum>(b.functional));
  EXPECT_EQ(b.lambda.kind, LambdaPolicy::Kind::mean);
  EXPECT_EQ(b.bounds, (std::vector<std::string>{"bernoulli", "main"}));

  const ExperimentSpec c = parse_spec_text(R"({"functional":{"type":"j2_example","n":4}})");
  EXPECT_EQ(c.p, std::vector<double>(4, 0.25));
  EXPECT_EQ(c.lambda.kind, LambdaPolicy::Kind::variance);
}

TEST(Spec, ErrorsCarryLocation) {
  auto where = [](const std::string& text) {
    try {
      (void)parse_spec_text(text);
    } catch (const Error& e) {
      EXPECT_EQ(e.code(), ErrorCode::spec_parse_error);
      return std::string(e.what());
    }
    return std::string("no error");
  };
  EXPECT_NE(where("{").find("SpecParseError"), std::string::npos);
  EXPECT_NE(where(R"({"model":{"p":[0.5]}})").find("$: missing field 'functional'"), std::string::npos);
  EXPECT_NE(where(R"({"model":{"p":[0.5]},"functional":{"type":"chaos","kernels":[[[1],"x"]]}})")
                .find("$.functional.kernels[0]"),
            std::string::npos);
  EXPECT_NE(where(R"({"model":{"p":[0.5,0.5]},"functional":{"type":"chaos","kernels":[[[2,1],0.5]]}})")
                .find("$.functional.kernels"),
            std::string::npos);
  EXPECT_NE(where(R"({"model":{"p":[0.5]},"functional":{"type":"other"}})").find("$.functional.type"),
            std::string::npos);
  EXPECT_NE(where(R"({"model":{"p":[0.5]},"functional":{"type":"bernoulli_sum"},"bounds":["nope"]})")
                .find("$.bounds[0]"),
            std::string::npos);
  EXPECT_NE(where(R"({"model":{"p":[0.5]},"functional":{"type":"j2_example","n":3}})").find("$.model"),
            std::string::npos);
  EXPECT_NE(where(R"({"functional":{"type":"j2_example","n":1}})").find("$.functional.n"), std::string::npos);
  EXPECT_NE(where(R"({"model":{"p":[0.5]},"functional":{"type":"bernoulli_sum"},"lambda":"median"})")
                .find("$.lambda"),
            std::string::npos);
}

TEST(Cli, VerifyPassesAndListsEveryIdentity) {
  const CliRun r = run("verify --format json");
  ASSERT_EQ(r.exit_code, 0) << r.err;
  const nlohmann::ordered_json doc = parse_json(r.out);
  EXPECT_EQ(doc["command"], "verify");
  std::set<std::string> names;
  for (const auto& row : doc["rows"]) {
    names.insert(row["identity"].get<std::string>());
    EXPECT_TRUE(row["passed"].get<bool>()) << row.dump();
    EXPECT_LT(row["max_residual"].get<double>(), 1e-10);
  }
  for (const char* id : {"product_formula", "isometry", "adjointness", "ou_divergence", "integration_by_parts",
                         "structure_equation", "stein_equation", "mehler", "poincare"}) {
    EXPECT_TRUE(names.count(id)) << id;
  }
}

TEST(Cli, InjectedFaultFailsProductCheck) {
  const CliRun r = run("verify --inject-fault product_formula");
  EXPECT_EQ(r.exit_code, 3);
  EXPECT_NE(r.err.find("product_formula"), std::string::npos) << r.err;
  bool flagged = false;
  for (const std::string& line : split(r.out, '\n')) {
    if (line.rfind("product_formula,", 0) == 0) {
      flagged = line.find(",false,") != std::string::npos;
      EXPECT_GT(split(line, ',').back().size(), 0u) << "witness missing: " << line;
    }
  }
  EXPECT_TRUE(flagged) << r.out;
}

TEST(Cli, BernoulliSampleDominates) {
  const CliRun r = run("bound " + sample("bernoulli_small.json") + " --format json");
  ASSERT_EQ(r.exit_code, 0) << r.err;
  const nlohmann::ordered_json doc = parse_json(r.out);
  const auto& row = row_for(doc, "method", "bernoulli");
  EXPECT_NEAR(row["total"].get<double>(), (1 - std::exp(-1.0)) * 0.28, 1e-12);
  EXPECT_TRUE(row["dominated"].get<bool>());
  EXPECT_LT(row["distance_value"].get<double>(), row["total"].get<double>());
  EXPECT_NEAR(row_for(doc, "method", "main")["total"].get<double>(), row["total"].get<double>(), 1e-12);
}

TEST(Cli, BernoulliSubcommand) {
  std::string args = "bernoulli --lambda 1 --format json --p";
  for (int i = 0; i < 10; ++i) args += " 0.1";
  const CliRun r = run(args);
  ASSERT_EQ(r.exit_code, 0) << r.err;
  const nlohmann::ordered_json doc = parse_json(r.out);
  EXPECT_NEAR(doc["rows"][0]["total"].get<double>(), (1 - std::exp(-1.0)) * 0.28, 1e-14);
  EXPECT_EQ(run("bernoulli --p 0.1 0.2 --lambda abc").exit_code, 2);
  EXPECT_EQ(run("bernoulli --p 0.1 1.2").exit_code, 2);
}

TEST(Cli, OrderTwoExampleRow) {
  const std::string spec = write_spec("j2.json", R"({"functional":{"type":"j2_example","n":2},"format":"json"})");
  const CliRun r = run("bound " + spec);
  const nlohmann::ordered_json doc = parse_json(r.out);
  const auto& row = row_for(doc, "method", "j2_example");
  EXPECT_DOUBLE_EQ(row["lambda"].get<double>(), 1.0 / 16.0);
  EXPECT_DOUBLE_EQ(row["total"].get<double>(), 3.0 / 16.0);
  // The example functional takes no integer values, so its distance is 1.
  EXPECT_FALSE(row["integer_valued"].get<bool>());
  EXPECT_NEAR(row["distance_value"].get<double>(), 1.0, 1e-12);
  EXPECT_EQ(r.exit_code, 4);
}

TEST(Cli, NonIntegerFunctionalNamesOutcome) {
  const std::string spec = write_spec(
      "nonint.json", R"({"model":{"p":[0.5,0.5]},"functional":{"type":"chaos","mean":1,"kernels":[[[1],0.25]]}})");
  const CliRun r = run("bound " + spec);
  EXPECT_EQ(r.exit_code, 2);
  EXPECT_NE(r.err.find("NonIntegerValue"), std::string::npos) << r.err;
  EXPECT_NE(r.err.find("F(-1,-1)"), std::string::npos) << r.err;
}

TEST(Cli, ValidationExitCodes) {
  EXPECT_EQ(run("bound /nonexistent/spec.json").exit_code, 2);
  EXPECT_EQ(run("frobnicate").exit_code, 2);
  EXPECT_EQ(run("j2-rate --n-min 5 --n-max 3").exit_code, 2);
  const std::string bad = write_spec("bad.json", R"({"model":{"p":[0.5]},"functional":{"type":"chaos","kernels":[[1]]}})");
  const CliRun r = run("bound " + bad);
  EXPECT_EQ(r.exit_code, 2);
  EXPECT_NE(r.err.find("$.functional.kernels[0]"), std::string::npos) << r.err;
  const std::string big = write_spec(
      "big.json", R"({"model":{"p":[)" + [] {
        std::string s;
        for (int i = 0; i < 26; ++i) s += (i ? "," : "") + std::string("0.5");
        return s;
      }() + R"(]},"functional":{"type":"chaos","mean":1},"bounds":["main"]})");
  const CliRun cap = run("bound " + big);
  EXPECT_EQ(cap.exit_code, 2);
  EXPECT_NE(cap.err.find("EnumerationCapExceeded"), std::string::npos) << cap.err;
}

TEST(Cli, NegativeControlTriggersDominationExit) {
  const CliRun r = run("bound " + sample("bernoulli_small.json") + " --offset-total -10");
  EXPECT_EQ(r.exit_code, 4);
  EXPECT_NE(r.out.find("false"), std::string::npos);
}

TEST(Cli, MonteCarloBeyondEnumerationCap) {
  const CliRun r = run("bound " + sample("linear_count_mc.json") + " --format json");
  ASSERT_EQ(r.exit_code, 0) << r.err;
  const nlohmann::ordered_json doc = parse_json(r.out);
  const auto& row = doc["rows"][0];
  EXPECT_EQ(row["distance_method"], "monte_carlo");
  EXPECT_GT(row["standard_error"].get<double>(), 0.0);
  EXPECT_EQ(run("bound " + sample("linear_count_mc.json") + " --format json").out, r.out);
  EXPECT_NE(run("bound " + sample("linear_count_mc.json") + " --format json --seed 4").out, r.out);
  const std::string few = write_spec("few.json", std::regex_replace(slurp(sample("linear_count_mc.json")),
                                                                     std::regex("100000"), "500"));
  const CliRun f = run("bound " + few);
  EXPECT_EQ(f.exit_code, 2);
  EXPECT_NE(f.err.find("TooFewSamples"), std::string::npos) << f.err;
}

TEST(Cli, RateTable) {
  const CliRun r = run("j2-rate --n-min 2 --n-max 40 --step 19 --format json");
  const nlohmann::ordered_json doc = parse_json(r.out);
  ASSERT_EQ(doc["rows"].size(), 3u);
  const auto& first = doc["rows"][0];
  EXPECT_EQ(first["n"], 2);
  EXPECT_NEAR(first["rate"].get<double>(), 3.0 * std::sqrt(2.0) / 16.0, 1e-15);
  for (const auto& row : doc["rows"]) EXPECT_TRUE(row["rate_ok"].get<bool>());
  EXPECT_TRUE(doc["rows"][2]["exact_tv"].is_null());
  EXPECT_EQ(r.exit_code, 4);  // the exact column fails for the non-integer example
  const CliRun large = run("j2-rate --n-min 100 --n-max 10000 --step 990");
  EXPECT_EQ(large.exit_code, 0) << large.err;
}

TEST(Cli, JsonAndCsvCarryIdenticalNumbers) {
  const CliRun json = run("bound " + sample("pair_count.json") + " --format json");
  const CliRun csv = run("bound " + sample("pair_count.json") + " --format csv");
  ASSERT_EQ(json.exit_code, 0) << json.err;
  const nlohmann::ordered_json doc = parse_json(json.out);
  // Re-serialising the parsed document reproduces the text.
  EXPECT_EQ(doc.dump(2) + "\n", json.out);
  const std::vector<std::string> lines = split(csv.out, '\n');
  const std::vector<std::string> header = split(lines[0], ',');
  for (std::size_t i = 0; i < doc["rows"].size(); ++i) {
    const std::vector<std::string> cells = split(lines[i + 1], ',');
    for (std::size_t c = 0; c < header.size(); ++c) {
      const auto& v = doc["rows"][i][header[c]];
      if (v.is_number_float()) {
        EXPECT_EQ(std::strtod(cells[c].c_str(), nullptr), v.get<double>()) << header[c];
      }
    }
  }
}

TEST(Cli, OutputIsReproducible) {
  const CliRun a = run("verify --threads 1");
  const CliRun b = run("verify --threads 1");
  const CliRun c = run("verify --threads 3");
  EXPECT_EQ(a.out, b.out);
  EXPECT_EQ(a.out, c.out);
  const CliRun d = run("verify --seed 5");
  EXPECT_NE(a.out, d.out);
  const fs::path out = scratch() / "report.csv";
  EXPECT_EQ(run("bound " + sample("bernoulli_small.json") + " --out " + out.string()).exit_code, 0);
  EXPECT_EQ(slurp(out), run("bound " + sample("bernoulli_small.json")).out);
}
