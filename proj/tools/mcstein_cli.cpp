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

#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "mcstein/cli/commands.hpp"
#include "mcstein/cli/experiment.hpp"
#include "mcstein/cli/format.hpp"
#include "mcstein/cli/verify.hpp"
#include "mcstein/parallel.hpp"

namespace {

int emit(const mcstein::cli::Report& report, mcstein::cli::Format format, const std::string& out) {
  const std::string text = mcstein::cli::render(report, format);
  if (out.empty()) {
    std::cout << text;
  } else {
    std::ofstream f(out, std::ios::binary);
    if (!f) {
      std::cerr << "error: cannot write " << out << '\n';
      return mcstein::cli::kExitValidation;
    }
    f << text;
  }
  if (report.exit_code != 0) std::cerr << report.message << '\n';
  return report.exit_code;
}

}  // namespace

int main(int argc, char** argv) {
  using namespace mcstein::cli;
  CLI::App app{"Poisson approximation bounds for Rademacher functionals"};
  app.require_subcommand(1);
  app.fallthrough();

  std::string format_name;
  std::uint64_t seed = 20261014;
  long long mc_samples = 0;
  std::string out_path;
  unsigned threads = 1;
  double total_offset = 0.0;
  app.add_option("--format", format_name, "csv or json")->check(CLI::IsMember({"csv", "json"}));
  app.add_option("--seed", seed, "random seed");
  app.add_option("--mc-samples", mc_samples, "Monte Carlo sample count beyond the enumeration cap");
  app.add_option("--out", out_path, "write the report to this file");
  app.add_option("--threads", threads, "worker threads")->check(CLI::Range(1u, 256u));
  // Negative controls for the test suite.
  std::vector<std::string> faults;
  app.add_option("--inject-fault", faults)->group("");
  app.add_option("--offset-total", total_offset)->group("");

  auto* verify = app.add_subcommand("verify", "run the seeded identity suite");

  auto* bound = app.add_subcommand("bound", "evaluate bounds for an experiment file");
  std::string spec_path;
  bound->add_option("spec", spec_path, "experiment JSON")->required();

  auto* rate = app.add_subcommand("j2-rate", "tabulate the order-2 example");
  int n_min = 2, n_max = 12, step = 1;
  rate->add_option("--n-min", n_min)->required();
  rate->add_option("--n-max", n_max)->required();
  rate->add_option("--step", step);

  auto* bern = app.add_subcommand("bernoulli", "bound for a sum of independent Bernoulli variables");
  std::vector<double> probs;
  std::string lambda_text;
  bern->add_option("--p", probs, "success probabilities")->required();
  bern->add_option("--lambda", lambda_text, "number or 'mean'");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitValidation;
  }

  try {
    mcstein::set_thread_count(threads);
    RunOptions opt;
    opt.seed = seed;
    if (mc_samples > 0) opt.mc_samples = mc_samples;
    opt.total_offset = total_offset;
    Format format = format_name.empty() ? Format::csv : parse_format(format_name);

    if (*verify) {
      VerifyOptions v;
      v.seed = seed;
      v.faults.insert(faults.begin(), faults.end());
      return emit(cmd_verify(v), format, out_path);
    }
    if (*bound) {
      ExperimentSpec spec = load_spec(spec_path);
      if (format_name.empty()) format = spec.format;
      if (app.count("--seed") == 0) opt.seed = spec.seed;
      if (!opt.mc_samples && spec.mc_samples) opt.mc_samples = spec.mc_samples;
      return emit(cmd_bound(spec, opt), format, out_path);
    }
    if (*rate) return emit(cmd_j2_rate(n_min, n_max, step, opt), format, out_path);
    if (*bern) {
      std::optional<double> lambda;
      if (!lambda_text.empty() && lambda_text != "mean") {
        try {
          std::size_t used = 0;
          lambda = std::stod(lambda_text, &used);
          if (used != lambda_text.size()) throw std::invalid_argument("trailing characters");
        } catch (const std::exception&) {
          throw mcstein::Error(mcstein::ErrorCode::invalid_argument,
                               "--lambda expects a number or 'mean'");
        }
      }
      return emit(cmd_bernoulli(probs, lambda, opt), format, out_path);
    }
  } catch (const mcstein::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitValidation;
  }
  return 0;
}
