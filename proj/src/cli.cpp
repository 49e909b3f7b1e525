// Copyright 2026 The GCA Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "gca/cli.hpp"

#include "gca/auction.hpp"
#include "gca/harness.hpp"
#include "gca/io.hpp"

#include "CLI11.hpp"

#include <cstdio>
#include <fstream>
#include <iomanip>
#include <sstream>

namespace gca {

namespace {

class IoError : public std::runtime_error
{
public:
  using std::runtime_error::runtime_error;
};

std::string read_file(std::string const &path)
{
  std::ifstream in(path, std::ios::binary);
  if (!in)
  {
    throw IoError("cannot open '" + path + "'");
  }
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

void emit(std::string const &text, std::string const &path, std::ostream &out)
{
  if (path.empty() || path == "-")
  {
    out << text;
    return;
  }
  std::ofstream file(path, std::ios::binary);
  if (!file || !(file << text))
  {
    throw IoError("cannot write '" + path + "'");
  }
}

std::pair<std::uint64_t, std::uint64_t> parse_seed_range(std::string const &text)
{
  auto const sep = text.find("..");
  try
  {
    std::size_t used = 0;
    if (sep == std::string::npos)
    {
      auto const seed = std::stoull(text, &used);
      if (used != text.size())
      {
        throw std::invalid_argument(text);
      }
      return {seed, seed};
    }
    auto const first = std::stoull(text.substr(0, sep), &used);
    if (used != sep)
    {
      throw std::invalid_argument(text);
    }
    auto const tail = text.substr(sep + 2);
    auto const last = std::stoull(tail, &used);
    if (used != tail.size() || last < first)
    {
      throw std::invalid_argument(text);
    }
    return {first, last};
  }
  catch (std::logic_error const &)
  {
    throw CLI::ValidationError("--seeds", "expected FIRST..LAST, got '" + text + "'");
  }
}

CLI::Validator rule_validator()
{
  return CLI::Validator(
      [](std::string &value) -> std::string {
        return parse_rule(value) ? std::string{} : "unknown payment rule '" + value + "'";
      },
      "literal|critical");
}

}  // namespace

int cli_main(std::vector<std::string> const &args, std::ostream &out, std::ostream &err)
{
  CLI::App app{"Greedy combinatorial auction for hiring experts"};
  app.require_subcommand(1);

  // run
  std::string run_rule = "literal";
  std::string run_input;
  std::string run_output;
  auto       *run = app.add_subcommand("run", "Run the mechanism on an instance file");
  run->add_option("--rule", run_rule, "Payment rule")->check(rule_validator());
  run->add_option("instance", run_input, "Instance file (gca-1)")->required();
  run->add_option("-o,--output", run_output, "Result file (default stdout)");

  // gen
  GenParams   gen_params;
  std::string gen_output;
  auto       *gen = app.add_subcommand("gen", "Generate a random instance");
  gen->add_option("--n", gen_params.n, "Patients")->required();
  gen->add_option("--m", gen_params.m, "Experts")->required();
  gen->add_option("--max-bundle", gen_params.max_bundle, "Largest demanded bundle")->required();
  gen->add_option("--lo", gen_params.lo, "Lowest valuation")->capture_default_str();
  gen->add_option("--hi", gen_params.hi, "Highest valuation")->capture_default_str();
  gen->add_option("--seed", gen_params.seed, "Seed")->capture_default_str();
  gen->add_option("-o,--output", gen_output, "Instance file (default stdout)");

  // verify
  std::string verify_instance;
  std::string verify_result_path;
  auto       *verify = app.add_subcommand("verify", "Recheck a result file against its instance");
  verify->add_option("instance", verify_instance, "Instance file")->required();
  verify->add_option("result", verify_result_path, "Result file")->required();

  // fuzz
  std::string  fuzz_rule  = "literal";
  std::string  fuzz_seeds = "1..100";
  std::string  fuzz_check = "ic,ir,mono,ratio,crit";
  std::string  fuzz_summary;
  CorpusShape  shape;
  BatchOptions batch;
  auto        *fuzz = app.add_subcommand("fuzz", "Check mechanism properties on seeded random instances");
  fuzz->add_option("--rule", fuzz_rule, "Payment rule under test")->check(rule_validator());
  fuzz->add_option("--seeds", fuzz_seeds, "Seed range FIRST..LAST")->capture_default_str();
  fuzz->add_option("--n-min", shape.n_min)->capture_default_str();
  fuzz->add_option("--n-max", shape.n_max)->capture_default_str();
  fuzz->add_option("--m-min", shape.m_min)->capture_default_str();
  fuzz->add_option("--m-max", shape.m_max)->capture_default_str();
  fuzz->add_option("--lo", shape.lo)->capture_default_str();
  fuzz->add_option("--hi", shape.hi)->capture_default_str();
  fuzz->add_option("--check", fuzz_check, "Properties: ic,ir,mono,ratio,crit or all")
      ->capture_default_str();
  fuzz->add_option("--ic-trials", batch.ic_trials, "Hypothetical true values per patient")
      ->capture_default_str();
  fuzz->add_option("--mono-samples", batch.mono_samples, "Demand subsets per winner")
      ->capture_default_str();
  fuzz->add_option("--threads", batch.threads, "Worker threads (0 = all cores)");
  fuzz->add_option("--summary", fuzz_summary, "Write the JSON summary here instead of stdout");

  // bench
  std::vector<std::size_t> bench_sizes{2000, 4000, 8000};
  std::size_t              bench_m          = 64;
  std::size_t              bench_max_bundle = 8;
  std::uint64_t            bench_seed       = 1;
  double                   bench_max_factor = 5.0;
  auto *bench = app.add_subcommand("bench", "Time allocation and payment on synthetic instances");
  bench->add_option("--sizes", bench_sizes, "Patient counts")->delimiter(',')->capture_default_str();
  bench->add_option("--m", bench_m)->capture_default_str();
  bench->add_option("--max-bundle", bench_max_bundle)->capture_default_str();
  bench->add_option("--seed", bench_seed)->capture_default_str();
  bench->add_option("--max-factor", bench_max_factor, "Allowed time growth per doubling of n")
      ->capture_default_str();

  std::vector<char const *> argv;
  argv.reserve(args.size());
  for (auto const &a : args)
  {
    argv.push_back(a.c_str());
  }

  try
  {
    app.parse(static_cast<int>(argv.size()), argv.data());
  }
  catch (CLI::CallForHelp const &)
  {
    out << app.help();
    return kExitOk;
  }
  catch (CLI::CallForAllHelp const &)
  {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  }
  catch (CLI::ParseError const &e)
  {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  }

  try
  {
    if (*run)
    {
      auto const instance = parse_instance(read_file(run_input));
      auto const result   = run_mechanism(instance, *parse_rule(run_rule));
      emit(write_result(result), run_output, out);
      return kExitOk;
    }
    if (*gen)
    {
      emit(write_instance(gen_random_instance(gen_params)), gen_output, out);
      return kExitOk;
    }
    if (*verify)
    {
      auto const instance = parse_instance(read_file(verify_instance));
      auto const result   = parse_result(read_file(verify_result_path));
      auto const problems = verify_result(instance, result);
      if (problems.empty())
      {
        out << "ok\n";
        return kExitOk;
      }
      for (auto const &p : problems)
      {
        out << "mismatch: " << p << "\n";
      }
      return kExitViolation;
    }
    if (*fuzz)
    {
      auto const [first, last] = parse_seed_range(fuzz_seeds);
      auto const properties    = PropertySet::parse(fuzz_check);
      auto const corpus        = make_corpus(first, last, shape);
      for (auto const &params : corpus)
      {
        if (properties.contains(Property::kRatio) && params.n > kMaxExhaustivePatients)
        {
          throw std::invalid_argument("--n-max exceeds the exhaustive optimum limit of " +
                                      std::to_string(kMaxExhaustivePatients));
        }
      }
      auto const report = run_batch(corpus, properties, *parse_rule(fuzz_rule), batch);
      out << write_fuzz_text(report);
      if (fuzz_summary.empty())
      {
        out << write_fuzz_summary(report);
      }
      else
      {
        emit(write_fuzz_summary(report), fuzz_summary, out);
      }
      return report.total_violations() == 0 ? kExitOk : kExitViolation;
    }
    if (*bench)
    {
      auto const rows = run_bench(bench_sizes, bench_m, bench_max_bundle, bench_seed);
      out << std::setw(8) << "n" << std::setw(16) << "literal_ms" << std::setw(16) << "critical_ms"
          << "\n";
      out << std::fixed << std::setprecision(4);
      for (auto const &row : rows)
      {
        out << std::setw(8) << row.n << std::setw(16) << row.literal_seconds * 1e3 << std::setw(16)
            << row.critical_seconds * 1e3 << "\n";
      }
      auto const factor = worst_doubling_factor(rows);
      out << "worst growth per doubling: " << std::setprecision(3) << factor << "x (limit "
          << bench_max_factor << "x)\n";
      return factor <= bench_max_factor ? kExitOk : kExitViolation;
    }
  }
  catch (CLI::ValidationError const &e)
  {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  }
  catch (ParseError const &e)
  {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  }
  catch (IoError const &e)
  {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  }
  catch (std::invalid_argument const &e)
  {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  }
  return kExitUsage;
}

}  // namespace gca
