// Copyright 2026 The Authors.
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

#include <exception>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "pooltest/cli.hpp"

namespace {

using namespace pooltest;

Population population_from(const std::optional<std::string>& path, std::size_t random_n, std::uint64_t seed) {
  if (path) return load_population(*path);
  if (random_n == 0) throw ValidationError("give --population or --random-n");
  return generate_random_population(random_n, seed);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Pooled testing allocation toolkit"};
  app.require_subcommand(1);

  // allocate
  auto* alloc = app.add_subcommand("allocate", "Allocate pooled tests for a population");
  std::optional<std::string> alloc_pop;
  std::size_t alloc_random_n = 0;
  std::uint64_t alloc_seed = 1;
  std::optional<std::string> alloc_out;
  cli::AllocateOptions alloc_opt;
  alloc->add_option("population", alloc_pop, "Population CSV (id,utility,q)");
  alloc->add_option("--random-n", alloc_random_n, "Draw a random population of this size instead");
  alloc->add_option("--seed", alloc_seed, "Seed for --random-n");
  alloc->add_option("--algo", alloc_opt.algo, "Algorithm")
      ->check(CLI::IsMember(cli::allocation_algorithms()));
  alloc->add_option("--budget,-B", alloc_opt.budget, "Number of tests")->required();
  alloc->add_option("--pool-cap,-G", alloc_opt.pool_cap, "Maximum test size (default 5)");
  alloc->add_option("--epsilon", alloc_opt.epsilon, "FPTAS accuracy");
  alloc->add_option("--K", alloc_opt.segments, "Segments for approx-small");
  alloc->add_option("--out,-o", alloc_out, "Write the regime as JSON");

  // bench
  auto* bench = app.add_subcommand("bench", "Run the random-population benchmark");
  cli::BenchOptions bench_opt;
  std::optional<std::string> bench_out;
  bool no_timing = false;
  bench->add_option("--n", bench_opt.n, "Population size");
  bench->add_option("--budgets", bench_opt.budgets, "Budgets to run")->delimiter(',');
  bench->add_option("--pool-cap,-G", bench_opt.pool_cap, "Maximum test size");
  bench->add_option("--trials", bench_opt.trials, "Random populations");
  bench->add_option("--seed", bench_opt.seed, "Seed of the first population");
  bench->add_option("--algos", bench_opt.algos, "Algorithms")->delimiter(',');
  bench->add_option("--epsilon", bench_opt.epsilon, "FPTAS accuracy");
  bench->add_option("--K", bench_opt.segments, "Segments for the additive guarantee");
  bench->add_option("--threads", bench_opt.threads, "Worker threads (0 = all cores)");
  bench->add_option("--out,-o", bench_out, "Write per-run CSV here instead of stdout");
  bench->add_flag("--no-timing", no_timing, "Print NA for timings");

  // gain
  auto* gain = app.add_subcommand("gain", "Gain of overlaps on random instances");
  cli::GainOptions gain_opt;
  gain->add_option("--preset", gain_opt.preset, "Named instance")->check(CLI::IsMember({"prop1"}));
  gain->add_option("--n", gain_opt.n, "Population size");
  gain->add_option("--budget,-B", gain_opt.budget, "Number of tests");
  gain->add_option("--pool-cap,-G", gain_opt.pool_cap, "Maximum test size (default n)");
  gain->add_option("--max-overlap", gain_opt.max_overlap, "Tests per individual in the overlapping search");
  gain->add_option("--trials", gain_opt.trials, "Random instances");
  gain->add_option("--seed", gain_opt.seed, "Seed of the first instance");

  // export-milp
  auto* exp = app.add_subcommand("export-milp", "Write the clustered MILP as an LP file");
  cli::ExportOptions exp_opt;
  exp->add_option("--clusters", exp_opt.clusters_path, "Cluster CSV (size,utility,q)");
  exp->add_option("--population", exp_opt.population_path, "Population CSV, clustered by (utility,q)");
  exp->add_option("--budget,-B", exp_opt.budget, "Number of tests")->required();
  exp->add_option("--pool-cap,-G", exp_opt.pool_cap, "Maximum test size");
  exp->add_option("--K", exp_opt.segments, "Segments of the exp approximation");
  exp->add_option("--out,-o", exp_opt.out, "LP output path")->required();

  // repool
  auto* rep = app.add_subcommand("repool", "Re-optimize over individuals who submitted samples");
  std::string rep_pop;
  std::string rep_regime;
  std::string rep_submitted;
  std::optional<std::string> rep_out;
  cli::RepoolOptions rep_opt;
  rep->add_option("--population", rep_pop, "Population CSV")->required();
  rep->add_option("--regime", rep_regime, "Original regime JSON")->required();
  rep->add_option("--submitted", rep_submitted, "File with one submitted id per line")->required();
  rep->add_option("--algo", rep_opt.algo, "Allocator")->check(CLI::IsMember({"greedy", "approx-small", "oracle"}));
  rep->add_option("--budget,-B", rep_opt.budget, "Number of tests (default: original)");
  rep->add_option("--pool-cap,-G", rep_opt.pool_cap, "Maximum test size (default: original)");
  rep->add_option("--K", rep_opt.segments, "Segments for approx-small");
  rep->add_option("--out,-o", rep_out, "Write the new regime as JSON");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? cli::kOk : cli::kUsage;
  }

  try {
    if (alloc->parsed()) {
      const auto pop = population_from(alloc_pop, alloc_random_n, alloc_seed);
      const auto a = cli::allocate(pop, alloc_opt);
      cli::print_allocation(std::cout, pop, alloc_opt, a);
      if (alloc_out) save_regime(*alloc_out, a.regime);
    } else if (bench->parsed()) {
      bench_opt.timing = !no_timing;
      if (bench_out) {
        std::ofstream csv(*bench_out);
        if (!csv) throw Error("cannot write '" + *bench_out + "'");
        cli::bench(bench_opt, csv, std::cout, std::cerr);
      } else {
        cli::bench(bench_opt, std::cout, std::cout, std::cerr);
      }
    } else if (gain->parsed()) {
      cli::gain(gain_opt, std::cout);
    } else if (exp->parsed()) {
      cli::export_milp(exp_opt, std::cout, std::cerr);
    } else if (rep->parsed()) {
      const auto pop = load_population(rep_pop);
      const auto original = load_regime(rep_regime);
      std::ifstream ids(rep_submitted);
      if (!ids) throw ValidationError("cannot open '" + rep_submitted + "'");
      const auto submitted = cli::read_submitted(ids, pop);
      const auto r = cli::repool_command(pop, original, submitted, rep_opt, std::cout);
      if (rep_out) save_regime(*rep_out, r.regime);
    }
  } catch (const ValidationError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return cli::kUsage;
  } catch (const CapacityError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return cli::kUsage;
  } catch (const ParseError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return cli::kUsage;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << '\n';
    return cli::kInternal;
  }
  return cli::kOk;
}
