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

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <gtest/gtest.h>

#include "pooltest/cli.hpp"
#include "pooltest/io.hpp"
#include "pooltest/milp.hpp"

namespace pooltest {
namespace {

namespace fs = std::filesystem;

struct RunResult {
  int code = -1;
  std::string out;
};

const std::string kData = std::string(POOLTEST_SOURCE_DIR) + "/data/";

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

RunResult run(const std::string& args) {
  const fs::path out = fs::temp_directory_path() / ("pooltest_cli_" + std::to_string(::getpid()) + ".txt");
  const std::string cmd = std::string(POOLTEST_CLI_PATH) + " " + args + " > " + out.string() + " 2>/dev/null";
  const int status = std::system(cmd.c_str());
  RunResult r;
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  r.out = slurp(out);
  fs::remove(out);
  return r;
}

TEST(CliBinaryTest, UsageErrors) {
  EXPECT_EQ(run("").code, 2);
  EXPECT_EQ(run("allocate --random-n 10").code, 2);
  EXPECT_EQ(run("allocate --random-n 10 --budget 0").code, 2);
  EXPECT_EQ(run("allocate " + kData + "household.csv -B 2 --algo identical-dp").code, 2);
  EXPECT_EQ(run("allocate " + kData + "missing.csv -B 2").code, 2);
  EXPECT_EQ(run("bench --algos nonsense --trials 1 --n 5").code, 2);
}

TEST(CliBinaryTest, AllocateThreePersonExample) {
  const auto r = run("allocate " + kData + "prop1.csv -B 2 -G 3 --algo oracle");
  ASSERT_EQ(r.code, 0);
  EXPECT_NE(r.out.find("welfare=1.5"), std::string::npos);
}

TEST(CliBinaryTest, GainPreset) {
  const auto r = run("gain --preset prop1");
  ASSERT_EQ(r.code, 0);
  EXPECT_NE(r.out.find("7/6"), std::string::npos);
  EXPECT_NE(r.out.find("nonoverlapping=3/2"), std::string::npos);
  EXPECT_NE(r.out.find("overlapping=7/4"), std::string::npos);
}

TEST(CliBinaryTest, BenchIsDeterministicWithoutTiming) {
  const std::string args = "bench --n 30 --budgets 2,3 --trials 3 --seed 9 --algos greedy,fptas-greedy --no-timing";
  const auto a = run(args + " --threads 1");
  const auto b = run(args + " --threads 4");
  ASSERT_EQ(a.code, 0);
  EXPECT_EQ(a.out, b.out);
  EXPECT_NE(a.out.find("trial,B,algo,welfare,time_ms"), std::string::npos);
  EXPECT_NE(a.out.find(",NA"), std::string::npos);
}

TEST(CliBinaryTest, ExportMilpReparses) {
  const fs::path lp = fs::temp_directory_path() / "pooltest_cli_export.lp";
  const auto r = run("export-milp --clusters " + kData + "clusters.csv -B 2 -G 5 --K 6 --out " + lp.string());
  ASSERT_EQ(r.code, 0);
  std::ifstream in(lp);
  const auto summary = parse_lp(in);
  std::ifstream clusters_in(kData + "clusters.csv");
  const auto model = build_milp(parse_clusters(clusters_in), 5, 2, 6);
  EXPECT_EQ(summary.constraints, model.constraints().size());
  EXPECT_EQ(summary.variables, model.variables().size());
  EXPECT_NE(r.out.find("constraints=" + std::to_string(model.constraints().size())), std::string::npos);
  fs::remove(lp);
}

TEST(CliBinaryTest, AllocateThenRepool) {
  const fs::path regime = fs::temp_directory_path() / "pooltest_cli_regime.json";
  ASSERT_EQ(run("allocate " + kData + "household.csv -B 3 -G 3 --algo oracle --out " + regime.string()).code, 0);
  const auto r = run("repool --population " + kData + "household.csv --regime " + regime.string() +
                     " --submitted " + kData + "submitted.txt --algo oracle");
  ASSERT_EQ(r.code, 0);
  EXPECT_NE(r.out.find("submitted=5"), std::string::npos);
  fs::remove(regime);
}

TEST(CliFunctionsTest, AllocateEveryAlgorithm) {
  const auto pop = load_population(kData + "household.csv");
  cli::AllocateOptions oracle;
  oracle.algo = "oracle";
  oracle.budget = 2;
  oracle.pool_cap = 3;
  const double best = cli::allocate(pop, oracle).welfare;
  for (const auto& algo : cli::allocation_algorithms()) {
    if (algo == "identical-dp" || algo == "var-greedy") {
      cli::AllocateOptions opt;
      opt.algo = algo;
      opt.budget = 2;
      EXPECT_THROW(cli::allocate(pop, opt), ValidationError) << algo;
      continue;
    }
    cli::AllocateOptions opt;
    opt.algo = algo;
    opt.budget = 2;
    opt.pool_cap = 3;
    const auto a = cli::allocate(pop, opt);
    EXPECT_LE(a.welfare, best + 1e-9) << algo;
    EXPECT_GT(a.welfare, 0.0) << algo;
    std::ostringstream text;
    cli::print_allocation(text, pop, opt, a);
    EXPECT_NE(text.str().find("algo=" + algo), std::string::npos);
  }
  oracle.algo = "nope";
  EXPECT_THROW(cli::allocate(pop, oracle), ValidationError);
}

TEST(CliFunctionsTest, IdenticalUtilityAlgorithms) {
  const auto pop = Population::from_vectors({0.9, 0.8, 0.7, 0.95, 0.6}, {2, 2, 2, 2, 2});
  for (const std::string algo : {"identical-dp", "var-greedy"}) {
    cli::AllocateOptions opt;
    opt.algo = algo;
    opt.budget = 2;
    const auto a = cli::allocate(pop, opt);
    EXPECT_GT(a.welfare, 0.0) << algo;
    opt.pool_cap = 3;
    EXPECT_THROW(cli::allocate(pop, opt), ValidationError) << algo;
    EXPECT_LE(a.regime.size(), 2u);
  }
}

TEST(CliFunctionsTest, ReadSubmitted) {
  const auto pop = load_population(kData + "household.csv");
  std::istringstream ok("# comment\nalice\n\ncarol\n");
  EXPECT_EQ(cli::read_submitted(ok, pop), (std::vector<std::size_t>{0, 2}));
  std::istringstream bad("alice\nmallory\n");
  EXPECT_THROW(cli::read_submitted(bad, pop), ParseError);
}

TEST(CliFunctionsTest, BenchSummaryHasGuarantee) {
  cli::BenchOptions opt;
  opt.n = 40;
  opt.budgets = {2, 4};
  opt.trials = 2;
  opt.timing = false;
  opt.threads = 1;
  std::ostringstream csv;
  std::ostringstream summary;
  std::ostringstream notices;
  cli::bench(opt, csv, summary, notices);
  EXPECT_NE(summary.str().find("guarantee_add"), std::string::npos);
  EXPECT_EQ(summary.str().find(",NA\n"), std::string::npos);
}

TEST(CliFunctionsTest, Formatting) {
  EXPECT_EQ(cli::fmt(1.5), "1.5");
  EXPECT_EQ(cli::fmt(2.0 / 3.0), "0.666667");
  EXPECT_EQ(cli::worker_count(3, 1), 1u);
  EXPECT_EQ(cli::worker_count(3, 10), 3u);
}

}  // namespace
}  // namespace pooltest
