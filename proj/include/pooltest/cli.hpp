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

// Command implementations behind the pooltest executable. Each command
// writes its report to the given streams and throws on bad input.

#ifndef POOLTEST_CLI_HPP
#define POOLTEST_CLI_HPP

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "pooltest/clusters.hpp"
#include "pooltest/core.hpp"
#include "pooltest/gain.hpp"
#include "pooltest/greedy.hpp"
#include "pooltest/identical.hpp"
#include "pooltest/io.hpp"
#include "pooltest/milp.hpp"
#include "pooltest/oracle.hpp"
#include "pooltest/repool.hpp"

namespace pooltest::cli {

enum ExitCode : int { kOk = 0, kInternal = 1, kUsage = 2 };

/// Six significant digits.
inline std::string fmt(double value) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.6g", value);
  return buf;
}

inline std::string join_members(const Test& t, const Population& pop) {
  std::string out;
  for (auto i : t.members()) {
    if (!out.empty()) out += ' ';
    out += pop[i].id;
  }
  return out;
}

inline const std::vector<std::string>& allocation_algorithms() {
  static const std::vector<std::string> names{"greedy",     "fptas-greedy", "identical-dp",
                                              "var-greedy", "approx-small", "oracle"};
  return names;
}

struct AllocateOptions {
  std::string algo = "greedy";
  std::size_t budget = 1;
  std::optional<std::size_t> pool_cap;  // default 5; identical algorithms default to n
  double epsilon = 0.1;
  std::size_t segments = 18;
  OracleLimits limits;
};

struct Allocation {
  Regime regime;
  double welfare = 0.0;
  double runtime_ms = 0.0;
  std::optional<double> guarantee;  // additive, approx-small only
};

inline Allocation allocate(const Population& pop, const AllocateOptions& opt) {
  if (opt.budget == 0) throw ValidationError("--budget must be at least 1");
  const std::size_t cap = opt.pool_cap.value_or(5);
  if (cap == 0) throw ValidationError("--pool-cap must be at least 1");
  const auto start = std::chrono::steady_clock::now();
  Allocation a;
  if (opt.algo == "greedy") {
    a.regime = greedy_regime(pop, cap, opt.budget, Subroutine::exact(), opt.limits).regime;
  } else if (opt.algo == "fptas-greedy") {
    a.regime = greedy_regime(pop, cap, opt.budget, Subroutine::fptas(opt.epsilon), opt.limits).regime;
  } else if (opt.algo == "identical-dp") {
    a.regime = optimal_identical(pop, opt.budget, opt.pool_cap).regime;
  } else if (opt.algo == "var-greedy") {
    a.regime = var_greedy(pop, opt.budget, opt.pool_cap).regime;
  } else if (opt.algo == "approx-small") {
    auto r = approx_regime_small(pop, cap, opt.budget, opt.segments, opt.limits);
    a.regime = std::move(r.regime);
    a.guarantee = r.additive_guarantee;
  } else if (opt.algo == "oracle") {
    a.regime = brute_force_nonoverlapping(pop, cap, opt.budget, opt.limits).regime;
  } else {
    throw ValidationError("unknown algorithm '" + opt.algo + "'");
  }
  a.welfare = regime_welfare_nonoverlapping(pop, a.regime).total;
  a.runtime_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
  return a;
}

inline void print_allocation(std::ostream& out, const Population& pop, const AllocateOptions& opt,
                             const Allocation& a) {
  out << "algo=" << opt.algo << " n=" << pop.size() << " budget=" << opt.budget
      << " tests=" << a.regime.size() << " welfare=" << fmt(a.welfare) << " time_ms=" << fmt(a.runtime_ms);
  if (a.guarantee) out << " guarantee_add=" << fmt(*a.guarantee);
  out << '\n';
  for (std::size_t j = 0; j < a.regime.size(); ++j) {
    const auto& t = a.regime[j];
    out << "test " << j << ": welfare=" << fmt(test_welfare(pop, t)) << " size=" << t.size()
        << " members=" << join_members(t, pop) << '\n';
  }
}

struct BenchOptions {
  std::size_t n = 250;
  std::vector<std::size_t> budgets{2, 4, 6, 8, 10, 12};
  std::size_t pool_cap = 5;
  std::size_t trials = 20;
  std::uint64_t seed = 1;
  std::vector<std::string> algos{"greedy"};
  double epsilon = 0.1;
  std::size_t segments = 18;
  bool timing = true;
  std::size_t threads = 0;  // 0: hardware concurrency, capped by POOLTEST_THREADS
};

inline std::size_t worker_count(std::size_t requested, std::size_t jobs) {
  std::size_t count = requested != 0 ? requested : std::max(1U, std::thread::hardware_concurrency());
  if (const char* env = std::getenv("POOLTEST_THREADS")) {
    char* end = nullptr;
    const unsigned long cap = std::strtoul(env, &end, 10);
    if (end != env && *end == '\0' && cap > 0) count = std::min<std::size_t>(count, cap);
  }
  return std::max<std::size_t>(1, std::min(count, jobs));
}

/// Additive guarantee eps(K) * B for a population's MILP domain, or nullopt
/// when no individual has positive q and utility.
inline std::optional<double> additive_guarantee(const Population& pop, std::size_t pool_cap, std::size_t budget,
                                                std::size_t segments) {
  const auto clusters = ClusteredPopulation::from_population(pop);
  std::vector<Cluster> kept;
  for (const auto& c : clusters.clusters()) {
    if (c.q > 0.0 && c.utility > 0.0) kept.push_back(c);
  }
  if (kept.empty()) return std::nullopt;
  const auto d = log_welfare_domain(ClusteredPopulation(kept), pool_cap);
  return equal_error_partition(d.lower, d.upper, segments).epsilon() * static_cast<double>(budget);
}

/// Runs every (trial, B, algo) cell; writes the per-run CSV to `csv` and a
/// means table to `summary`. Output order is fixed regardless of threading.
inline void bench(const BenchOptions& opt, std::ostream& csv, std::ostream& summary, std::ostream& notices) {
  if (opt.trials == 0) throw ValidationError("--trials must be at least 1");
  if (opt.budgets.empty()) throw ValidationError("--budgets must not be empty");
  for (auto b : opt.budgets) {
    if (b == 0) throw ValidationError("budgets must be at least 1");
  }
  for (const auto& a : opt.algos) {
    if (std::find(allocation_algorithms().begin(), allocation_algorithms().end(), a) ==
        allocation_algorithms().end()) {
      throw ValidationError("unknown algorithm '" + a + "'");
    }
  }
  struct Cell {
    bool ran = false;
    double welfare = 0.0;
    double ms = 0.0;
    std::string skipped;
  };
  const std::size_t nb = opt.budgets.size();
  const std::size_t na = opt.algos.size();
  std::vector<Cell> cells(opt.trials * nb * na);
  std::vector<std::optional<double>> guarantees(opt.trials * nb);
  std::atomic<std::size_t> next{0};
  auto work = [&] {
    for (std::size_t trial = next++; trial < opt.trials; trial = next++) {
      const auto pop = generate_random_population(opt.n, opt.seed + trial);
      for (std::size_t b = 0; b < nb; ++b) {
        guarantees[trial * nb + b] = additive_guarantee(pop, opt.pool_cap, opt.budgets[b], opt.segments);
        for (std::size_t a = 0; a < na; ++a) {
          auto& cell = cells[(trial * nb + b) * na + a];
          AllocateOptions ao;
          ao.algo = opt.algos[a];
          ao.budget = opt.budgets[b];
          ao.pool_cap = opt.pool_cap;
          ao.epsilon = opt.epsilon;
          ao.segments = opt.segments;
          try {
            const auto r = allocate(pop, ao);
            cell.ran = true;
            cell.welfare = r.welfare;
            cell.ms = r.runtime_ms;
          } catch (const CapacityError& e) {
            cell.skipped = e.what();
          } catch (const ValidationError& e) {
            cell.skipped = e.what();
          }
        }
      }
    }
  };
  const std::size_t workers = worker_count(opt.threads, opt.trials);
  std::vector<std::thread> pool;
  for (std::size_t w = 1; w < workers; ++w) pool.emplace_back(work);
  work();
  for (auto& t : pool) t.join();

  std::vector<bool> noticed(na, false);
  csv << "trial,B,algo,welfare,time_ms\n";
  for (std::size_t trial = 0; trial < opt.trials; ++trial) {
    for (std::size_t b = 0; b < nb; ++b) {
      for (std::size_t a = 0; a < na; ++a) {
        const auto& cell = cells[(trial * nb + b) * na + a];
        if (!cell.ran) {
          if (!noticed[a]) notices << "skipping " << opt.algos[a] << ": " << cell.skipped << '\n';
          noticed[a] = true;
          continue;
        }
        csv << trial << ',' << opt.budgets[b] << ',' << opt.algos[a] << ',' << fmt(cell.welfare) << ','
            << (opt.timing ? fmt(cell.ms) : std::string("NA")) << '\n';
      }
    }
  }

  const auto greedy = std::find(opt.algos.begin(), opt.algos.end(), "greedy");
  summary << "B";
  for (const auto& a : opt.algos) summary << ",mean_welfare_" << a << ",mean_time_ms_" << a;
  for (const auto& a : opt.algos) {
    if (greedy != opt.algos.end() && a != "greedy") summary << ',' << a << "_over_greedy";
  }
  summary << ",guarantee_add\n";
  for (std::size_t b = 0; b < nb; ++b) {
    summary << opt.budgets[b];
    std::vector<double> sums(na, 0.0);
    std::vector<std::size_t> counts(na, 0);
    for (std::size_t a = 0; a < na; ++a) {
      double ms = 0.0;
      for (std::size_t trial = 0; trial < opt.trials; ++trial) {
        const auto& cell = cells[(trial * nb + b) * na + a];
        if (!cell.ran) continue;
        sums[a] += cell.welfare;
        ms += cell.ms;
        ++counts[a];
      }
      if (counts[a] == 0) {
        summary << ",NA,NA";
      } else {
        summary << ',' << fmt(sums[a] / counts[a]) << ','
                << (opt.timing ? fmt(ms / counts[a]) : std::string("NA"));
      }
    }
    if (greedy != opt.algos.end()) {
      const auto g = static_cast<std::size_t>(greedy - opt.algos.begin());
      for (std::size_t a = 0; a < na; ++a) {
        if (a == g) continue;
        if (counts[a] == 0 || counts[g] == 0 || sums[g] <= 0.0) {
          summary << ",NA";
        } else {
          summary << ',' << fmt((sums[a] / counts[a]) / (sums[g] / counts[g]));
        }
      }
    }
    double total = 0.0;
    std::size_t have = 0;
    for (std::size_t trial = 0; trial < opt.trials; ++trial) {
      if (const auto& v = guarantees[trial * nb + b]) {
        total += *v;
        ++have;
      }
    }
    summary << ',' << (have == 0 ? std::string("NA") : fmt(total / have)) << '\n';
  }
}

struct GainOptions {
  std::optional<std::string> preset;
  std::size_t n = 4;
  std::size_t budget = 2;
  std::optional<std::size_t> pool_cap;  // default n
  std::size_t max_overlap = 2;
  std::size_t trials = 20;
  std::uint64_t seed = 1;
};

inline void gain(const GainOptions& opt, std::ostream& out) {
  if (opt.preset) {
    if (*opt.preset != "prop1") throw ValidationError("unknown preset '" + *opt.preset + "'");
    const auto g = prop1_gain();
    out << "nonoverlapping=" << g.nonoverlapping.welfare << " overlapping=" << g.overlapping.welfare << '\n';
    out << g.ratio << '\n';
    return;
  }
  if (opt.budget == 0) throw ValidationError("--budget must be at least 1");
  if (opt.trials == 0) throw ValidationError("--trials must be at least 1");
  const std::size_t cap = opt.pool_cap.value_or(opt.n);
  const std::vector<double> utilities{1.0, 2.0, 3.0};
  out << "trial,nonoverlapping,overlapping,ratio,bound\n";
  for (std::size_t trial = 0; trial < opt.trials; ++trial) {
    const auto pop = generate_random_population(opt.n, opt.seed + trial, utilities);
    const auto r = gain_of_overlaps(pop, cap, opt.budget, opt.max_overlap);
    out << trial << ',' << fmt(r.nonoverlapping.welfare) << ',' << fmt(r.overlapping.welfare) << ','
        << fmt(r.ratio) << ',' << fmt(gain_bound_check(opt.budget)) << '\n';
  }
}

struct ExportOptions {
  std::optional<std::string> clusters_path;
  std::optional<std::string> population_path;
  std::size_t budget = 1;
  std::size_t pool_cap = 5;
  std::size_t segments = 18;
  std::string out;
};

inline MilpModel export_milp(const ExportOptions& opt, std::ostream& report, std::ostream& notices) {
  if (opt.clusters_path.has_value() == opt.population_path.has_value()) {
    throw ValidationError("give exactly one of --clusters or --population");
  }
  ClusteredPopulation clusters;
  if (opt.clusters_path) {
    std::ifstream in(*opt.clusters_path);
    if (!in) throw ValidationError("cannot open cluster file '" + *opt.clusters_path + "'");
    clusters = parse_clusters(in);
  } else {
    clusters = ClusteredPopulation::from_population(load_population(*opt.population_path));
  }
  auto model = build_milp(clusters, opt.pool_cap, opt.budget, opt.segments);
  for (auto c : model.excluded) notices << "warning: cluster " << c << " excluded (q = 0 or utility = 0)\n";
  export_lp(model, opt.out);
  report << "clusters=" << model.clusters.num_clusters() << " B=" << opt.budget << " G=" << opt.pool_cap
         << " K=" << opt.segments << " L=" << model.min_sum << " U=" << model.max_sum
         << " integer=" << model.count(VarType::kInteger) << " binary=" << model.count(VarType::kBinary)
         << " continuous=" << model.count(VarType::kContinuous) << " constraints=" << model.constraints().size()
         << " eps=" << fmt(model.approx.epsilon())
         << " guarantee_add=" << fmt(model.approx.epsilon() * static_cast<double>(opt.budget)) << '\n';
  return model;
}

/// One id per line; blank lines and lines starting with '#' are ignored.
inline std::vector<std::size_t> read_submitted(std::istream& in, const Population& pop) {
  std::map<std::string, std::size_t, std::less<>> index;
  for (std::size_t i = 0; i < pop.size(); ++i) index.emplace(pop[i].id, i);
  std::vector<std::size_t> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto id = detail::trim(line);
    if (id.empty() || id.front() == '#') continue;
    const auto it = index.find(id);
    if (it == index.end()) throw ParseError("unknown id '" + std::string(id) + "'", line_no);
    out.push_back(it->second);
  }
  return out;
}

struct RepoolOptions {
  std::string algo = "greedy";
  std::optional<std::size_t> budget;
  std::optional<std::size_t> pool_cap;
  std::size_t segments = 18;
};

inline RepoolResult repool_command(const Population& pop, const Regime& original,
                                   const std::vector<std::size_t>& submitted, const RepoolOptions& opt,
                                   std::ostream& out) {
  const std::size_t budget = opt.budget.value_or(original.budget());
  const std::size_t cap = opt.pool_cap.value_or(original.pool_cap());
  auto r = repool(pop, original, submitted, cap, budget, parse_repool_algo(opt.algo), opt.segments);
  out << "submitted=" << submitted.size() << " baseline_welfare=" << fmt(r.baseline_welfare)
      << " repool_welfare=" << fmt(r.welfare) << " tests=" << r.regime.size()
      << (r.kept_original ? " kept_original" : "") << '\n';
  for (std::size_t j = 0; j < r.regime.size(); ++j) {
    out << "test " << j << ": members=" << join_members(r.regime[j], pop) << '\n';
  }
  return r;
}

}  // namespace pooltest::cli

#endif  // POOLTEST_CLI_HPP
