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

// Greedy non-overlapping allocation: each round pools the best single test
// over the individuals not yet tested.

#ifndef POOLTEST_GREEDY_HPP
#define POOLTEST_GREEDY_HPP

#include <cmath>
#include <cstddef>
#include <vector>

#include "pooltest/clusters.hpp"
#include "pooltest/core.hpp"
#include "pooltest/fptas.hpp"
#include "pooltest/oracle.hpp"

namespace pooltest {

/// How each greedy round finds its test.
struct Subroutine {
  enum class Kind {
    kOracle,  // brute-force enumeration (constant pool cap)
    kExact,   // exact DP for integral utilities, brute force otherwise
    kFptas,   // (1 - epsilon)-approximate DP
  };
  Kind kind = Kind::kOracle;
  double epsilon = 0.0;

  static Subroutine oracle() { return {Kind::kOracle, 0.0}; }
  static Subroutine exact() { return {Kind::kExact, 0.0}; }
  static Subroutine fptas(double epsilon) { return {Kind::kFptas, epsilon}; }
};

struct GreedyRound {
  Test test;
  double welfare = 0.0;
  std::size_t remaining = 0;  // untested viable individuals after this round
};

struct GreedyTrace {
  std::vector<GreedyRound> rounds;
};

struct GreedyResult {
  Regime regime;
  double welfare = 0.0;
  GreedyTrace trace;
};

inline SingleTestResult run_subroutine(const Population& pop, std::size_t pool_cap, const Subroutine& sub,
                                       const OracleLimits& limits = {}) {
  switch (sub.kind) {
    case Subroutine::Kind::kOracle: return brute_force_single_test(pop, pool_cap, limits);
    case Subroutine::Kind::kExact: return exact_single_test(pop, pool_cap, limits);
    case Subroutine::Kind::kFptas: return fptas_single_test(pop, pool_cap, sub.epsilon);
  }
  return {};
}

/// Runs up to B rounds; stops early once the best remaining test has no
/// welfare.
inline GreedyResult greedy_regime(const Population& pop, std::size_t pool_cap, std::size_t budget,
                                  const Subroutine& sub, const OracleLimits& limits = {}) {
  if (budget == 0) throw ValidationError("budget must be at least 1");
  if (pool_cap == 0) throw ValidationError("pool cap must be at least 1");
  GreedyResult result{Regime(budget, pool_cap), 0.0, {}};
  std::vector<std::size_t> remaining = pop.viable_indices();
  for (std::size_t round = 0; round < budget && !remaining.empty(); ++round) {
    const auto local = run_subroutine(pop.subset(remaining), pool_cap, sub, limits);
    if (local.test.empty() || !(local.welfare > 0.0)) break;
    std::vector<std::size_t> members;
    for (auto k : local.test.members()) members.push_back(remaining[k]);
    Test test(std::move(members));
    std::vector<std::size_t> next;
    for (auto i : remaining) {
      if (!test.contains(i)) next.push_back(i);
    }
    remaining = std::move(next);
    const double w = test_welfare(pop, test);
    result.trace.rounds.push_back({test, w, remaining.size()});
    result.welfare += w;
    result.regime.add(std::move(test));
  }
  return result;
}

struct ClusterRegime {
  Regime regime;  // over the expanded population
  double welfare = 0.0;
  std::vector<std::size_t> single_test;  // per-cluster counts of the optimal single test
  double single_test_welfare = 0.0;
  /// True when B disjoint copies of the optimal single test fit; the result
  /// is then optimal even among overlapping regimes. False means the greedy
  /// fallback was used.
  bool replicated = false;
};

/// Optimal single test over a clustered population, as per-cluster counts.
/// Ties prefer compositions that can be copied B times, then fewer members.
inline std::vector<std::size_t> best_cluster_test(const ClusteredPopulation& clusters, std::size_t pool_cap,
                                                  std::size_t budget, double* welfare_out = nullptr,
                                                  const OracleLimits& limits = {}) {
  const std::size_t k = clusters.num_clusters();
  std::vector<std::size_t> counts(k, 0);
  std::vector<std::size_t> best(k, 0);
  double best_welfare = -1.0;
  bool best_fits = false;
  std::size_t best_size = 0;
  std::size_t visited = 0;
  auto fits = [&](const std::vector<std::size_t>& x) {
    for (std::size_t c = 0; c < k; ++c) {
      if (budget * x[c] > clusters[c].size) return false;
    }
    return true;
  };
  auto visit = [&](auto&& self, std::size_t c, std::size_t size, double prob, double sum) -> void {
    if (++visited > limits.max_subsets) throw CapacityError("cluster composition enumeration exceeds limits");
    if (c == k) {
      if (size == 0) return;
      const double w = prob * sum;
      const bool f = fits(counts);
      bool take = best_welfare < 0.0 || detail::strictly_greater(w, best_welfare);
      if (!take && detail::ties(w, best_welfare)) {
        take = (f && !best_fits) || (f == best_fits && size < best_size);
      }
      if (take) {
        best = counts;
        best_welfare = w;
        best_fits = f;
        best_size = size;
      }
      return;
    }
    const auto& cl = clusters[c];
    const std::size_t max_count = cl.q > 0.0 ? std::min(cl.size, pool_cap - size) : 0;
    double p = prob;
    for (std::size_t x = 0; x <= max_count; ++x) {
      counts[c] = x;
      self(self, c + 1, size + x, p, sum + static_cast<double>(x) * cl.utility);
      p *= cl.q;
    }
    counts[c] = 0;
  };
  visit(visit, 0, 0, 1.0, 0.0);
  if (welfare_out != nullptr) *welfare_out = std::max(best_welfare, 0.0);
  return best;
}

/// B disjoint copies of the optimal single test when every cluster holds
/// enough members; otherwise greedy on the expanded population.
inline ClusterRegime cluster_replicate(const ClusteredPopulation& clusters, std::size_t pool_cap, std::size_t budget,
                                       const OracleLimits& limits = {}) {
  if (budget == 0) throw ValidationError("budget must be at least 1");
  if (pool_cap == 0) throw ValidationError("pool cap must be at least 1");
  ClusterRegime out;
  out.single_test = best_cluster_test(clusters, pool_cap, budget, &out.single_test_welfare, limits);
  bool fits = true;
  std::size_t size = 0;
  for (std::size_t c = 0; c < clusters.num_clusters(); ++c) {
    fits = fits && budget * out.single_test[c] <= clusters[c].size;
    size += out.single_test[c];
  }
  if (fits && size > 0) {
    ClusterAssignment copies(budget, out.single_test);
    out.regime = materialize(clusters, copies, pool_cap);
    out.welfare = static_cast<double>(budget) * out.single_test_welfare;
    out.replicated = true;
    return out;
  }
  const auto greedy = greedy_regime(clusters.expand(), pool_cap, budget, Subroutine::exact(), limits);
  out.regime = greedy.regime;
  out.welfare = greedy.welfare;
  return out;
}

}  // namespace pooltest

#endif  // POOLTEST_GREEDY_HPP
