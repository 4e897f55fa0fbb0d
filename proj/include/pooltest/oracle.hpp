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

// Exhaustive solvers used as ground truth for the approximate allocators.

#ifndef POOLTEST_ORACLE_HPP
#define POOLTEST_ORACLE_HPP

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <optional>
#include <type_traits>
#include <vector>

#include "pooltest/core.hpp"

namespace pooltest {

struct OracleLimits {
  std::size_t max_subsets = 10'000'000;
  std::size_t max_enumerated_individuals = 25;
};

struct SingleTestResult {
  Test test;
  double welfare = 0.0;
};

struct RegimeResult {
  Regime regime;
  double welfare = 0.0;
};

namespace detail {

/// a > b beyond floating noise; exact comparison for non-floating scalars.
template <class Score>
bool strictly_greater(const Score& a, const Score& b) {
  if constexpr (std::is_floating_point_v<Score>) {
    return a > b + 1e-12 * std::max(Score{1}, std::abs(b));
  } else {
    return b < a;
  }
}

template <class Score>
bool ties(const Score& a, const Score& b) {
  return !strictly_greater(a, b) && !strictly_greater(b, a);
}

/// Number of nonempty subsets of size at most `cap` of an `n`-set, saturating
/// at `limit + 1`.
inline std::size_t count_small_subsets(std::size_t n, std::size_t cap, std::size_t limit) {
  std::size_t total = 0;
  double binom = 1.0;
  for (std::size_t k = 1; k <= std::min(cap, n); ++k) {
    binom = binom * static_cast<double>(n - k + 1) / static_cast<double>(k);
    if (static_cast<double>(total) + binom > static_cast<double>(limit)) return limit + 1;
    total += static_cast<std::size_t>(std::llround(binom));
  }
  return total;
}

/// All nonempty subsets of {0..n-1} of size <= cap as bitmasks, in
/// lexicographic order of their sorted member lists.
inline std::vector<std::uint64_t> lex_subsets(std::size_t n, std::size_t cap) {
  std::vector<std::uint64_t> out;
  std::vector<std::size_t> stack;
  auto visit = [&](auto&& self, std::size_t start, std::uint64_t mask, std::size_t depth) -> void {
    for (std::size_t i = start; i < n; ++i) {
      const std::uint64_t next = mask | (std::uint64_t{1} << i);
      out.push_back(next);
      if (depth + 1 < cap) self(self, i + 1, next, depth + 1);
    }
  };
  if (cap > 0) visit(visit, 0, 0, 0);
  return out;
}

}  // namespace detail

/// Optimal single test of size in [1, G], by enumeration in lexicographic
/// order of member lists; the first maximizer wins ties. Individuals with
/// q = 0 are never pooled. Returns an empty test with welfare 0 when no
/// individual is viable.
inline SingleTestResult brute_force_single_test(const Population& pop, std::size_t pool_cap,
                                                const OracleLimits& limits = {}) {
  const auto viable = pop.viable_indices();
  if (detail::count_small_subsets(viable.size(), pool_cap, limits.max_subsets) > limits.max_subsets) {
    throw CapacityError("single-test enumeration exceeds " + std::to_string(limits.max_subsets) + " subsets");
  }
  SingleTestResult best;
  bool have = false;
  std::vector<std::size_t> current;
  std::vector<std::size_t> best_members;
  auto visit = [&](auto&& self, std::size_t start, double prob, double sum) -> void {
    for (std::size_t k = start; k < viable.size(); ++k) {
      const auto i = viable[k];
      const double p = prob * pop.q(i);
      const double s = sum + pop.utility(i);
      current.push_back(i);
      const double w = p * s;
      if (!have || detail::strictly_greater(w, best.welfare)) {
        best.welfare = w;
        best_members = current;
        have = true;
      }
      if (current.size() < pool_cap) self(self, k + 1, p, s);
      current.pop_back();
    }
  };
  visit(visit, 0, 1.0, 0.0);
  if (have) best.test = Test(best_members);
  return best;
}

enum class PackingMode { kAtMost, kExactly };

template <class Score>
struct Packing {
  bool feasible = false;
  Score value{};
  std::vector<std::uint32_t> tests;  // bitmasks over the packing universe
};

/// Maximizes the sum of per-test scores over families of pairwise-disjoint
/// nonempty tests of size <= cap drawn from a universe of n items, using at
/// most (or exactly) `budget` tests. Memoized over (remaining-items mask,
/// tests left). Ties prefer fewer covered items.
///
/// `score(mask)` is queried once per candidate test.
template <class Score, class ScoreFn>
Packing<Score> best_disjoint_packing(std::size_t n, std::size_t cap, std::size_t budget, ScoreFn score,
                                     PackingMode mode, const OracleLimits& limits = {}) {
  if (n > 20) throw CapacityError("disjoint packing limited to 20 individuals");
  double states = std::pow(3.0, static_cast<double>(n));
  if (states > static_cast<double>(limits.max_subsets)) {
    throw CapacityError("disjoint packing over " + std::to_string(n) + " individuals exceeds limits");
  }
  const std::size_t full = (std::size_t{1} << n);
  std::vector<std::optional<Score>> test_score(full);
  for (std::size_t m = 1; m < full; ++m) {
    if (static_cast<std::size_t>(std::popcount(m)) <= cap) test_score[m] = score(static_cast<std::uint32_t>(m));
  }
  const std::size_t levels = budget + 1;

  struct Cell {
    bool feasible = false;
    Score value{};
    std::uint32_t covered = 0;  // items used by the chosen tests
    std::uint32_t choice = 0;   // 0: lowest item untested
  };
  std::vector<Cell> table(full * levels);
  auto at = [&](std::size_t mask, std::size_t b) -> Cell& { return table[mask * levels + b]; };

  for (std::size_t b = 0; b < levels; ++b) {
    at(0, b).feasible = (mode == PackingMode::kAtMost) || b == 0;
  }
  auto better = [](const Cell& cand, const Cell& cur) {
    if (!cur.feasible) return cand.feasible;
    if (!cand.feasible) return false;
    if (detail::strictly_greater(cand.value, cur.value)) return true;
    if (detail::strictly_greater(cur.value, cand.value)) return false;
    return std::popcount(cand.covered) < std::popcount(cur.covered);
  };

  for (std::size_t mask = 1; mask < full; ++mask) {
    const std::size_t low = mask & (~mask + 1);
    const std::size_t rest = mask ^ low;
    for (std::size_t b = 0; b < levels; ++b) {
      Cell best = at(rest, b);
      best.choice = 0;
      if (b > 0) {
        for (std::size_t s = rest;; s = (s - 1) & rest) {
          const std::size_t t = s | low;
          if (test_score[t].has_value()) {
            const Cell& sub = at(mask ^ t, b - 1);
            if (sub.feasible) {
              Cell cand{true, *test_score[t] + sub.value,
                        static_cast<std::uint32_t>(sub.covered | t), static_cast<std::uint32_t>(t)};
              if (better(cand, best)) best = cand;
            }
          }
          if (s == 0) break;
        }
      }
      at(mask, b) = best;
    }
  }

  Packing<Score> out;
  const Cell& root = at(full - 1, budget);
  out.feasible = root.feasible;
  if (!root.feasible) return out;
  out.value = root.value;
  std::size_t mask = full - 1;
  std::size_t b = budget;
  while (mask != 0) {
    const Cell& c = at(mask, b);
    if (c.choice == 0) {
      mask ^= mask & (~mask + 1);
    } else {
      out.tests.push_back(c.choice);
      mask ^= c.choice;
      --b;
    }
  }
  std::sort(out.tests.begin(), out.tests.end(), [](std::uint32_t a, std::uint32_t b2) {
    return std::countr_zero(a) < std::countr_zero(b2);
  });
  return out;
}

/// Optimal non-overlapping regime with at most B tests of size <= G. Output
/// tests are sorted by smallest member.
inline RegimeResult brute_force_nonoverlapping(const Population& pop, std::size_t pool_cap, std::size_t budget,
                                               const OracleLimits& limits = {}) {
  const auto viable = pop.viable_indices();
  const std::size_t tests_used = std::min(budget, viable.size());
  auto score = [&](std::uint32_t mask) {
    double prob = 1.0;
    double sum = 0.0;
    for (std::uint32_t m = mask; m != 0; m &= m - 1) {
      const auto i = viable[static_cast<std::size_t>(std::countr_zero(m))];
      prob *= pop.q(i);
      sum += pop.utility(i);
    }
    return prob * sum;
  };
  auto packing = best_disjoint_packing<double>(viable.size(), pool_cap, tests_used, score,
                                               PackingMode::kAtMost, limits);
  RegimeResult result{Regime(budget, pool_cap), 0.0};
  for (auto mask : packing.tests) {
    std::vector<std::size_t> members;
    for (std::uint32_t m = mask; m != 0; m &= m - 1) members.push_back(viable[std::countr_zero(m)]);
    result.regime.add(Test(std::move(members)));
  }
  result.welfare = regime_welfare_nonoverlapping(pop, result.regime).total;
  return result;
}

/// Optimal regime with at most B tests of size <= G in which every individual
/// appears in at most `max_overlap` tests. Regimes are explored as sets of
/// distinct tests (welfare does not depend on test order; duplicated tests
/// add nothing). Ties prefer fewer total memberships, then enumeration order.
inline RegimeResult brute_force_overlapping(const Population& pop, std::size_t pool_cap, std::size_t budget,
                                            std::size_t max_overlap, const OracleLimits& limits = {}) {
  if (max_overlap == 0) throw ValidationError("max_overlap must be at least 1");
  const auto viable = pop.viable_indices();
  const std::size_t nv = viable.size();
  if (nv > 20 || nv > limits.max_enumerated_individuals) {
    throw CapacityError("overlapping search limited to 20 viable individuals");
  }
  const std::size_t num_candidates = detail::count_small_subsets(nv, pool_cap, limits.max_subsets);
  if (num_candidates > limits.max_subsets) throw CapacityError("too many candidate tests");
  // Number of regimes: sum_{k <= B} C(num_candidates, k).
  {
    double total = 0.0;
    double binom = 1.0;
    for (std::size_t k = 1; k <= std::min(budget, num_candidates); ++k) {
      binom = binom * static_cast<double>(num_candidates - k + 1) / static_cast<double>(k);
      total += binom;
    }
    if (total > static_cast<double>(limits.max_subsets)) {
      throw CapacityError("overlapping search over " + std::to_string(num_candidates) +
                          " candidate tests and budget " + std::to_string(budget) + " exceeds limits");
    }
  }
  const auto candidates = detail::lex_subsets(nv, pool_cap);

  std::vector<double> q_of(std::size_t{1} << nv, 1.0);
  for (std::size_t m = 1; m < q_of.size(); ++m) {
    const std::size_t low = static_cast<std::size_t>(std::countr_zero(m));
    q_of[m] = q_of[m & (m - 1)] * pop.q(viable[low]);
  }

  std::vector<std::uint64_t> chosen;
  std::vector<std::size_t> multiplicity(nv, 0);
  auto evaluate = [&]() {
    double total = 0.0;
    std::uint64_t tested = 0;
    for (auto t : chosen) tested |= t;
    for (std::uint64_t m = tested; m != 0; m &= m - 1) {
      const std::size_t i = static_cast<std::size_t>(std::countr_zero(m));
      std::uint64_t mine[64];
      std::size_t count = 0;
      for (auto t : chosen) {
        if ((t >> i) & 1U) mine[count++] = t;
      }
      double prob = 0.0;
      for (std::uint32_t s = 1; s < (std::uint32_t{1} << count); ++s) {
        std::uint64_t uni = 0;
        for (std::size_t k = 0; k < count; ++k) {
          if ((s >> k) & 1U) uni |= mine[k];
        }
        prob += (std::popcount(s) % 2 == 1 ? 1.0 : -1.0) * q_of[uni];
      }
      total += pop.utility(viable[i]) * prob;
    }
    return total;
  };

  std::vector<std::uint64_t> best_tests;
  double best_value = 0.0;
  std::size_t best_memberships = 0;
  std::size_t memberships = 0;
  auto visit = [&](auto&& self, std::size_t start) -> void {
    for (std::size_t c = start; c < candidates.size(); ++c) {
      const std::uint64_t t = candidates[c];
      bool fits = true;
      for (std::uint64_t m = t; m != 0; m &= m - 1) {
        if (multiplicity[std::countr_zero(m)] >= max_overlap) {
          fits = false;
          break;
        }
      }
      if (!fits) continue;
      for (std::uint64_t m = t; m != 0; m &= m - 1) ++multiplicity[std::countr_zero(m)];
      chosen.push_back(t);
      memberships += static_cast<std::size_t>(std::popcount(t));
      const double value = evaluate();
      if (detail::strictly_greater(value, best_value) ||
          (detail::ties(value, best_value) && memberships < best_memberships)) {
        best_value = value;
        best_tests = chosen;
        best_memberships = memberships;
      }
      if (chosen.size() < budget) self(self, c + 1);
      memberships -= static_cast<std::size_t>(std::popcount(t));
      chosen.pop_back();
      for (std::uint64_t m = t; m != 0; m &= m - 1) --multiplicity[std::countr_zero(m)];
    }
  };
  visit(visit, 0);

  RegimeResult result{Regime(budget, pool_cap), 0.0};
  for (auto t : best_tests) {
    std::vector<std::size_t> members;
    for (std::uint64_t m = t; m != 0; m &= m - 1) members.push_back(viable[std::countr_zero(m)]);
    result.regime.add(Test(std::move(members)));
  }
  result.welfare = regime_welfare_exact(pop, result.regime, limits.max_enumerated_individuals).total;
  return result;
}

/// Removes empty and repeated tests, then repeatedly replaces t_j by
/// t_j \ t_j' whenever an earlier test t_j' has only certainly-healthy
/// members outside t_j. Neither step lowers welfare.
inline Regime normalize_minimal(const Population& pop, const Regime& regime) {
  std::vector<Test> tests;
  for (const auto& t : regime.tests()) {
    if (!t.empty() && std::find(tests.begin(), tests.end(), t) == tests.end()) tests.push_back(t);
  }
  bool changed = true;
  while (changed) {
    changed = false;
    for (std::size_t j = 0; j < tests.size() && !changed; ++j) {
      for (std::size_t jp = 0; jp < j && !changed; ++jp) {
        if (!tests[j].intersects(tests[jp])) continue;
        bool outside_certain = true;
        for (auto i : tests[jp].members()) {
          if (!tests[j].contains(i) && pop.q(i) < 1.0) {
            outside_certain = false;
            break;
          }
        }
        if (!outside_certain) continue;
        std::vector<std::size_t> reduced;
        for (auto i : tests[j].members()) {
          if (!tests[jp].contains(i)) reduced.push_back(i);
        }
        if (reduced.empty()) {
          tests.erase(tests.begin() + static_cast<std::ptrdiff_t>(j));
        } else {
          tests[j] = Test(std::move(reduced));
        }
        changed = true;
      }
    }
  }
  return Regime(regime.budget(), regime.pool_cap(), std::move(tests));
}

/// Every member of every test has a positive probability of that test being
/// pivotal for them.
inline bool pivotal_probabilities_positive(const Population& pop, const Regime& regime,
                                           std::size_t max_enumerated = 25) {
  const auto report = regime_welfare_exact(pop, regime, max_enumerated);
  for (std::size_t j = 0; j < regime.size(); ++j) {
    for (auto i : regime[j].members()) {
      if (!(report.pivotal[i][j] > 0.0)) return false;
    }
  }
  return true;
}

/// For every test t and proper nonempty subset S with q_S < alpha,
/// q_{t \ S} >= 1 - alpha.
inline bool split_bound_holds(const Population& pop, const Regime& regime, double alpha,
                              double tolerance = kTolerance) {
  for (const auto& t : regime.tests()) {
    const std::size_t k = t.size();
    if (k < 2) continue;
    if (k > 24) throw CapacityError("split check limited to tests of size 24");
    const auto members = t.members();
    for (std::uint32_t s = 1; s + 1 < (std::uint32_t{1} << k); ++s) {
      double q_in = 1.0;
      double q_out = 1.0;
      for (std::size_t b = 0; b < k; ++b) {
        if ((s >> b) & 1U) q_in *= pop.q(members[b]); else q_out *= pop.q(members[b]);
      }
      if (q_in < alpha - tolerance && q_out < 1.0 - alpha - tolerance) return false;
    }
  }
  return true;
}

}  // namespace pooltest

#endif  // POOLTEST_ORACLE_HPP
