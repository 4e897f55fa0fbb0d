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

// Identical utilities. With q sorted non-increasing, some optimal
// non-overlapping regime pools contiguous blocks of the sorted order, the
// largest block first.

#ifndef POOLTEST_IDENTICAL_HPP
#define POOLTEST_IDENTICAL_HPP

#include <algorithm>
#include <cstddef>
#include <numeric>
#include <optional>
#include <vector>

#include "pooltest/core.hpp"
#include "pooltest/oracle.hpp"

namespace pooltest {

/// Indices sorted by q descending; equal q keeps index order.
inline std::vector<std::size_t> descending_q_order(const Population& pop) {
  std::vector<std::size_t> order(pop.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return pop.q(a) > pop.q(b); });
  return order;
}

namespace detail {

inline void require_identical_instance(const Population& pop, std::optional<std::size_t> pool_cap) {
  if (!pop.uniform_utilities()) throw ValidationError("identical-utility algorithms need equal utilities");
  if (pool_cap && *pool_cap < pop.size()) {
    throw ValidationError("identical-utility algorithms do not support a pool cap below n");
  }
}

}  // namespace detail

/// Exact optimum for equal utilities: tries every k <= n and every split of
/// the first k sorted individuals into blocks k_1 >= ... >= k_B.
inline RegimeResult optimal_identical(const Population& pop, std::size_t budget,
                                      std::optional<std::size_t> pool_cap = std::nullopt) {
  detail::require_identical_instance(pop, pool_cap);
  if (budget == 0) throw ValidationError("budget must be at least 1");
  const std::size_t n = pop.size();
  if (n > 60 || budget > 4) throw CapacityError("optimal_identical limited to n <= 60 and B <= 4");
  RegimeResult result{Regime(budget, n), 0.0};
  if (n == 0) return result;
  const double u = pop.utility(0);
  const auto order = descending_q_order(pop);

  // block[a][len]: product of sorted q over positions [a, a + len).
  std::vector<std::vector<double>> block(n + 1, std::vector<double>(n + 1, 0.0));
  for (std::size_t a = 0; a <= n; ++a) {
    block[a][0] = 1.0;
    for (std::size_t len = 1; a + len <= n; ++len) block[a][len] = block[a][len - 1] * pop.q(order[a + len - 1]);
  }

  std::vector<std::size_t> sizes;
  std::vector<std::size_t> best_sizes;
  double best = 0.0;
  // Non-increasing block sizes; `cap` bounds the next block.
  auto visit = [&](auto&& self, std::size_t start, std::size_t cap, double welfare) -> void {
    if (!sizes.empty() && detail::strictly_greater(welfare, best)) {
      best = welfare;
      best_sizes = sizes;
    }
    if (sizes.size() == budget) return;
    for (std::size_t len = 1; len <= std::min(cap, n - start); ++len) {
      sizes.push_back(len);
      self(self, start + len, len, welfare + u * static_cast<double>(len) * block[start][len]);
      sizes.pop_back();
    }
  };
  visit(visit, 0, n, 0.0);

  std::size_t pos = 0;
  for (auto len : best_sizes) {
    std::vector<std::size_t> members(order.begin() + static_cast<std::ptrdiff_t>(pos),
                                     order.begin() + static_cast<std::ptrdiff_t>(pos + len));
    result.regime.add(Test(std::move(members)));
    pos += len;
  }
  result.welfare = regime_welfare_nonoverlapping(pop, result.regime).total;
  return result;
}

/// var-Greedy: each round opens a test with the next individual in q order
/// and keeps appending while that strictly raises the test's welfare.
inline RegimeResult var_greedy(const Population& pop, std::size_t budget,
                               std::optional<std::size_t> pool_cap = std::nullopt) {
  detail::require_identical_instance(pop, pool_cap);
  if (budget == 0) throw ValidationError("budget must be at least 1");
  const std::size_t n = pop.size();
  RegimeResult result{Regime(budget, n), 0.0};
  const auto order = descending_q_order(pop);
  std::size_t next = 0;
  for (std::size_t round = 0; round < budget && next < n; ++round) {
    if (pop.q(order[next]) == 0.0) break;
    std::vector<std::size_t> members{order[next]};
    double prob = pop.q(order[next]);
    ++next;
    while (next < n) {
      const double grown = prob * pop.q(order[next]) * static_cast<double>(members.size() + 1);
      if (!(grown > prob * static_cast<double>(members.size()))) break;
      prob *= pop.q(order[next]);
      members.push_back(order[next]);
      ++next;
    }
    result.regime.add(Test(std::move(members)));
  }
  result.welfare = regime_welfare_nonoverlapping(pop, result.regime).total;
  return result;
}

}  // namespace pooltest

#endif  // POOLTEST_IDENTICAL_HPP
