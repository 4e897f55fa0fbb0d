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

#include <cmath>
#include <random>
#include <vector>

#include <gtest/gtest.h>

#include "pooltest/identical.hpp"
#include "pooltest/oracle.hpp"
#include "test_support.hpp"

namespace pooltest {
namespace {

using Pool = ::pooltest::Test;

Population uniform(std::mt19937_64& rng, std::size_t n, double u = 1.0) {
  std::uniform_int_distribution<int> pick(0, 10);
  std::vector<double> q(n);
  std::vector<double> util(n, u);
  for (auto& v : q) v = pick(rng) / 10.0;
  return Population::from_vectors(q, util);
}

TEST(OptimalIdenticalTest, Examples) {
  const auto a = Population::from_vectors({0.9, 0.9, 0.9, 0.4}, {1, 1, 1, 1});
  EXPECT_NEAR(optimal_identical(a, 2).welfare, brute_force_nonoverlapping(a, 4, 2).welfare, 1e-12);

  const auto b = Population::from_vectors({1.0, 1.0}, {1, 1});
  const auto rb = optimal_identical(b, 1);
  EXPECT_EQ(rb.regime[0], Pool({0, 1}));
  EXPECT_DOUBLE_EQ(rb.welfare, 2.0);

  const auto c = Population::from_vectors({1.0, 0.5, 0.5}, {1, 1, 1});
  EXPECT_NEAR(optimal_identical(c, 2).welfare, 1.5, 1e-12);
}

TEST(OptimalIdenticalTest, RejectsMismatchedInstances) {
  const auto pop = Population::from_vectors({0.9, 0.8}, {1.0, 2.0});
  EXPECT_THROW(optimal_identical(pop, 2), ValidationError);
  EXPECT_THROW(var_greedy(pop, 2), ValidationError);
  const auto same = Population::from_vectors({0.9, 0.8, 0.7}, {1.0, 1.0, 1.0});
  EXPECT_THROW(optimal_identical(same, 2, 2), ValidationError);
  EXPECT_NO_THROW(optimal_identical(same, 2, 3));
  EXPECT_THROW(optimal_identical(same, 5), CapacityError);
}

TEST(OptimalIdenticalTest, MatchesOracleWithPrefixStructure) {
  std::mt19937_64 rng(1);
  for (int trial = 0; trial < 80; ++trial) {
    const std::size_t n = 1 + trial % 12;
    const std::size_t budget = 1 + trial % 3;
    const auto pop = uniform(rng, n, 1.0 + trial % 4);
    const auto r = optimal_identical(pop, budget);
    ASSERT_NEAR(r.welfare, brute_force_nonoverlapping(pop, n, budget).welfare, 1e-9);
    const auto order = descending_q_order(pop);
    std::size_t pos = 0;
    for (std::size_t j = 0; j < r.regime.size(); ++j) {
      const auto& t = r.regime[j];
      if (j > 0) {
        ASSERT_LE(t.size(), r.regime[j - 1].size());
      }
      std::vector<std::size_t> expected(order.begin() + static_cast<std::ptrdiff_t>(pos),
                                        order.begin() + static_cast<std::ptrdiff_t>(pos + t.size()));
      ASSERT_EQ(t, Pool(expected));
      pos += t.size();
    }
  }
}

TEST(VarGreedyTest, StepByStepExample) {
  const auto pop = Population::from_vectors({0.9, 0.9, 0.5}, {1, 1, 1});
  const auto r = var_greedy(pop, 1);
  ASSERT_EQ(r.regime.size(), 1u);
  EXPECT_EQ(r.regime[0], Pool({0, 1}));
  EXPECT_NEAR(r.welfare, 1.62, 1e-12);
}

TEST(VarGreedyTest, AllHealthyTestsEveryone) {
  const auto pop = Population::from_vectors({1, 1, 1, 1, 1}, {1, 1, 1, 1, 1});
  EXPECT_DOUBLE_EQ(var_greedy(pop, 1).welfare, 5.0);
}

TEST(VarGreedyTest, WithinFactorEAndStoppingRule) {
  std::mt19937_64 rng(2);
  for (int trial = 0; trial < 120; ++trial) {
    const std::size_t n = 1 + trial % 12;
    const std::size_t budget = 1 + trial % 3;
    const auto pop = uniform(rng, n);
    const auto g = var_greedy(pop, budget);
    const double opt = brute_force_nonoverlapping(pop, n, budget).welfare;
    if (opt > 0.0) {
      ASSERT_LE(opt / g.welfare, std::exp(1.0) + 1e-9);
    }
    // Appending the next individual in q order to a finished test would not help.
    const auto order = descending_q_order(pop);
    std::size_t pos = 0;
    for (const auto& t : g.regime.tests()) {
      pos += t.size();
      if (pos < n) {
        const double qt = negative_probability(pop, t);
        ASSERT_LE(qt * pop.q(order[pos]) * static_cast<double>(t.size() + 1), qt * static_cast<double>(t.size()));
      }
    }
  }
}

}  // namespace
}  // namespace pooltest
