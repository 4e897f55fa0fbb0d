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

#include <random>
#include <vector>

#include <gtest/gtest.h>

#include "pooltest/fptas.hpp"
#include "pooltest/oracle.hpp"
#include "test_support.hpp"

namespace pooltest {
namespace {

using Pool = ::pooltest::Test;

TEST(DpTableTest, RecurrenceExamples) {
  const std::vector<double> q{0.9, 0.8};
  const std::vector<std::int64_t> u{2, 2};
  EXPECT_DOUBLE_EQ(dp_best_subset(q, u, 1, 2, 1), 0.9);
  EXPECT_DOUBLE_EQ(dp_best_subset(q, u, 2, 4, 2), 0.72);
  EXPECT_DOUBLE_EQ(dp_best_subset(q, u, 2, 3, 1), 0.0);
  EXPECT_DOUBLE_EQ(dp_best_subset(q, u, 2, 2, 1), 0.9);
  EXPECT_DOUBLE_EQ(dp_best_subset(q, u, 0, 0, 0), 1.0);
}

TEST(DpTableTest, MatchesSubsetEnumeration) {
  std::mt19937_64 rng(1);
  std::uniform_int_distribution<int> pick_u(0, 6);
  std::uniform_int_distribution<int> pick_q(1, 10);
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t n = 1 + trial % 8;
    std::vector<double> q(n);
    std::vector<std::int64_t> u(n);
    for (std::size_t i = 0; i < n; ++i) {
      q[i] = pick_q(rng) / 10.0;
      u[i] = pick_u(rng);
    }
    const std::int64_t max_c = 6 * static_cast<std::int64_t>(n);
    DpTable table(q, u, n, max_c);
    std::vector<std::vector<double>> expect(static_cast<std::size_t>(max_c + 1), std::vector<double>(n + 1, 0.0));
    for (std::uint32_t m = 0; m < (1U << n); ++m) {
      double p = 1.0;
      std::int64_t c = 0;
      for (std::size_t i = 0; i < n; ++i) {
        if ((m >> i) & 1U) {
          p *= q[i];
          c += u[i];
        }
      }
      auto& cell = expect[static_cast<std::size_t>(c)][static_cast<std::size_t>(std::popcount(m))];
      cell = std::max(cell, p);
    }
    for (std::int64_t c = 0; c <= max_c; ++c) {
      for (std::size_t l = 0; l <= n; ++l) {
        ASSERT_NEAR(table.best_probability(c, l), expect[static_cast<std::size_t>(c)][l], 1e-12);
        const auto items = table.reconstruct(c, l);
        if (table.best_probability(c, l) > 0.0 && l > 0) {
          ASSERT_EQ(items.size(), l);
          double p = 1.0;
          std::int64_t sum = 0;
          for (auto i : items) {
            p *= q[i];
            sum += u[i];
          }
          ASSERT_EQ(sum, c);
          ASSERT_NEAR(p, table.best_probability(c, l), 1e-12);
        }
      }
    }
    // Adding an item never lowers any cell.
    if (n > 1) {
      DpTable shorter(std::span<const double>(q).first(n - 1), std::span<const std::int64_t>(u).first(n - 1), n,
                      max_c);
      for (std::int64_t c = 0; c <= max_c; ++c) {
        for (std::size_t l = 0; l <= n; ++l) ASSERT_GE(table.best_probability(c, l), shorter.best_probability(c, l));
      }
    }
  }
}

TEST(ExactSingleTestTest, MatchesOracle) {
  std::mt19937_64 rng(2);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t n = 1 + trial % 12;
    const std::size_t cap = 1 + trial % 5;
    const auto pop = test_support::random_population(rng, n);
    const auto dp = exact_single_test(pop, cap);
    const auto bf = brute_force_single_test(pop, cap);
    ASSERT_NEAR(dp.welfare, bf.welfare, 1e-9);
    ASSERT_LE(dp.test.size(), cap);
  }
}

TEST(ExactSingleTestTest, NonIntegralFallsBackToOracle) {
  const auto pop = Population::from_vectors({0.9, 0.7, 0.6}, {3.5, 2.0, 5.0});
  EXPECT_NEAR(exact_single_test(pop, 3).welfare, brute_force_single_test(pop, 3).welfare, 1e-12);
}

TEST(FptasConfigTest, KappaAndHalf) {
  const auto pop = Population::from_vectors({0.9, 0.4, 0.5, 0.0}, {4.0, 9.0, 2.0, 7.0});
  const auto c = make_fptas_config(pop, 0.2);
  EXPECT_EQ(c.half, (std::vector<std::size_t>{0, 2}));
  EXPECT_EQ(c.low, (std::vector<std::size_t>{1}));
  EXPECT_DOUBLE_EQ(c.kappa, 0.2 * 0.5 * 4.0 / 3.0);
  EXPECT_THROW(make_fptas_config(pop, 0.0), ValidationError);
  EXPECT_THROW(make_fptas_config(pop, 1.0), ValidationError);
}

TEST(ScaledObjectiveTest, DummyAndSingleLowIndividual) {
  const auto pop = Population::from_vectors({0.5, 0.5, 1.0}, {1.0, 1.0, 1.0});
  const double kappa = make_fptas_config(pop, 0.1).kappa;
  const auto dummy = scaled_objective(pop, 3, std::nullopt, kappa, 3);
  EXPECT_NEAR(test_welfare(pop, dummy.test), 1.0, 1e-12);
  EXPECT_LE(dummy.value, test_welfare(pop, dummy.test) + 1e-12);

  const auto low = Population::from_vectors({0.3}, {4.0});
  const auto z = scaled_objective(low, 0, 0, 0.1, 3);
  EXPECT_EQ(z.test, Pool({0}));
  EXPECT_NEAR(z.value, 1.2, 1e-12);
  EXPECT_THROW(scaled_objective(pop, 0, 0, kappa, 3), ValidationError);
}

TEST(FptasTest, Examples) {
  const auto pop = Population::from_vectors({0.9, 0.7, 0.6}, {3.0, 2.0, 5.0});
  EXPECT_GE(fptas_single_test(pop, 3, 0.01).welfare, 0.99 * 4.32 - 1e-12);
  const auto one = fptas_single_test(Population::from_vectors({0.3}, {2.0}), 2, 0.5);
  EXPECT_EQ(one.test, Pool({0}));
  EXPECT_NEAR(one.welfare, 0.6, 1e-12);
  EXPECT_THROW(fptas_single_test(Population::from_vectors({0.0, 0.0}, {1.0, 1.0}), 2, 0.1), ValidationError);
}

TEST(FptasTest, AllLowProbabilityPicksBestSingleton) {
  const auto pop = Population::from_vectors({0.4, 0.3, 0.2}, {1.0, 5.0, 2.0});
  const auto r = fptas_single_test(pop, 3, 0.1);
  EXPECT_EQ(r.test, Pool({1}));
}

TEST(FptasTest, GuaranteeAndStructure) {
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 300; ++trial) {
    const std::size_t n = 1 + trial % 12;
    const std::size_t cap = trial % 2 == 0 ? 3 : n;
    auto pop = test_support::random_population(rng, n);
    if (pop.viable_indices().empty()) continue;
    const double opt = brute_force_single_test(pop, cap).welfare;
    for (double eps : {0.05, 0.1, 0.3, 0.6}) {
      const auto r = fptas_single_test(pop, cap, eps);
      ASSERT_GE(r.welfare, (1.0 - eps) * opt - 1e-9) << "trial " << trial << " eps " << eps;
      ASSERT_LE(r.test.size(), cap);
      std::size_t low = 0;
      for (auto i : r.test.members()) {
        ASSERT_GT(pop.q(i), 0.0);
        low += pop.q(i) < 0.5 ? 1 : 0;
      }
      ASSERT_LE(low, 1u);
    }
  }
}

}  // namespace
}  // namespace pooltest
