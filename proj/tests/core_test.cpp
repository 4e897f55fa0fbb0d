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

#include "pooltest/core.hpp"
#include "test_support.hpp"

namespace pooltest {
namespace {

using Pool = ::pooltest::Test;

Population prop1() { return Population::from_vectors({0.5, 0.5, 1.0}, {1.0, 1.0, 1.0}); }
Population small3() { return Population::from_vectors({0.9, 0.7, 0.6}, {3.0, 2.0, 5.0}); }

TEST(PopulationTest, RejectsInvalidEntries) {
  EXPECT_THROW(Population::from_vectors({1.2}, {1.0}), ValidationError);
  EXPECT_THROW(Population::from_vectors({-0.1}, {1.0}), ValidationError);
  EXPECT_THROW(Population::from_vectors({0.5}, {-1.0}), ValidationError);
  EXPECT_THROW(Population::from_vectors({0.5, 0.5}, {1.0}), ValidationError);
  EXPECT_THROW(Population({{"a", 1.0, 0.5}, {"a", 2.0, 0.5}}), ValidationError);
}

TEST(PopulationTest, ViableExcludesZeroQ) {
  const auto pop = Population::from_vectors({0.0, 0.3, 1.0}, {1.0, 1.0, 1.0});
  EXPECT_EQ(pop.viable_indices(), (std::vector<std::size_t>{1, 2}));
  EXPECT_DOUBLE_EQ(pop.p(1), 0.7);
}

TEST(PoolTypeTest, SortsMembersAndRejectsDuplicates) {
  Pool t({3, 1, 2});
  EXPECT_EQ(std::vector<std::size_t>(t.members().begin(), t.members().end()), (std::vector<std::size_t>{1, 2, 3}));
  EXPECT_THROW(Pool({1, 1}), ValidationError);
  EXPECT_EQ(Pool::from_mask(t.mask()), t);
}

TEST(TestWelfareTest, ProductTimesSum) {
  const auto pop = prop1();
  EXPECT_DOUBLE_EQ(test_welfare(pop, Pool({0, 1})), 0.5);
  EXPECT_DOUBLE_EQ(test_welfare(pop, Pool({2})), 1.0);
  EXPECT_NEAR(test_welfare(small3(), Pool({0, 2})), 4.32, 1e-12);
  EXPECT_DOUBLE_EQ(test_welfare(pop, Pool()), 0.0);
}

TEST(RegimeWelfareTest, NonOverlappingSumsTests) {
  const auto pop = prop1();
  EXPECT_DOUBLE_EQ(regime_welfare_nonoverlapping(pop, Regime(2, 3, {Pool({0, 1}), Pool({2})})).total, 1.5);
  EXPECT_DOUBLE_EQ(regime_welfare_nonoverlapping(pop, Regime(2, 3)).total, 0.0);
  EXPECT_NEAR(regime_welfare_nonoverlapping(small3(), Regime(2, 2, {Pool({0, 1}), Pool({2})})).total, 6.15, 1e-12);
}

TEST(RegimeWelfareTest, NonOverlappingRejectsOverlap) {
  const Regime r(2, 3, {Pool({0, 2}), Pool({1, 2})});
  EXPECT_THROW(regime_welfare_nonoverlapping(prop1(), r), ValidationError);
}

TEST(RegimeWelfareTest, OutOfRangeIndex) {
  EXPECT_THROW(regime_welfare_nonoverlapping(prop1(), Regime(1, 3, {Pool({5})})), ValidationError);
  EXPECT_THROW(regime_welfare_exact(prop1(), Regime(1, 3, {Pool({5})})), ValidationError);
}

TEST(RegimeWelfareTest, ExactOverlappingExample) {
  const auto report = regime_welfare_exact(prop1(), Regime(2, 3, {Pool({0, 2}), Pool({1, 2})}));
  EXPECT_NEAR(report.total, 1.75, 1e-12);
  EXPECT_NEAR(report.per_individual[0], 0.5, 1e-12);
  EXPECT_NEAR(report.per_individual[1], 0.5, 1e-12);
  EXPECT_NEAR(report.per_individual[2], 0.75, 1e-12);
  EXPECT_NEAR(report.pivotal[2][0], 0.5, 1e-12);
  EXPECT_NEAR(report.pivotal[2][1], 0.25, 1e-12);
  EXPECT_NEAR(report.pivotal[1][0], 0.0, 1e-12);
}

TEST(RegimeWelfareTest, DuplicateTestAddsNothing) {
  const auto pop = Population::from_vectors({0.5, 0.5}, {1.0, 1.0});
  EXPECT_NEAR(regime_welfare_exact(pop, Regime(2, 2, {Pool({0, 1}), Pool({0, 1})})).total, 0.5, 1e-12);
}

TEST(RegimeWelfareTest, ExactCapacity) {
  std::mt19937_64 rng(1);
  const auto pop = test_support::random_population(rng, 30, 10, false);
  std::vector<std::size_t> all(30);
  for (std::size_t i = 0; i < 30; ++i) all[i] = i;
  EXPECT_THROW(regime_welfare_exact(pop, Regime(1, 30, {Pool(all)})), CapacityError);
}

TEST(RegimeWelfareTest, ExactMatchesNaiveEnumeration) {
  std::mt19937_64 rng(7);
  std::uniform_int_distribution<int> size(1, 4);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t n = 2 + trial % 7;
    const auto pop = test_support::random_population(rng, n);
    std::uniform_int_distribution<std::size_t> pick(0, n - 1);
    Regime regime(3, 4);
    for (int j = 0; j < 3; ++j) {
      std::vector<std::size_t> members;
      for (int k = size(rng); k > 0; --k) {
        const auto i = pick(rng);
        if (std::find(members.begin(), members.end(), i) == members.end()) members.push_back(i);
      }
      regime.add(Pool(members));
    }
    const auto report = regime_welfare_exact(pop, regime);
    ASSERT_NEAR(report.total, test_support::naive_welfare(pop, test_support::member_lists(regime)), 1e-9);
    ASSERT_NEAR(report.total, inclusion_exclusion_welfare(pop, regime), 1e-9);
    double from_individuals = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      double sum = 0.0;
      for (double p : report.pivotal[i]) {
        ASSERT_GE(p, -1e-12);
        ASSERT_LE(p, 1.0 + 1e-12);
        sum += p;
      }
      ASSERT_NEAR(sum, report.per_individual[i], 1e-9);
      ASSERT_LE(report.per_individual[i], 1.0 + 1e-12);
      from_individuals += pop.utility(i) * report.per_individual[i];
    }
    ASSERT_NEAR(from_individuals, report.total, 1e-9);
  }
}

TEST(RegimeWelfareTest, ExactAgreesOnDisjointRegimes) {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t n = 1 + trial % 12;
    const auto pop = test_support::random_population(rng, n);
    std::uniform_int_distribution<std::size_t> label(0, 3);
    std::vector<std::vector<std::size_t>> groups(3);
    for (std::size_t i = 0; i < n; ++i) {
      const auto l = label(rng);
      if (l > 0) groups[l - 1].push_back(i);
    }
    Regime regime(3, n);
    for (auto& g : groups) regime.add(Pool(g));
    ASSERT_NEAR(regime_welfare_exact(pop, regime).total, regime_welfare_nonoverlapping(pop, regime).total, 1e-9);
  }
}

TEST(RegimeWelfareTest, MonotoneInQ) {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 50; ++trial) {
    const auto pop = test_support::random_population(rng, 6);
    const Regime regime(3, 6, {Pool({0, 1, 2}), Pool({2, 3}), Pool({1, 4, 5})});
    const double before = regime_welfare_exact(pop, regime).total;
    std::vector<Individual> raised(pop.entries().begin(), pop.entries().end());
    const auto i = static_cast<std::size_t>(trial % 6);
    raised[i].q = std::min(1.0, raised[i].q + 0.1);
    ASSERT_GE(regime_welfare_exact(Population(raised), regime).total, before - 1e-12);
  }
}

TEST(RegimeWelfareTest, RemovingTestLosesAtMostItsWelfare) {
  std::mt19937_64 rng(6);
  for (int trial = 0; trial < 50; ++trial) {
    const auto pop = test_support::random_population(rng, 6);
    const std::vector<Pool> tests{Pool({0, 1, 2}), Pool({2, 3}), Pool({1, 4, 5})};
    const double full = regime_welfare_exact(pop, Regime(3, 6, tests)).total;
    for (std::size_t drop = 0; drop < tests.size(); ++drop) {
      std::vector<Pool> rest;
      for (std::size_t j = 0; j < tests.size(); ++j) {
        if (j != drop) rest.push_back(tests[j]);
      }
      const double without = regime_welfare_exact(pop, Regime(3, 6, rest)).total;
      ASSERT_LE(without, full + 1e-12);
      ASSERT_LE(full - without, test_welfare(pop, tests[drop]) + 1e-12);
    }
  }
}

TEST(RegimeTest, ValidateEnforcesCapAndBudget) {
  const auto pop = prop1();
  EXPECT_THROW(Regime(1, 3, {Pool({0}), Pool({1})}).validate(pop), ValidationError);
  EXPECT_THROW(Regime(2, 1, {Pool({0, 1})}).validate(pop), ValidationError);
  EXPECT_NO_THROW(Regime(2, 2, {Pool({0, 1}), Pool({2})}).validate(pop));
}

TEST(RegimeTest, OrderSensitiveEquality) {
  const Regime a(2, 3, {Pool({0}), Pool({1})});
  const Regime b(2, 3, {Pool({1}), Pool({0})});
  EXPECT_FALSE(a == b);
  EXPECT_TRUE(a.canonical() == b.canonical());
}

}  // namespace
}  // namespace pooltest
