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

// Population, pooled tests, testing regimes and their expected welfare.
//
// A pooled test over a set t of individuals is negative iff every member is
// healthy, which happens with probability q_t = prod_{i in t} q_i. Members of
// a negative test return to in-person activities and contribute their
// utility. The welfare of a regime is the expected total utility of
// individuals that appear in at least one negative test.

#ifndef POOLTEST_CORE_HPP
#define POOLTEST_CORE_HPP

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <span>
#include <string>
#include <unordered_set>
#include <utility>
#include <vector>

#include "pooltest/error.hpp"

namespace pooltest {

/// Absolute tolerance used for probability and welfare comparisons.
inline constexpr double kTolerance = 1e-9;

struct Individual {
  std::string id;
  double utility = 0.0;
  double q = 1.0;  // probability of being healthy
};

class Population {
 public:
  Population() = default;

  explicit Population(std::vector<Individual> entries) : entries_(std::move(entries)) {
    std::unordered_set<std::string> seen;
    for (std::size_t i = 0; i < entries_.size(); ++i) {
      const auto& e = entries_[i];
      if (!std::isfinite(e.q) || e.q < 0.0 || e.q > 1.0) {
        throw ValidationError("individual '" + e.id + "': q must lie in [0,1]");
      }
      if (!std::isfinite(e.utility) || e.utility < 0.0) {
        throw ValidationError("individual '" + e.id + "': utility must be non-negative");
      }
      if (!seen.insert(e.id).second) {
        throw ValidationError("duplicate individual id '" + e.id + "'");
      }
    }
  }

  /// Builds a population with ids "0", "1", ... from parallel vectors.
  static Population from_vectors(std::span<const double> q, std::span<const double> utility) {
    if (q.size() != utility.size()) {
      throw ValidationError("q and utility vectors differ in length");
    }
    std::vector<Individual> entries;
    entries.reserve(q.size());
    for (std::size_t i = 0; i < q.size(); ++i) {
      entries.push_back({std::to_string(i), utility[i], q[i]});
    }
    return Population(std::move(entries));
  }

  static Population from_vectors(std::initializer_list<double> q,
                                 std::initializer_list<double> utility) {
    return from_vectors(std::span<const double>(q.begin(), q.size()),
                        std::span<const double>(utility.begin(), utility.size()));
  }

  std::size_t size() const noexcept { return entries_.size(); }
  bool empty() const noexcept { return entries_.empty(); }
  const Individual& operator[](std::size_t i) const { return entries_[i]; }
  std::span<const Individual> entries() const noexcept { return entries_; }

  double q(std::size_t i) const { return entries_[i].q; }
  double p(std::size_t i) const { return 1.0 - entries_[i].q; }
  double utility(std::size_t i) const { return entries_[i].utility; }

  /// Individuals with q = 0 are certainly infected; optimizers never pool them.
  bool viable(std::size_t i) const { return entries_[i].q > 0.0; }

  std::vector<std::size_t> viable_indices() const {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < size(); ++i) {
      if (viable(i)) out.push_back(i);
    }
    return out;
  }

  /// Sub-population in the order given by `indices`.
  Population subset(std::span<const std::size_t> indices) const {
    std::vector<Individual> out;
    out.reserve(indices.size());
    for (auto i : indices) {
      if (i >= size()) throw ValidationError("subset index out of range");
      out.push_back(entries_[i]);
    }
    return Population(std::move(out));
  }

  bool uniform_utilities() const {
    return std::all_of(entries_.begin(), entries_.end(),
                       [&](const Individual& e) { return e.utility == entries_.front().utility; });
  }

  bool integral_utilities() const {
    return std::all_of(entries_.begin(), entries_.end(),
                       [](const Individual& e) { return e.utility == std::floor(e.utility); });
  }

 private:
  std::vector<Individual> entries_;
};

/// A pooled test: a strictly increasing list of individual indices.
class Test {
 public:
  Test() = default;

  explicit Test(std::vector<std::size_t> members) : members_(std::move(members)) {
    std::sort(members_.begin(), members_.end());
    if (std::adjacent_find(members_.begin(), members_.end()) != members_.end()) {
      throw ValidationError("test contains a duplicate index");
    }
  }

  Test(std::initializer_list<std::size_t> members) : Test(std::vector<std::size_t>(members)) {}

  std::span<const std::size_t> members() const noexcept { return members_; }
  std::size_t size() const noexcept { return members_.size(); }
  bool empty() const noexcept { return members_.empty(); }

  bool contains(std::size_t i) const {
    return std::binary_search(members_.begin(), members_.end(), i);
  }

  bool intersects(const Test& other) const {
    auto a = members_.begin();
    auto b = other.members_.begin();
    while (a != members_.end() && b != other.members_.end()) {
      if (*a == *b) return true;
      if (*a < *b) ++a; else ++b;
    }
    return false;
  }

  std::uint64_t mask() const {
    std::uint64_t m = 0;
    for (auto i : members_) {
      if (i >= 64) throw CapacityError("bitmask representation limited to 64 individuals");
      m |= std::uint64_t{1} << i;
    }
    return m;
  }

  static Test from_mask(std::uint64_t mask) {
    std::vector<std::size_t> out;
    while (mask != 0) {
      out.push_back(static_cast<std::size_t>(std::countr_zero(mask)));
      mask &= mask - 1;
    }
    return Test(std::move(out));
  }

  auto operator<=>(const Test&) const = default;
  bool operator==(const Test&) const = default;

 private:
  std::vector<std::size_t> members_;
};

/// q_t, the probability that test t is negative.
inline double negative_probability(const Population& pop, const Test& t) {
  double prob = 1.0;
  for (auto i : t.members()) {
    if (i >= pop.size()) throw ValidationError("test index out of range");
    prob *= pop.q(i);
  }
  return prob;
}

/// u(t) = q_t * sum_{i in t} u_i. Zero for the empty test.
inline double test_welfare(const Population& pop, const Test& t) {
  double sum = 0.0;
  for (auto i : t.members()) {
    if (i >= pop.size()) throw ValidationError("test index out of range");
    sum += pop.utility(i);
  }
  return sum == 0.0 ? 0.0 : negative_probability(pop, t) * sum;
}

/// An ordered collection of at most `budget` tests, each of size at most
/// `pool_cap`. Order matters: the pivotal test for an individual is the first
/// negative test containing them.
class Regime {
 public:
  Regime() = default;
  Regime(std::size_t budget, std::size_t pool_cap, std::vector<Test> tests = {})
      : budget_(budget), pool_cap_(pool_cap), tests_(std::move(tests)) {}

  std::size_t budget() const noexcept { return budget_; }
  std::size_t pool_cap() const noexcept { return pool_cap_; }
  std::span<const Test> tests() const noexcept { return tests_; }
  std::size_t size() const noexcept { return tests_.size(); }
  const Test& operator[](std::size_t j) const { return tests_[j]; }

  void add(Test t) { tests_.push_back(std::move(t)); }

  bool is_nonoverlapping() const {
    for (std::size_t a = 0; a < tests_.size(); ++a) {
      for (std::size_t b = a + 1; b < tests_.size(); ++b) {
        if (tests_[a].intersects(tests_[b])) return false;
      }
    }
    return true;
  }

  std::size_t total_memberships() const {
    std::size_t total = 0;
    for (const auto& t : tests_) total += t.size();
    return total;
  }

  std::vector<std::size_t> tested_individuals() const {
    std::vector<std::size_t> out;
    for (const auto& t : tests_) out.insert(out.end(), t.members().begin(), t.members().end());
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
  }

  /// Tests sorted by smallest member, empty tests dropped.
  Regime canonical() const {
    std::vector<Test> out;
    for (const auto& t : tests_) {
      if (!t.empty()) out.push_back(t);
    }
    std::sort(out.begin(), out.end());
    return Regime(budget_, pool_cap_, std::move(out));
  }

  void validate(const Population& pop) const {
    if (tests_.size() > budget_) {
      throw ValidationError("regime has " + std::to_string(tests_.size()) +
                            " tests but budget is " + std::to_string(budget_));
    }
    for (const auto& t : tests_) {
      if (t.size() > pool_cap_) {
        throw ValidationError("test of size " + std::to_string(t.size()) +
                              " exceeds pool cap " + std::to_string(pool_cap_));
      }
      if (!t.empty() && t.members().back() >= pop.size()) {
        throw ValidationError("test index out of range");
      }
    }
  }

  bool operator==(const Regime&) const = default;

 private:
  std::size_t budget_ = 0;
  std::size_t pool_cap_ = 0;
  std::vector<Test> tests_;
};

struct WelfareReport {
  double total = 0.0;
  /// P_i^T: probability that individual i is in some negative test.
  std::vector<double> per_individual;
  /// P_{i,j}^T: probability that test j is pivotal for i (n x B). Only filled
  /// by the exact evaluator.
  std::vector<std::vector<double>> pivotal;
};

inline void check_indices(const Population& pop, const Regime& regime) {
  for (const auto& t : regime.tests()) {
    if (!t.empty() && t.members().back() >= pop.size()) {
      throw ValidationError("test index out of range");
    }
  }
}

/// Welfare of a regime whose tests are pairwise disjoint; test outcomes are
/// then independent and welfare is the sum of per-test welfare.
inline WelfareReport regime_welfare_nonoverlapping(const Population& pop, const Regime& regime) {
  check_indices(pop, regime);
  if (!regime.is_nonoverlapping()) {
    throw ValidationError("regime has overlapping tests; use regime_welfare_exact");
  }
  WelfareReport report;
  report.per_individual.assign(pop.size(), 0.0);
  for (const auto& t : regime.tests()) {
    const double qt = negative_probability(pop, t);
    for (auto i : t.members()) report.per_individual[i] = qt;
    report.total += test_welfare(pop, t);
  }
  return report;
}

/// Exact welfare of an arbitrary (possibly overlapping) regime by enumerating
/// every health realization of the tested individuals. Individuals with q in
/// {0,1} have a fixed state and are not enumerated.
inline WelfareReport regime_welfare_exact(const Population& pop, const Regime& regime,
                                          std::size_t max_enumerated = 25) {
  check_indices(pop, regime);
  const auto tests = regime.tests();
  const std::size_t num_tests = tests.size();
  if (num_tests > 64) throw CapacityError("exact evaluation supports at most 64 tests");

  const auto tested = regime.tested_individuals();
  if (tested.size() > max_enumerated) {
    throw CapacityError("exact evaluation over " + std::to_string(tested.size()) +
                        " tested individuals exceeds limit " + std::to_string(max_enumerated));
  }

  // Bit positions for individuals whose state is random.
  std::vector<std::size_t> uncertain;
  std::vector<int> position(pop.size(), -1);
  for (auto i : tested) {
    if (pop.q(i) > 0.0 && pop.q(i) < 1.0) {
      position[i] = static_cast<int>(uncertain.size());
      uncertain.push_back(i);
    }
  }

  std::vector<std::uint64_t> test_mask(num_tests, 0);
  std::vector<bool> always_positive(num_tests, false);
  for (std::size_t j = 0; j < num_tests; ++j) {
    for (auto i : tests[j].members()) {
      if (pop.q(i) == 0.0) always_positive[j] = true;
      if (position[i] >= 0) test_mask[j] |= std::uint64_t{1} << position[i];
    }
  }
  std::vector<std::uint64_t> membership(tested.size(), 0);
  for (std::size_t k = 0; k < tested.size(); ++k) {
    for (std::size_t j = 0; j < num_tests; ++j) {
      if (tests[j].contains(tested[k])) membership[k] |= std::uint64_t{1} << j;
    }
  }

  // Realization probabilities factor over a low and a high half of the bits.
  const std::size_t m = uncertain.size();
  const std::size_t low_bits = m / 2;
  const std::size_t high_bits = m - low_bits;
  auto half_table = [&](std::size_t offset, std::size_t bits) {
    std::vector<double> table(std::size_t{1} << bits, 1.0);
    for (std::size_t h = 0; h < table.size(); ++h) {
      for (std::size_t b = 0; b < bits; ++b) {
        const double q = pop.q(uncertain[offset + b]);
        table[h] *= ((h >> b) & 1U) ? q : 1.0 - q;
      }
    }
    return table;
  };
  const auto low = half_table(0, low_bits);
  const auto high = half_table(low_bits, high_bits);

  std::vector<std::vector<double>> pivotal_tested(tested.size(), std::vector<double>(num_tests, 0.0));
  const std::uint64_t low_mask = (std::uint64_t{1} << low_bits) - 1;
  const std::uint64_t realizations = std::uint64_t{1} << m;
  for (std::uint64_t healthy = 0; healthy < realizations; ++healthy) {
    const double prob = low[healthy & low_mask] * high[healthy >> low_bits];
    if (prob == 0.0) continue;
    std::uint64_t negative = 0;
    for (std::size_t j = 0; j < num_tests; ++j) {
      if (!always_positive[j] && (test_mask[j] & ~healthy) == 0) negative |= std::uint64_t{1} << j;
    }
    if (negative == 0) continue;
    for (std::size_t k = 0; k < tested.size(); ++k) {
      const std::uint64_t hit = negative & membership[k];
      if (hit != 0) pivotal_tested[k][static_cast<std::size_t>(std::countr_zero(hit))] += prob;
    }
  }

  WelfareReport report;
  report.per_individual.assign(pop.size(), 0.0);
  report.pivotal.assign(pop.size(), std::vector<double>(num_tests, 0.0));
  for (std::size_t k = 0; k < tested.size(); ++k) {
    const auto i = tested[k];
    double total = 0.0;
    for (std::size_t j = 0; j < num_tests; ++j) total += pivotal_tested[k][j];
    report.pivotal[i] = std::move(pivotal_tested[k]);
    report.per_individual[i] = total;
    report.total += pop.utility(i) * total;
  }
  return report;
}

/// Regime welfare by inclusion-exclusion over the tests containing each
/// individual: P_i = sum over nonempty S subset of T(i) of
/// (-1)^{|S|+1} q_{union S}. Generic over the scalar type so it can run in
/// exact rational arithmetic.
template <class Scalar>
Scalar inclusion_exclusion_welfare(std::span<const Scalar> q, std::span<const Scalar> utility,
                                   std::span<const Test> tests) {
  Scalar total{0};
  for (std::size_t i = 0; i < q.size(); ++i) {
    std::vector<const Test*> containing;
    for (const auto& t : tests) {
      if (t.contains(i)) containing.push_back(&t);
    }
    if (containing.size() > 20) throw CapacityError("inclusion-exclusion limited to 20 tests per individual");
    Scalar prob{0};
    const std::uint32_t subsets = std::uint32_t{1} << containing.size();
    for (std::uint32_t s = 1; s < subsets; ++s) {
      std::vector<bool> in_union(q.size(), false);
      for (std::size_t k = 0; k < containing.size(); ++k) {
        if ((s >> k) & 1U) {
          for (auto member : containing[k]->members()) in_union[member] = true;
        }
      }
      Scalar union_prob{1};
      for (std::size_t member = 0; member < q.size(); ++member) {
        if (in_union[member]) union_prob = union_prob * q[member];
      }
      if (std::popcount(s) % 2 == 1) prob = prob + union_prob; else prob = prob - union_prob;
    }
    total = total + utility[i] * prob;
  }
  return total;
}

inline double inclusion_exclusion_welfare(const Population& pop, const Regime& regime) {
  check_indices(pop, regime);
  std::vector<double> q(pop.size());
  std::vector<double> u(pop.size());
  for (std::size_t i = 0; i < pop.size(); ++i) {
    q[i] = pop.q(i);
    u[i] = pop.utility(i);
  }
  return inclusion_exclusion_welfare<double>(q, u, regime.tests());
}

}  // namespace pooltest

#endif  // POOLTEST_CORE_HPP
