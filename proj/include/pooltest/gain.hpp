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

// Gain of overlaps: best overlapping welfare over best non-overlapping
// welfare on a concrete instance.

#ifndef POOLTEST_GAIN_HPP
#define POOLTEST_GAIN_HPP

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

#include "pooltest/core.hpp"
#include "pooltest/oracle.hpp"

namespace pooltest {

using Rational = boost::multiprecision::cpp_rational;

/// Worst-case gain bound for B tests: 7/6, 7/3, 15/4, then 4.
inline double gain_bound_check(std::size_t budget) {
  switch (budget) {
    case 0:
    case 1: return 1.0;
    case 2: return 7.0 / 6.0;
    case 3: return 7.0 / 3.0;
    case 4: return 15.0 / 4.0;
    default: return 4.0;
  }
}

struct GainReport {
  std::size_t n = 0;
  std::size_t pool_cap = 0;
  std::size_t budget = 0;
  std::size_t max_overlap = 0;
  RegimeResult nonoverlapping;
  RegimeResult overlapping;
  double ratio = 1.0;
};

inline GainReport gain_of_overlaps(const Population& pop, std::size_t pool_cap, std::size_t budget,
                                   std::size_t max_overlap, const OracleLimits& limits = {}) {
  GainReport report;
  report.n = pop.size();
  report.pool_cap = pool_cap;
  report.budget = budget;
  report.max_overlap = max_overlap;
  report.nonoverlapping = brute_force_nonoverlapping(pop, pool_cap, budget, limits);
  report.overlapping = brute_force_overlapping(pop, pool_cap, budget, max_overlap, limits);
  const double base = report.nonoverlapping.welfare;
  const double best = report.overlapping.welfare;
  if (base <= 0.0) {
    if (best > kTolerance) throw Error("positive overlapping welfare with zero non-overlapping welfare");
    report.ratio = 1.0;
  } else {
    report.ratio = best / base;
  }
  if (report.ratio > 4.0 + 1e-9) {
    throw Error("gain of overlaps " + std::to_string(report.ratio) + " exceeds 4");
  }
  return report;
}

/// Exact best welfare over all regimes of at most `budget` distinct nonempty
/// tests of size <= cap, for small n (rational arithmetic).
struct ExactOptimum {
  Rational welfare{0};
  std::vector<Test> tests;
};

inline ExactOptimum exact_best_regime(const std::vector<Rational>& q, const std::vector<Rational>& u,
                                      std::size_t pool_cap, std::size_t budget, bool overlapping) {
  const std::size_t n = q.size();
  if (n > 8 || budget > 3) throw CapacityError("exact rational search limited to n <= 8 and B <= 3");
  std::vector<Test> candidates;
  for (std::uint64_t m = 1; m < (std::uint64_t{1} << n); ++m) {
    if (static_cast<std::size_t>(std::popcount(m)) <= pool_cap) candidates.push_back(Test::from_mask(m));
  }
  ExactOptimum best;
  std::vector<Test> chosen;
  auto visit = [&](auto&& self, std::size_t start) -> void {
    if (!chosen.empty()) {
      const Rational w = inclusion_exclusion_welfare<Rational>(q, u, chosen);
      if (w > best.welfare) {
        best.welfare = w;
        best.tests = chosen;
      }
    }
    if (chosen.size() == budget) return;
    for (std::size_t k = start; k < candidates.size(); ++k) {
      if (!overlapping) {
        bool clash = false;
        for (const auto& t : chosen) clash = clash || t.intersects(candidates[k]);
        if (clash) continue;
      }
      chosen.push_back(candidates[k]);
      self(self, k + 1);
      chosen.pop_back();
    }
  };
  visit(visit, 0);
  return best;
}

struct ExactGain {
  ExactOptimum nonoverlapping;
  ExactOptimum overlapping;
  Rational ratio{1};
};

inline ExactGain exact_gain(const std::vector<Rational>& q, const std::vector<Rational>& u, std::size_t pool_cap,
                            std::size_t budget) {
  ExactGain g;
  g.nonoverlapping = exact_best_regime(q, u, pool_cap, budget, false);
  g.overlapping = exact_best_regime(q, u, pool_cap, budget, true);
  if (g.nonoverlapping.welfare > 0) g.ratio = g.overlapping.welfare / g.nonoverlapping.welfare;
  return g;
}

/// Three individuals, q = (1/2, 1/2, 1), unit utilities, two tests of size <= 3.
inline ExactGain prop1_gain() {
  const std::vector<Rational> q{Rational(1, 2), Rational(1, 2), Rational(1)};
  const std::vector<Rational> u{Rational(1), Rational(1), Rational(1)};
  return exact_gain(q, u, 3, 2);
}

inline Population prop1_population() { return Population::from_vectors({0.5, 0.5, 1.0}, {1.0, 1.0, 1.0}); }

}  // namespace pooltest

#endif  // POOLTEST_GAIN_HPP
