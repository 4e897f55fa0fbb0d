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

// Second allocation round over the individuals who submitted samples.

#ifndef POOLTEST_REPOOL_HPP
#define POOLTEST_REPOOL_HPP

#include <algorithm>
#include <cstddef>
#include <string>
#include <vector>

#include "pooltest/core.hpp"
#include "pooltest/greedy.hpp"
#include "pooltest/milp.hpp"
#include "pooltest/oracle.hpp"

namespace pooltest {

enum class RepoolAlgo { kGreedy, kApproxSmall, kOracle };

inline RepoolAlgo parse_repool_algo(const std::string& name) {
  if (name == "greedy") return RepoolAlgo::kGreedy;
  if (name == "approx-small") return RepoolAlgo::kApproxSmall;
  if (name == "oracle") return RepoolAlgo::kOracle;
  throw ValidationError("unknown repool algorithm '" + name + "'");
}

struct RepoolResult {
  Regime regime;
  double welfare = 0.0;
  Regime baseline;               // original with non-submitters deleted
  double baseline_welfare = 0.0;
  bool kept_original = false;    // re-optimization did not beat the baseline
};

/// Removes every individual outside `keep` from the tests of `regime`; tests
/// that become empty are dropped.
inline Regime restrict_regime(const Regime& regime, const std::vector<std::size_t>& keep) {
  Regime out(regime.budget(), regime.pool_cap());
  for (const auto& t : regime.tests()) {
    std::vector<std::size_t> members;
    for (auto i : t.members()) {
      if (std::binary_search(keep.begin(), keep.end(), i)) members.push_back(i);
    }
    if (!members.empty()) out.add(Test(std::move(members)));
  }
  return out;
}

inline double regime_welfare(const Population& pop, const Regime& regime) {
  if (regime.is_nonoverlapping()) return regime_welfare_nonoverlapping(pop, regime).total;
  return regime_welfare_exact(pop, regime).total;
}

inline RepoolResult repool(const Population& pop, const Regime& original, std::vector<std::size_t> submitted,
                           std::size_t pool_cap, std::size_t budget, RepoolAlgo algo, std::size_t segments = 18,
                           const OracleLimits& limits = {}) {
  if (budget == 0) throw ValidationError("budget must be at least 1");
  if (pool_cap == 0) throw ValidationError("pool cap must be at least 1");
  original.validate(pop);
  std::sort(submitted.begin(), submitted.end());
  submitted.erase(std::unique(submitted.begin(), submitted.end()), submitted.end());
  for (auto i : submitted) {
    if (i >= pop.size()) throw ValidationError("submitted index " + std::to_string(i) + " out of range");
  }
  RepoolResult result;
  result.regime = Regime(budget, pool_cap);
  result.baseline = restrict_regime(original, submitted);
  result.baseline_welfare = regime_welfare(pop, result.baseline);
  if (submitted.empty()) return result;

  const Population sub = pop.subset(submitted);
  Regime local;
  switch (algo) {
    case RepoolAlgo::kGreedy: local = greedy_regime(sub, pool_cap, budget, Subroutine::exact(), limits).regime; break;
    case RepoolAlgo::kApproxSmall: local = approx_regime_small(sub, pool_cap, budget, segments, limits).regime; break;
    case RepoolAlgo::kOracle: local = brute_force_nonoverlapping(sub, pool_cap, budget, limits).regime; break;
  }
  for (const auto& t : local.tests()) {
    std::vector<std::size_t> members;
    for (auto k : t.members()) members.push_back(submitted[k]);
    result.regime.add(Test(std::move(members)));
  }
  result.welfare = regime_welfare(pop, result.regime);
  if (result.welfare < result.baseline_welfare) {
    result.regime = result.baseline;
    result.welfare = result.baseline_welfare;
    result.kept_original = true;
  }
  return result;
}

}  // namespace pooltest

#endif  // POOLTEST_REPOOL_HPP
