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

// Single pooled test with a pool-size cap: the max-probability subset DP,
// its utility-scaled FPTAS, and an exact variant for integral utilities.

#ifndef POOLTEST_FPTAS_HPP
#define POOLTEST_FPTAS_HPP

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "pooltest/core.hpp"
#include "pooltest/oracle.hpp"

namespace pooltest {

/// P(C, L): the largest probability that a subset of the items is negative,
/// among subsets whose weights sum to exactly C and whose size is exactly L.
/// Built one item at a time (the table after item i answers P(i, C, L));
/// per-item decision bits allow reconstructing the maximizing subset.
class DpTable {
 public:
  DpTable(std::span<const double> q, std::span<const std::int64_t> weights, std::size_t max_size,
          std::int64_t max_sum)
      : items_(q.size()), max_size_(max_size), max_sum_(std::max<std::int64_t>(max_sum, 0)),
        weights_(weights.begin(), weights.end()) {
    if (q.size() != weights.size()) throw ValidationError("q and weight vectors differ in length");
    const double cells = static_cast<double>(items_) * static_cast<double>(row_size());
    if (cells > 4e9) throw CapacityError("DP table too large");
    prob_.assign(row_size(), 0.0);
    prob_[index(0, 0)] = 1.0;
    take_.assign(items_ * row_size(), false);
    for (std::size_t i = 0; i < items_; ++i) {
      const std::int64_t w = weights_[i];
      if (w < 0) throw ValidationError("negative DP weight");
      if (w > max_sum_) continue;
      for (std::int64_t c = max_sum_; c >= w; --c) {
        for (std::size_t l = max_size_; l >= 1; --l) {
          const double with = q[i] * prob_[index(c - w, l - 1)];
          if (with > prob_[index(c, l)]) {
            prob_[index(c, l)] = with;
            take_[i * row_size() + index(c, l)] = true;
          }
        }
      }
    }
  }

  std::size_t items() const noexcept { return items_; }
  std::size_t max_size() const noexcept { return max_size_; }
  std::int64_t max_sum() const noexcept { return max_sum_; }

  /// 0 for unreachable cells.
  double best_probability(std::int64_t c, std::size_t l) const {
    if (c < 0 || c > max_sum_ || l > max_size_) return 0.0;
    return prob_[index(c, l)];
  }

  /// Item indices of a subset attaining best_probability(c, l).
  std::vector<std::size_t> reconstruct(std::int64_t c, std::size_t l) const {
    std::vector<std::size_t> out;
    if (best_probability(c, l) == 0.0) return out;
    for (std::size_t i = items_; i-- > 0;) {
      if (l == 0) break;
      if (take_[i * row_size() + index(c, l)]) {
        out.push_back(i);
        c -= weights_[i];
        --l;
      }
    }
    std::reverse(out.begin(), out.end());
    return out;
  }

 private:
  std::size_t row_size() const { return static_cast<std::size_t>(max_sum_ + 1) * (max_size_ + 1); }
  std::size_t index(std::int64_t c, std::size_t l) const {
    return static_cast<std::size_t>(c) * (max_size_ + 1) + l;
  }

  std::size_t items_;
  std::size_t max_size_;
  std::int64_t max_sum_;
  std::vector<std::int64_t> weights_;
  std::vector<double> prob_;
  std::vector<bool> take_;
};

/// P(i, C, L) over the first `prefix` individuals with integer utilities.
inline double dp_best_subset(std::span<const double> q, std::span<const std::int64_t> utility,
                             std::size_t prefix, std::int64_t c, std::size_t l) {
  if (prefix > q.size() || q.size() != utility.size()) throw ValidationError("bad DP prefix");
  if (c < 0) return 0.0;
  DpTable table(q.first(prefix), utility.first(prefix), l, c);
  return table.best_probability(c, l);
}

namespace detail {

inline std::int64_t top_sum(std::vector<std::int64_t> values, std::size_t count) {
  std::sort(values.begin(), values.end(), std::greater<>());
  std::int64_t sum = 0;
  for (std::size_t k = 0; k < std::min(count, values.size()); ++k) sum += values[k];
  return sum;
}

}  // namespace detail

/// Exact optimal single test when utilities are integral: maximizes
/// C * P(n, C, L) over C and L <= G. Falls back to brute force otherwise.
inline SingleTestResult exact_single_test(const Population& pop, std::size_t pool_cap,
                                          const OracleLimits& limits = {}) {
  const auto viable = pop.viable_indices();
  if (viable.empty() || pool_cap == 0) return {};
  bool integral = true;
  for (auto i : viable) {
    if (pop.utility(i) != std::floor(pop.utility(i)) || pop.utility(i) > 1e6) integral = false;
  }
  if (!integral) return brute_force_single_test(pop, pool_cap, limits);

  std::vector<double> q;
  std::vector<std::int64_t> w;
  for (auto i : viable) {
    q.push_back(pop.q(i));
    w.push_back(static_cast<std::int64_t>(pop.utility(i)));
  }
  const std::size_t max_size = std::min(pool_cap, viable.size());
  DpTable table(q, w, max_size, detail::top_sum(w, max_size));

  double best = -1.0;
  std::int64_t best_c = 0;
  std::size_t best_l = 0;
  for (std::int64_t c = 0; c <= table.max_sum(); ++c) {
    for (std::size_t l = 1; l <= max_size; ++l) {
      const double value = static_cast<double>(c) * table.best_probability(c, l);
      if (table.best_probability(c, l) > 0.0 && detail::strictly_greater(value, best)) {
        best = value;
        best_c = c;
        best_l = l;
      }
    }
  }
  SingleTestResult result;
  std::vector<std::size_t> members;
  for (auto k : table.reconstruct(best_c, best_l)) members.push_back(viable[k]);
  result.test = Test(std::move(members));
  result.welfare = test_welfare(pop, result.test);
  return result;
}

/// Parameters of one FPTAS run.
struct FptasConfig {
  double epsilon = 0.1;
  double kappa = 0.0;
  std::vector<std::size_t> half;  // individuals with q >= 1/2 (viable only)
  std::vector<std::size_t> low;   // viable individuals with q < 1/2
};

/// kappa = epsilon * (1/2) * max_{i in N_half} u_i / n, with n the number of
/// viable individuals. kappa is 0 when N_half carries no utility.
inline FptasConfig make_fptas_config(const Population& pop, double epsilon) {
  if (!(epsilon > 0.0 && epsilon < 1.0)) throw ValidationError("epsilon must lie in (0,1)");
  FptasConfig config;
  config.epsilon = epsilon;
  double max_half = 0.0;
  std::size_t viable = 0;
  for (std::size_t i = 0; i < pop.size(); ++i) {
    if (!pop.viable(i)) continue;
    ++viable;
    if (pop.q(i) >= 0.5) {
      config.half.push_back(i);
      max_half = std::max(max_half, pop.utility(i));
    } else {
      config.low.push_back(i);
    }
  }
  if (viable > 0) config.kappa = epsilon * 0.5 * max_half / static_cast<double>(viable);
  return config;
}

struct ScaledObjective {
  double value = 0.0;  // z_hat: lower bound on the realized test's welfare
  Test test;
};

namespace detail {

/// DP over scaled utilities of a fixed prefix of N_half, shared across all
/// choices of the extra individual j.
class ScaledDp {
 public:
  ScaledDp(const Population& pop, std::span<const std::size_t> prefix, double kappa, std::size_t pool_cap)
      : pop_(pop), prefix_(prefix.begin(), prefix.end()), kappa_(kappa), pool_cap_(pool_cap) {
    if (!(kappa > 0.0)) throw ValidationError("kappa must be positive");
    std::vector<double> q;
    std::vector<std::int64_t> w;
    for (auto i : prefix_) {
      q.push_back(pop.q(i));
      w.push_back(static_cast<std::int64_t>(std::floor(pop.utility(i) / kappa)));
    }
    const std::size_t max_size = std::min(pool_cap, prefix_.size());
    table_.emplace(q, w, max_size, top_sum(w, max_size));
  }

  /// z_hat(i, j): j = nullopt is the dummy individual (u = 0, q = 1).
  ScaledObjective evaluate(std::optional<std::size_t> j) const {
    const double uj = j ? pop_.utility(*j) : 0.0;
    const double qj = j ? pop_.q(*j) : 1.0;
    const std::size_t max_l = std::min(j ? pool_cap_ - 1 : pool_cap_, table_->max_size());
    const std::size_t min_l = j ? 0 : 1;
    double best = -1.0;
    std::int64_t best_c = 0;
    std::size_t best_l = 0;
    bool found = false;
    for (std::int64_t c = 0; c <= table_->max_sum(); ++c) {
      for (std::size_t l = min_l; l <= max_l; ++l) {
        const double p = table_->best_probability(c, l);
        if (p == 0.0) continue;
        const double value = (kappa_ * static_cast<double>(c) + uj) * p * qj;
        if (!found || value > best) {
          best = value;
          best_c = c;
          best_l = l;
          found = true;
        }
      }
    }
    ScaledObjective out;
    if (!found) return out;
    std::vector<std::size_t> members;
    for (auto k : table_->reconstruct(best_c, best_l)) members.push_back(prefix_[k]);
    if (j) members.push_back(*j);
    out.value = best;
    out.test = Test(std::move(members));
    return out;
  }

 private:
  const Population& pop_;
  std::vector<std::size_t> prefix_;
  double kappa_;
  std::size_t pool_cap_;
  std::optional<DpTable> table_;
};

}  // namespace detail

/// z_hat(i, j) over the first `prefix` members of N_half (in index order)
/// plus individual j outside N_half, or the dummy when j is empty.
inline ScaledObjective scaled_objective(const Population& pop, std::size_t prefix, std::optional<std::size_t> j,
                                        double kappa, std::size_t pool_cap) {
  if (pool_cap == 0) throw ValidationError("pool cap must be at least 1");
  std::vector<std::size_t> half;
  for (std::size_t i = 0; i < pop.size(); ++i) {
    if (pop.viable(i) && pop.q(i) >= 0.5) half.push_back(i);
  }
  if (prefix > half.size()) throw ValidationError("prefix exceeds |N_half|");
  if (j && (*j >= pop.size() || pop.q(*j) >= 0.5)) {
    throw ValidationError("extra individual must lie outside N_half");
  }
  detail::ScaledDp dp(pop, std::span<const std::size_t>(half).first(prefix), kappa, pool_cap);
  return dp.evaluate(j);
}

/// (1 - epsilon)-optimal single test of size <= G. At most one member has
/// q < 1/2: the DP runs over N_half once and each low-q individual (plus a
/// dummy) is tried as the extra member.
inline SingleTestResult fptas_single_test(const Population& pop, std::size_t pool_cap, double epsilon) {
  if (pool_cap == 0) throw ValidationError("pool cap must be at least 1");
  auto config = make_fptas_config(pop, epsilon);
  if (config.half.empty() && config.low.empty()) throw ValidationError("no viable test");

  SingleTestResult result;
  double best = -1.0;
  auto consider = [&](double value, Test test) {
    if (value > best) {
      best = value;
      result.test = std::move(test);
    }
  };

  if (config.kappa > 0.0) {
    detail::ScaledDp dp(pop, config.half, config.kappa, pool_cap);
    auto dummy = dp.evaluate(std::nullopt);
    if (!dummy.test.empty()) consider(dummy.value, dummy.test);
    for (auto j : config.low) {
      auto z = dp.evaluate(j);
      const double single = pop.q(j) * pop.utility(j);
      if (z.value < single) consider(single, Test{j}); else consider(z.value, std::move(z.test));
    }
  } else {
    // N_half is empty or carries no utility: some singleton is optimal.
    for (auto i : config.low) consider(pop.q(i) * pop.utility(i), Test{i});
    for (auto i : config.half) consider(pop.q(i) * pop.utility(i), Test{i});
  }
  result.welfare = test_welfare(pop, result.test);
  return result;
}

}  // namespace pooltest

#endif  // POOLTEST_FPTAS_HPP
