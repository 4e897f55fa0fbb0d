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

// Upper piecewise-linear approximation of exp on [lower, upper] by K secants
// with equal maximum error on every segment.

#ifndef POOLTEST_PWL_HPP
#define POOLTEST_PWL_HPP

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

#include "pooltest/error.hpp"

namespace pooltest {

/// max_{x in [a,b]} (secant(x) - exp(x)) for the secant of exp through a and
/// b. With r = (e^d - 1)/d, d = b - a, the maximum is attained at
/// x = a + log r and equals e^a (1 - r + r log r).
inline double secant_error(double a, double b) {
  const double d = b - a;
  if (!(d > 0.0)) return 0.0;
  const double delta = std::expm1(d) / d - 1.0;  // r - 1
  const double g = (1.0 + delta) * std::log1p(delta) - delta;
  return std::exp(a) * std::max(g, 0.0);
}

class PwlExpApprox {
 public:
  PwlExpApprox() = default;

  /// Secants through the given increasing breakpoints.
  explicit PwlExpApprox(std::vector<double> breakpoints) : breakpoints_(std::move(breakpoints)) {
    if (breakpoints_.size() < 2) throw ValidationError("need at least one segment");
    for (std::size_t k = 0; k + 1 < breakpoints_.size(); ++k) {
      const double lo = breakpoints_[k];
      const double hi = breakpoints_[k + 1];
      if (!(hi > lo)) throw ValidationError("breakpoints must be strictly increasing");
      const double slope = (std::exp(hi) - std::exp(lo)) / (hi - lo);
      slopes_.push_back(slope);
      intercepts_.push_back(std::exp(hi) - slope * hi);
      errors_.push_back(secant_error(lo, hi));
    }
    epsilon_ = *std::max_element(errors_.begin(), errors_.end());
  }

  double lower() const { return breakpoints_.front(); }
  double upper() const { return breakpoints_.back(); }
  std::size_t segments() const { return slopes_.size(); }
  std::span<const double> breakpoints() const { return breakpoints_; }
  std::span<const double> slopes() const { return slopes_; }
  std::span<const double> intercepts() const { return intercepts_; }
  std::span<const double> segment_errors() const { return errors_; }

  /// Uniform bound on f - exp over the domain.
  double epsilon() const { return epsilon_; }

  std::size_t segment_of(double x) const {
    const double slack = 1e-9 * std::max(1.0, std::abs(upper() - lower()));
    if (x < lower() - slack || x > upper() + slack) throw ValidationError("point outside approximation domain");
    auto it = std::upper_bound(breakpoints_.begin() + 1, breakpoints_.end() - 1, x);
    return static_cast<std::size_t>(it - (breakpoints_.begin() + 1));
  }

  double operator()(double x) const {
    const auto k = segment_of(x);
    return slopes_[k] * x + intercepts_[k];
  }

 private:
  std::vector<double> breakpoints_;
  std::vector<double> slopes_;
  std::vector<double> intercepts_;
  std::vector<double> errors_;
  double epsilon_ = 0.0;
};

namespace detail {

/// Largest b <= upper with secant_error(a, b) <= target.
inline double next_breakpoint(double a, double target, double upper) {
  if (secant_error(a, upper) <= target) return upper;
  double lo = a;
  double hi = upper;
  for (int iter = 0; iter < 200 && hi - lo > 1e-15 * std::max(1.0, std::abs(hi)); ++iter) {
    const double mid = 0.5 * (lo + hi);
    if (secant_error(a, mid) <= target) lo = mid; else hi = mid;
  }
  return lo;
}

}  // namespace detail

/// Breakpoints such that every segment has the same maximum error, which
/// minimizes the uniform error for K segments. Bisection on the shared error
/// value; for each candidate, segments are laid out greedily from the left.
inline PwlExpApprox equal_error_partition(double lower, double upper, std::size_t segments) {
  if (!(std::isfinite(lower) && std::isfinite(upper) && lower < upper)) {
    throw ValidationError("approximation domain requires lower < upper");
  }
  if (segments == 0) throw ValidationError("need at least one segment");
  if (segments == 1) return PwlExpApprox({lower, upper});

  auto layout = [&](double target) {
    std::vector<double> cuts{lower};
    for (std::size_t k = 0; k + 1 < segments; ++k) cuts.push_back(detail::next_breakpoint(cuts.back(), target, upper));
    cuts.push_back(upper);
    return cuts;
  };
  double lo = 0.0;
  double hi = secant_error(lower, upper);
  for (int iter = 0; iter < 300 && hi - lo > 1e-15 * hi; ++iter) {
    const double mid = 0.5 * (lo + hi);
    const auto cuts = layout(mid);
    const double last = cuts[cuts.size() - 2];
    if (last >= upper || secant_error(last, upper) <= mid) hi = mid; else lo = mid;
  }
  return PwlExpApprox(layout(hi));
}

}  // namespace pooltest

#endif  // POOLTEST_PWL_HPP
