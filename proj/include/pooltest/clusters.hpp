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

#ifndef POOLTEST_CLUSTERS_HPP
#define POOLTEST_CLUSTERS_HPP

#include <cstddef>
#include <string>
#include <utility>
#include <vector>

#include "pooltest/core.hpp"

namespace pooltest {

/// A group of individuals sharing utility and healthy-probability.
struct Cluster {
  std::size_t size = 0;
  double utility = 0.0;
  double q = 1.0;
};

/// Population described by clusters. Expanding lays clusters out
/// contiguously: cluster c occupies indices [offset(c), offset(c) + size).
class ClusteredPopulation {
 public:
  ClusteredPopulation() = default;

  explicit ClusteredPopulation(std::vector<Cluster> clusters) : clusters_(std::move(clusters)) {
    for (const auto& c : clusters_) {
      if (c.size == 0) throw ValidationError("cluster size must be at least 1");
      if (!(c.q >= 0.0 && c.q <= 1.0)) throw ValidationError("cluster q must lie in [0,1]");
      if (!(c.utility >= 0.0)) throw ValidationError("cluster utility must be non-negative");
    }
  }

  /// Groups individuals with identical (utility, q), in order of first appearance.
  static ClusteredPopulation from_population(const Population& pop) {
    std::vector<Cluster> clusters;
    for (const auto& e : pop.entries()) {
      bool found = false;
      for (auto& c : clusters) {
        if (c.utility == e.utility && c.q == e.q) {
          ++c.size;
          found = true;
          break;
        }
      }
      if (!found) clusters.push_back({1, e.utility, e.q});
    }
    return ClusteredPopulation(std::move(clusters));
  }

  std::size_t num_clusters() const noexcept { return clusters_.size(); }
  const Cluster& operator[](std::size_t c) const { return clusters_[c]; }
  const std::vector<Cluster>& clusters() const noexcept { return clusters_; }

  std::size_t total() const {
    std::size_t n = 0;
    for (const auto& c : clusters_) n += c.size;
    return n;
  }

  std::size_t offset(std::size_t cluster) const {
    std::size_t off = 0;
    for (std::size_t c = 0; c < cluster; ++c) off += clusters_[c].size;
    return off;
  }

  Population expand() const {
    std::vector<Individual> entries;
    entries.reserve(total());
    for (std::size_t c = 0; c < clusters_.size(); ++c) {
      for (std::size_t k = 0; k < clusters_[c].size; ++k) {
        entries.push_back({"c" + std::to_string(c) + "_" + std::to_string(k),
                           clusters_[c].utility, clusters_[c].q});
      }
    }
    return Population(std::move(entries));
  }

 private:
  std::vector<Cluster> clusters_;
};

/// Per-test cluster counts: counts[j][c] members of cluster c in test j.
using ClusterAssignment = std::vector<std::vector<std::size_t>>;

/// Materializes a cluster assignment into concrete member lists over the
/// expanded population, consuming cluster members in index order.
inline Regime materialize(const ClusteredPopulation& clusters, const ClusterAssignment& counts,
                          std::size_t pool_cap) {
  std::vector<std::size_t> next(clusters.num_clusters(), 0);
  Regime regime(counts.size(), pool_cap);
  for (const auto& row : counts) {
    if (row.size() != clusters.num_clusters()) throw ValidationError("assignment row has wrong width");
    std::vector<std::size_t> members;
    for (std::size_t c = 0; c < row.size(); ++c) {
      if (next[c] + row[c] > clusters[c].size) {
        throw ValidationError("assignment exceeds size of cluster " + std::to_string(c));
      }
      for (std::size_t k = 0; k < row[c]; ++k) members.push_back(clusters.offset(c) + next[c]++);
    }
    regime.add(Test(std::move(members)));
  }
  return regime;
}

}  // namespace pooltest

#endif  // POOLTEST_CLUSTERS_HPP
