// Copyright 2026 The mixedrand Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Partitions of the unit set and the statistics that drive the variance
// bounds: eta (squared cluster-size mass), delta (cross-cluster weight
// reciprocity) and the debiasing multiplier rho.

#ifndef MIXEDRAND_PARTITION_HPP_
#define MIXEDRAND_PARTITION_HPP_

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <map>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "mixedrand/graph.hpp"

namespace mixedrand {

using ClusterId = std::size_t;

class Clustering {
 public:
  Clustering() = default;

  // Throws std::invalid_argument unless `clusters` partitions {0..n-1} into
  // non-empty sets. Members are sorted within each cluster; cluster order is
  // kept as given.
  Clustering(std::size_t n, std::vector<std::vector<UnitId>> clusters)
      : clusters_(std::move(clusters)), cluster_of_(n, kUnassigned) {
    for (ClusterId k = 0; k < clusters_.size(); ++k) {
      auto& c = clusters_[k];
      if (c.empty()) throw std::invalid_argument("empty cluster");
      std::sort(c.begin(), c.end());
      for (UnitId i : c) {
        if (i >= n) {
          throw std::invalid_argument("cluster member " + std::to_string(i) +
                                      " out of range");
        }
        if (cluster_of_[i] != kUnassigned) {
          throw std::invalid_argument("unit " + std::to_string(i) +
                                      " appears in two clusters");
        }
        cluster_of_[i] = k;
      }
    }
    for (UnitId i = 0; i < n; ++i) {
      if (cluster_of_[i] == kUnassigned) {
        throw std::invalid_argument("unit " + std::to_string(i) +
                                    " is not covered by any cluster");
      }
    }
  }

  // Builds a clustering from per-unit labels; clusters are numbered in order
  // of first appearance.
  static Clustering from_labels(const std::vector<std::size_t>& labels) {
    std::map<std::size_t, std::size_t> remap;
    std::vector<std::vector<UnitId>> clusters;
    for (UnitId i = 0; i < labels.size(); ++i) {
      auto [it, fresh] = remap.emplace(labels[i], clusters.size());
      if (fresh) clusters.emplace_back();
      clusters[it->second].push_back(i);
    }
    return Clustering(labels.size(), std::move(clusters));
  }

  static Clustering singletons(std::size_t n) {
    std::vector<std::vector<UnitId>> clusters(n);
    for (UnitId i = 0; i < n; ++i) clusters[i] = {i};
    return Clustering(n, std::move(clusters));
  }

  static Clustering whole(std::size_t n) {
    if (n == 0) return Clustering(0, {});
    std::vector<UnitId> all(n);
    for (UnitId i = 0; i < n; ++i) all[i] = i;
    return Clustering(n, {std::move(all)});
  }

  std::size_t n() const { return cluster_of_.size(); }
  std::size_t size() const { return clusters_.size(); }
  const std::vector<std::vector<UnitId>>& clusters() const { return clusters_; }
  const std::vector<UnitId>& cluster(ClusterId k) const { return clusters_[k]; }
  ClusterId cluster_of(UnitId i) const { return cluster_of_[i]; }
  const std::vector<ClusterId>& labels() const { return cluster_of_; }

  std::size_t max_cluster_size() const {
    std::size_t m = 0;
    for (const auto& c : clusters_) m = std::max(m, c.size());
    return m;
  }

  friend bool operator==(const Clustering& a, const Clustering& b) {
    return a.clusters_ == b.clusters_;
  }

 private:
  static constexpr ClusterId kUnassigned = std::numeric_limits<ClusterId>::max();
  std::vector<std::vector<UnitId>> clusters_;
  std::vector<ClusterId> cluster_of_;
};

struct PartitionStats {
  std::size_t n = 0;
  double eta = 0.0;    // (1/n^2) sum_k |C_k|^2
  double delta = 0.0;  // (1/n^2) sum_{k != l} D_kl D_lk
  double rho = std::numeric_limits<double>::quiet_NaN();  // total / within
  double within_weight = 0.0;
  double total_weight = 0.0;
  std::size_t max_cluster_size = 0;

  bool rho_defined() const { return within_weight != 0.0; }
};

// D_kl = sum_{i in C_k} sum_{i' in N_i cap C_l} v_ii' for k != l.
inline std::map<std::pair<ClusterId, ClusterId>, double> cross_weights(
    const InterferenceGraph& g, const Clustering& c) {
  std::map<std::pair<ClusterId, ClusterId>, double> d;
  for (const Edge& e : g.edges()) {
    const ClusterId k = c.cluster_of(e.from);
    const ClusterId l = c.cluster_of(e.to);
    if (k != l) d[{k, l}] += e.weight;
  }
  return d;
}

inline PartitionStats partition_stats(const InterferenceGraph& g,
                                      const Clustering& c) {
  if (c.n() != g.n()) {
    throw std::invalid_argument("clustering does not cover the graph's units");
  }
  PartitionStats s;
  s.n = g.n();
  if (g.n() == 0) return s;
  const double n2 = static_cast<double>(g.n()) * static_cast<double>(g.n());
  double sq = 0.0;
  for (const auto& cl : c.clusters()) {
    sq += static_cast<double>(cl.size()) * static_cast<double>(cl.size());
  }
  s.eta = sq / n2;
  s.max_cluster_size = c.max_cluster_size();
  for (const Edge& e : g.edges()) {
    s.total_weight += e.weight;
    if (c.cluster_of(e.from) == c.cluster_of(e.to)) s.within_weight += e.weight;
  }
  const auto d = cross_weights(g, c);
  double recip = 0.0;
  for (const auto& [kl, w] : d) {
    const auto it = d.find({kl.second, kl.first});
    if (it != d.end()) recip += w * it->second;
  }
  s.delta = recip / n2;
  if (s.within_weight != 0.0) s.rho = s.total_weight / s.within_weight;
  return s;
}

}  // namespace mixedrand

#endif  // MIXEDRAND_PARTITION_HPP_
