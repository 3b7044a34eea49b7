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

// Treatment assignment: Bernoulli, cluster-based and the two-stage mixed
// design.

#ifndef MIXEDRAND_DESIGN_HPP_
#define MIXEDRAND_DESIGN_HPP_

#include <cstdint>
#include <stdexcept>
#include <vector>

#include "mixedrand/partition.hpp"
#include "mixedrand/random.hpp"

namespace mixedrand {

// Realised design. W[k] = 1 puts cluster k in the cluster arm, 0 in the
// Bernoulli arm; w_tilde[i] = W[c(i)]; z is the treatment vector.
struct Assignment {
  std::vector<int> W;
  std::vector<int> w_tilde;
  std::vector<int> z;
  double p = 0.5;
  std::uint64_t seed = 0;
};

// The three independent substreams a master seed is split into.
struct DesignStreams {
  CounterStream arm;
  CounterStream cluster;
  CounterStream unit;

  explicit DesignStreams(std::uint64_t seed)
      : arm(CounterStream(seed).child("design/arm")),
        cluster(CounterStream(seed).child("design/cluster")),
        unit(CounterStream(seed).child("design/unit")) {}
};

namespace detail {

// Sampling is well defined at p = 0 and p = 1 (degenerate coins); the
// estimators are the ones that need p strictly inside (0, 1).
inline void check_probability(double p) {
  if (!(p >= 0.0 && p <= 1.0)) {
    throw std::invalid_argument("treatment probability must lie in [0, 1]");
  }
}

}  // namespace detail

inline Assignment assign_bernoulli(std::size_t n, double p,
                                   std::uint64_t seed) {
  detail::check_probability(p);
  const DesignStreams streams(seed);
  Assignment a;
  a.p = p;
  a.seed = seed;
  a.w_tilde.assign(n, 0);
  a.z.resize(n);
  for (std::size_t i = 0; i < n; ++i) a.z[i] = streams.unit(i) < p ? 1 : 0;
  return a;
}

// One Bernoulli(p) coin per cluster, broadcast to its members. Every cluster
// is reported as being in the cluster arm.
inline Assignment assign_cluster_based(const Clustering& c, double p,
                                       std::uint64_t seed) {
  detail::check_probability(p);
  const DesignStreams streams(seed);
  Assignment a;
  a.p = p;
  a.seed = seed;
  a.W.assign(c.size(), 1);
  a.w_tilde.assign(c.n(), 1);
  a.z.resize(c.n());
  for (ClusterId k = 0; k < c.size(); ++k) {
    const int coin = streams.cluster(k) < p ? 1 : 0;
    for (UnitId i : c.cluster(k)) a.z[i] = coin;
  }
  return a;
}

// Mixed design driven by explicit uniform sources, each indexed by cluster
// (arm, cluster) or unit (unit). Stage 1: W_k = [arm(k) < 1/2]. Stage 2:
// clusters with W_k = 1 broadcast [cluster(k) < p]; clusters with W_k = 0
// give each member its own [unit(i) < p].
template <class ArmSource, class ClusterSource, class UnitSource>
Assignment assign_mixed_with(const Clustering& c, double p,
                             const ArmSource& arm,
                             const ClusterSource& cluster,
                             const UnitSource& unit) {
  Assignment a;
  a.p = p;
  a.W.resize(c.size());
  a.w_tilde.resize(c.n());
  a.z.resize(c.n());
  for (ClusterId k = 0; k < c.size(); ++k) {
    a.W[k] = arm(k) < 0.5 ? 1 : 0;
    const int coin = cluster(k) < p ? 1 : 0;
    for (UnitId i : c.cluster(k)) {
      a.w_tilde[i] = a.W[k];
      a.z[i] = a.W[k] == 1 ? coin : (unit(i) < p ? 1 : 0);
    }
  }
  return a;
}

inline Assignment assign_mixed(const Clustering& c, double p,
                               std::uint64_t seed) {
  detail::check_probability(p);
  const DesignStreams streams(seed);
  Assignment a = assign_mixed_with(c, p, streams.arm, streams.cluster,
                                   streams.unit);
  a.seed = seed;
  return a;
}

}  // namespace mixedrand

#endif  // MIXEDRAND_DESIGN_HPP_
