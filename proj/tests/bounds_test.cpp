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

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <array>
#include <iostream>
#include <random>

#include "mixedrand/bounds.hpp"
#include "mixedrand/estimation.hpp"
#include "mixedrand/partition.hpp"
#include "support.hpp"

namespace mixedrand {
namespace {

using testing_support::brute_cluster_moments;
using testing_support::brute_eta_delta;
using testing_support::brute_mixed_moments;
using testing_support::brute_outcome_range;
using testing_support::InstanceShape;
using testing_support::random_instance;

// A(C) evaluated from scratch on a clustering.
double direct_A(const InterferenceGraph& g, const Clustering& c, double p,
                double yl, double ym) {
  return surrogate_A(partition_stats(g, c), p, yl, ym, positive_weight_scale(g));
}

Clustering merged(const Clustering& c, ClusterId k, ClusterId l) {
  auto clusters = c.clusters();
  clusters[k].insert(clusters[k].end(), clusters[l].begin(), clusters[l].end());
  clusters.erase(clusters.begin() + static_cast<std::ptrdiff_t>(l));
  return Clustering(c.n(), std::move(clusters));
}

TEST(Clustering, RejectsNonPartitions) {
  EXPECT_THROW(Clustering(3, {{0, 1}}), std::invalid_argument);
  EXPECT_THROW(Clustering(3, {{0, 1}, {1, 2}}), std::invalid_argument);
  EXPECT_THROW(Clustering(3, {{0, 1, 2}, {}}), std::invalid_argument);
  EXPECT_THROW(Clustering(3, {{0, 1, 3}, {2}}), std::invalid_argument);
  const auto c = Clustering::from_labels({2, 0, 2, 5});
  EXPECT_EQ(c.size(), 3u);
  EXPECT_EQ(c.cluster_of(0), c.cluster_of(2));
  EXPECT_EQ(c.cluster(c.cluster_of(3)), (std::vector<UnitId>{3}));
}

TEST(PartitionStats, Examples) {
  const InterferenceGraph empty(5, {});
  const auto s = partition_stats(empty, Clustering(5, {{0, 1}, {2, 3}, {4}}));
  EXPECT_DOUBLE_EQ(s.eta, 9.0 / 25.0);
  EXPECT_FALSE(s.rho_defined());
  EXPECT_TRUE(std::isnan(s.rho));

  const InterferenceGraph g(3, {{0, 2, 0.5}, {2, 0, 0.4}});
  EXPECT_NEAR(partition_stats(g, Clustering(3, {{0, 1}, {2}})).delta, 0.4 / 9.0,
              1e-15);

  const InterferenceGraph h(3, {{0, 1, 0.6}, {1, 0, 0.6}, {0, 2, 0.4}});
  const auto sh = partition_stats(h, Clustering(3, {{0, 1}, {2}}));
  EXPECT_NEAR(sh.rho, 4.0 / 3.0, 1e-15);
  EXPECT_NEAR(sh.rho * sh.within_weight, sh.total_weight, 1e-15);
}

TEST(PartitionStats, MatchesDefinitions) {
  std::mt19937_64 rng(101);
  for (int t = 0; t < 200; ++t) {
    const auto s = random_instance(rng, InstanceShape{2, 10, 5, 0.4});
    const auto st = partition_stats(s.g, s.c);
    const auto [eta, delta] = brute_eta_delta(s.g, s.c);
    EXPECT_NEAR(st.eta, eta, 1e-15);
    EXPECT_NEAR(st.delta, delta, 1e-15);
    const double n = static_cast<double>(s.g.n());
    EXPECT_GE(st.eta, 1.0 / n - 1e-15);
    EXPECT_LE(st.eta, 1.0 + 1e-15);
    // Size bound on delta for normalised weights.
    EXPECT_LE(st.delta, static_cast<double>(st.max_cluster_size) / n + 1e-15);
  }
}

TEST(ClusterBound, Substitution) {
  PartitionStats st;
  st.eta = 0.36;
  st.delta = 0.0;
  const auto b = bound_cluster_based(st, 0.5, 1.0, 1.0, 1.0);
  EXPECT_NEAR(b.lower, 1.26, 1e-12);
  EXPECT_NEAR(b.upper, 1.8, 1e-12);
  st.delta = 0.7;
  const auto b0 = bound_cluster_based(st, 0.5, 1.0, 2.0, 0.0);
  EXPECT_NEAR(b0.upper, (6.0 * 4.0 - 2.0) * 0.36, 1e-12);
}

TEST(ClusterBound, InvalidInputs) {
  PartitionStats st;
  EXPECT_THROW(bound_cluster_based(st, 0.0, 1, 2, 1), std::invalid_argument);
  EXPECT_THROW(bound_cluster_based(st, 1.0, 1, 2, 1), std::invalid_argument);
  EXPECT_THROW(bound_cluster_based(st, 0.5, 0, 2, 1), std::invalid_argument);
  EXPECT_THROW(bound_cluster_based(st, 0.5, 3, 2, 1), std::invalid_argument);
}

TEST(ClusterBound, SandwichesExactVariance) {
  std::mt19937_64 rng(7);
  for (int t = 0; t < 100; ++t) {
    const auto s = random_instance(rng, InstanceShape{2, 8, 3, 0.4});
    const double p = std::array<double, 3>{0.3, 0.5, 0.7}[t % 3];
    const auto [yl, ym] = brute_outcome_range(s.g, s.model);
    ASSERT_GT(yl, 0.0);
    const double var = brute_cluster_moments(s, p).variance;
    const auto b = bound_cluster_based(partition_stats(s.g, s.c), p, yl, ym,
                                       s.model.gamma * s.model.gamma);
    EXPECT_LE(b.lower, var + 1e-10) << "trial " << t;
    EXPECT_GE(b.upper, var - 1e-10) << "trial " << t;
  }
}

TEST(MixedBound, Substitution) {
  PartitionStats st;
  st.rho = 1.0;
  st.eta = 1.0;
  st.delta = 0.0;
  const auto b = bound_mixed(st, 0.5, 1.0, 2.0, 1.0, 0.0, 10);
  EXPECT_NEAR(b.upper, 33.0, 1e-12);
  st.delta = 0.3;
  EXPECT_NEAR(bound_mixed(st, 0.5, 1.0, 2.0, 0.0, 0.0, 10).upper, 33.0, 1e-12);
  const auto r = bound_mixed(st, 0.5, 1.0, 2.0, 0.0, 2.0, 10);
  EXPECT_NEAR(r.upper - 33.0, 2.0 / (10 * 0.25), 1e-12);
  EXPECT_EQ(r.remainder_coefficient, 2.0);
}

TEST(MixedBound, LowerNotAboveUpper) {
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> u(0.01, 1.0);
  for (int t = 0; t < 1000; ++t) {
    PartitionStats st;
    st.eta = u(rng);
    st.delta = u(rng) - 0.5;
    st.rho = 1.0 + 3.0 * u(rng);
    const double yl = 5.0 * u(rng);
    const double ym = yl + 5.0 * u(rng);
    const double c = 3.0 * u(rng);
    const auto b = bound_mixed(st, u(rng) * 0.98, yl, ym, u(rng), c, 20);
    EXPECT_LE(b.lower, b.upper);
  }
}

TEST(MixedBound, RejectsUndefinedRho) {
  PartitionStats st;
  EXPECT_THROW(bound_mixed(st, 0.5, 1, 2, 1, 0, 4), std::invalid_argument);
}

// The remainder constant is unspecified, so it is calibrated on one family
// of instances and then checked on a fresh family from the same generator.
// Both families keep rho >= 1, the regime of non-negative interference where
// the remainder scales with rho^2; for rho near 0 or negative the Bernoulli
// arm's (rho - 1)^2 share does not shrink with rho and no such constant
// exists.
TEST(MixedBound, CalibratedRemainderCoversExactVariance) {
  // Returns the remainder coefficient each instance needs for the upper
  // bound to cover its exact variance.
  auto needed = [](std::uint64_t seed, int count) {
    std::mt19937_64 rng(seed);
    std::vector<double> need;
    while (static_cast<int>(need.size()) < count) {
      const auto s = random_instance(rng, InstanceShape{2, 6, 3, 0.5});
      const auto st = partition_stats(s.g, s.c);
      if (!st.rho_defined() || !(st.rho >= 1.0)) continue;
      const double p = 0.5;
      const auto [yl, ym] = brute_outcome_range(s.g, s.model);
      const double var = brute_mixed_moments(s, st.rho, p).variance;
      const double g2 = s.model.gamma * s.model.gamma;
      const auto b0 = bound_mixed(st, p, yl, ym, g2, 0.0, s.g.n());
      const double scale =
          st.rho * st.rho / (static_cast<double>(s.g.n()) * p * (1 - p));
      need.push_back((var - b0.upper) / scale);
    }
    return need;
  };
  const auto fit = needed(1234, 200);
  const double c0 = 2.0 * *std::max_element(fit.begin(), fit.end());
  RecordProperty("calibrated_C0", std::to_string(c0));
  std::cout << "calibrated remainder coefficient C0 = " << c0 << "\n";
  const auto held_out = needed(98765, 1000);
  const auto covered = std::count_if(held_out.begin(), held_out.end(),
                                     [c0](double x) { return x <= c0; });
  const double worst = *std::max_element(held_out.begin(), held_out.end());
  std::cout << "held-out coverage " << covered << "/" << held_out.size()
            << ", largest needed " << worst << "\n";
  EXPECT_GE(static_cast<double>(covered), 0.98 * held_out.size());
}

TEST(Surrogate, EqualBoundsDropDeltaTerm) {
  PartitionStats st;
  st.rho = 1.5;
  st.eta = 0.2;
  st.delta = 0.4;
  const double a = surrogate_A(st, 0.5, 2.0, 2.0, 1.0);
  EXPECT_NEAR(a, mixed_upper_coefficient(0.5, 2.0, 2.0) * 2.25 * 0.2, 1e-12);
  EXPECT_THROW(surrogate_A(st, 0.5, 1.0, 2.0, 0.0), std::invalid_argument);
}

TEST(Surrogate, TermByTermAgainstMixedBound) {
  PartitionStats st;
  st.rho = 1.0;
  st.eta = 1.0;
  st.delta = 0.25;
  const double a = surrogate_A(st, 0.5, 1.0, 2.0, 1.0);
  const double ub = bound_mixed(st, 0.5, 1.0, 2.0, 1.0, 0.0, 10).upper;
  EXPECT_NEAR(a, ub, 1e-12);
}

TEST(Surrogate, DominatesBoundWithTrueGamma) {
  std::mt19937_64 rng(55);
  int used = 0;
  while (used < 50) {
    const auto s = random_instance(rng, InstanceShape{2, 8, 3, 0.5});
    const auto st = partition_stats(s.g, s.c);
    const double a = positive_weight_scale(s.g);
    if (!st.rho_defined() || !(a > 0.0)) continue;
    ++used;
    const auto [yl, ym] = brute_outcome_range(s.g, s.model);
    const double g2 = s.model.gamma * s.model.gamma;
    EXPECT_LE(g2, (ym - yl) * (ym - yl) / (a * a) + 1e-12);
    EXPECT_GE(surrogate_A(st, 0.5, yl, ym, a) + 1e-12,
              bound_mixed(st, 0.5, yl, ym, g2, 0.0, s.g.n()).upper);
  }
}

TEST(MergeDelta, IsolatedSingletonsRaiseA) {
  const InterferenceGraph g(4, {{0, 1, 0.5}, {1, 0, 0.5}});
  const Clustering c(4, {{0, 1}, {2}, {3}});
  EXPECT_GT(merge_delta(g, c, 1, 2, 0.5, 1.0, 2.0), 0.0);
}

TEST(MergeDelta, StrongMutualPairCanLowerA) {
  // Two mutually heavy pairs {0,1} and {2,3} with strong cross links: joining
  // them removes a large delta term.
  const InterferenceGraph g(4, {{0, 1, 0.1}, {1, 0, 0.1}, {2, 3, 0.1}, {3, 2, 0.1},
                                {0, 2, 0.9}, {2, 0, 0.9}, {1, 3, 0.9}, {3, 1, 0.9}});
  const Clustering c(4, {{0, 1}, {2, 3}});
  const double yl = 1.0, ym = 10.0;
  const double d = merge_delta(g, c, 0, 1, 0.5, yl, ym);
  const double direct = direct_A(g, merged(c, 0, 1), 0.5, yl, ym) -
                        direct_A(g, c, 0.5, yl, ym);
  EXPECT_LT(direct, 0.0);
  EXPECT_NEAR(d, direct, 1e-9);
}

TEST(MergeDelta, MatchesRecomputation) {
  std::mt19937_64 rng(66);
  int used = 0;
  while (used < 30) {
    const auto s = random_instance(rng, InstanceShape{3, 10, 6, 0.4});
    if (!(positive_weight_scale(s.g) > 0.0) || s.c.size() < 2) continue;
    if (!partition_stats(s.g, s.c).rho_defined()) continue;
    ++used;
    const auto [yl, ym] = brute_outcome_range(s.g, s.model);
    const double before = direct_A(s.g, s.c, 0.5, yl, ym);
    for (ClusterId k = 0; k < s.c.size(); ++k) {
      for (ClusterId l = k + 1; l < s.c.size(); ++l) {
        const double after = direct_A(s.g, merged(s.c, k, l), 0.5, yl, ym);
        const double inc = merge_delta(s.g, s.c, k, l, 0.5, yl, ym);
        EXPECT_NEAR(inc, after - before, 1e-9 * std::max(1.0, std::abs(before)));
        EXPECT_NEAR(inc, merge_delta(s.g, s.c, l, k, 0.5, yl, ym), 1e-12);
      }
    }
  }
  const InterferenceGraph g(2, {{0, 1, 0.5}});
  EXPECT_THROW(merge_delta(g, Clustering::singletons(2), 0, 0, 0.5, 1, 2),
               std::invalid_argument);
  EXPECT_THROW(merge_delta(g, Clustering::singletons(2), 0, 2, 0.5, 1, 2),
               std::invalid_argument);
}

TEST(Bounds, ShiftingAlphaLeavesPartitionStatsAlone) {
  std::mt19937_64 rng(12);
  auto s = random_instance(rng, InstanceShape{4, 8, 3, 0.5});
  const auto st = partition_stats(s.g, s.c);
  const auto r0 = brute_outcome_range(s.g, s.model);
  for (double& a : s.model.alpha) a += 2.5;
  const auto r1 = brute_outcome_range(s.g, s.model);
  EXPECT_NEAR(r1.first - r0.first, 2.5, 1e-12);
  EXPECT_NEAR(r1.second - r0.second, 2.5, 1e-12);
  const auto st1 = partition_stats(s.g, s.c);
  EXPECT_EQ(st.eta, st1.eta);
  EXPECT_EQ(st.delta, st1.delta);
}

}  // namespace
}  // namespace mixedrand
