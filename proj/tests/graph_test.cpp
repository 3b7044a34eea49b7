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
#include <queue>
#include <random>
#include <set>

#include "mixedrand/generators.hpp"
#include "mixedrand/graph.hpp"
#include "mixedrand/random.hpp"
#include "support.hpp"

namespace mixedrand {
namespace {

using testing_support::bits_of;
using testing_support::brute_outcome_range;
using testing_support::dense_weights;
using testing_support::outcomes_direct;

InterferenceGraph undirected(std::size_t n,
                             const std::vector<std::pair<UnitId, UnitId>>& links,
                             double w = 0.1) {
  std::vector<Edge> edges;
  for (auto [a, b] : links) {
    edges.push_back({a, b, w});
    edges.push_back({b, a, w});
  }
  return InterferenceGraph(n, std::move(edges));
}

InterferenceGraph simple_cycle(std::size_t n) {
  std::vector<std::pair<UnitId, UnitId>> links;
  for (UnitId i = 0; i < n; ++i) links.push_back({i, (i + 1) % n});
  return undirected(n, links);
}

InterferenceGraph star(std::size_t leaves) {
  std::vector<std::pair<UnitId, UnitId>> links;
  for (UnitId i = 1; i <= leaves; ++i) links.push_back({0, i});
  return undirected(leaves + 1, links);
}

InterferenceGraph complete(std::size_t n) {
  std::vector<std::pair<UnitId, UnitId>> links;
  for (UnitId i = 0; i < n; ++i) {
    for (UnitId j = i + 1; j < n; ++j) links.push_back({i, j});
  }
  return undirected(n, links);
}

// All-pairs hop distances by BFS from every vertex.
std::vector<std::vector<std::size_t>> hop_distances(const InterferenceGraph& g) {
  const std::size_t inf = std::numeric_limits<std::size_t>::max();
  std::vector<std::vector<std::size_t>> d(g.n(), std::vector<std::size_t>(g.n(), inf));
  std::vector<std::set<UnitId>> adj(g.n());
  for (const Edge& e : g.edges()) {
    if (e.from == e.to) continue;
    adj[e.from].insert(e.to);
    adj[e.to].insert(e.from);
  }
  for (UnitId s = 0; s < g.n(); ++s) {
    std::queue<UnitId> q;
    q.push(s);
    d[s][s] = 0;
    while (!q.empty()) {
      const UnitId u = q.front();
      q.pop();
      for (UnitId w : adj[u]) {
        if (d[s][w] == inf) {
          d[s][w] = d[s][u] + 1;
          q.push(w);
        }
      }
    }
  }
  return d;
}

double brute_growth(const InterferenceGraph& g) {
  const auto d = hop_distances(g);
  double kappa = 1.0;
  for (UnitId v = 0; v < g.n(); ++v) {
    for (std::size_t r = 1; r <= g.n(); ++r) {
      std::size_t br = 0, br1 = 0;
      for (UnitId u = 0; u < g.n(); ++u) {
        if (d[v][u] <= r) ++br;
        if (d[v][u] <= r + 1) ++br1;
      }
      kappa = std::max(kappa, static_cast<double>(br1) / static_cast<double>(br));
    }
  }
  return kappa;
}

TEST(RandomStreams, CounterStreamIsPureAndInRange) {
  const CounterStream s(42);
  for (std::uint64_t k = 0; k < 1000; ++k) {
    const double u = s.uniform(k);
    EXPECT_GE(u, 0.0);
    EXPECT_LT(u, 1.0);
    EXPECT_GT(s.open_uniform(k), 0.0);
    EXPECT_LT(s.open_uniform(k), 1.0);
    EXPECT_EQ(u, CounterStream(42).uniform(k));
  }
  EXPECT_NE(s.child("a").key(), s.child("b").key());
  EXPECT_NE(s.child("a", 0).key(), s.child("a", 1).key());
}

TEST(RandomStreams, UniformMeanAndBelow) {
  SequentialRng rng(7);
  double sum = 0.0;
  const int n = 200000;
  for (int i = 0; i < n; ++i) sum += rng.uniform();
  EXPECT_NEAR(sum / n, 0.5, 3.0 * std::sqrt(1.0 / 12.0 / n));
  std::vector<int> counts(5, 0);
  for (int i = 0; i < 50000; ++i) ++counts[rng.below(5)];
  for (int c : counts) EXPECT_NEAR(c, 10000, 5 * std::sqrt(10000 * 0.8));
  EXPECT_THROW(rng.below(0), std::invalid_argument);
}

TEST(Graph, RejectsOutOfRangeIds) {
  EXPECT_THROW(InterferenceGraph(2, {{0, 2, 0.1}}), std::invalid_argument);
}

TEST(Graph, AdjacencyAndWeights) {
  const InterferenceGraph g(3, {{1, 0, 0.5}, {0, 1, 0.2}, {0, 2, -0.1}});
  ASSERT_EQ(g.out_edges(0).size(), 2u);
  EXPECT_EQ(g.out_edges(0)[0].to, 1u);
  EXPECT_EQ(g.out_edges(2).size(), 0u);
  EXPECT_EQ(g.degree(0), 2u);
  EXPECT_EQ(g.degree(2), 1u);
  EXPECT_DOUBLE_EQ(g.total_weight(), 0.6);
  const auto ue = g.undirected_edges();
  ASSERT_EQ(ue.size(), 2u);
  EXPECT_DOUBLE_EQ(ue[0].weight, 0.7);
  EXPECT_DOUBLE_EQ(ue[1].weight, -0.1);
}

TEST(Validate, EmptyGraphHasNoViolations) {
  EXPECT_TRUE(validate(InterferenceGraph(1, {})).ok());
}

TEST(Validate, UnitWeightSum) {
  const auto r = validate(InterferenceGraph(2, {{0, 1, 1.2}}));
  ASSERT_EQ(r.violations.size(), 1u);
  EXPECT_EQ(r.violations[0].kind, ViolationKind::kUnitWeightSum);
  EXPECT_EQ(r.violations[0].message, "unit 0 weight sum 1.2 > 1");
}

TEST(Validate, NegativeGlobalSum) {
  const auto r = validate(InterferenceGraph(2, {{0, 1, 0.5}, {1, 0, -0.7}}));
  ASSERT_EQ(r.violations.size(), 1u);
  EXPECT_EQ(r.violations[0].kind, ViolationKind::kNegativeTotal);
  EXPECT_EQ(r.violations[0].message, "global weight sum -0.2 < 0");
}

TEST(Validate, SelfLoopAndDuplicate) {
  const auto r = validate(InterferenceGraph(2, {{0, 0, 0.1}, {0, 1, 0.1}, {0, 1, 0.2}}));
  std::set<ViolationKind> kinds;
  for (const auto& v : r.violations) kinds.insert(v.kind);
  EXPECT_TRUE(kinds.count(ViolationKind::kSelfLoop));
  EXPECT_TRUE(kinds.count(ViolationKind::kDuplicateEdge));
}

TEST(Ball, CycleAndStar) {
  const auto c = simple_cycle(10);
  EXPECT_EQ(ball(c, 0, 0), (std::vector<UnitId>{0}));
  EXPECT_EQ(ball(c, 0, 1), (std::vector<UnitId>{0, 1, 9}));
  EXPECT_EQ(ball(c, 0, 2), (std::vector<UnitId>{0, 1, 2, 8, 9}));
  EXPECT_EQ(ball(star(4), 3, 2).size(), 5u);
  EXPECT_THROW(ball(c, 10, 1), std::out_of_range);
}

TEST(Ball, MonotoneAndMatchesDistances) {
  std::mt19937_64 rng(11);
  for (int t = 0; t < 20; ++t) {
    const auto g = testing_support::random_graph(rng, 15, 0.15, 0.0, 0.1);
    const auto d = hop_distances(g);
    for (UnitId v = 0; v < g.n(); ++v) {
      std::vector<UnitId> prev;
      for (std::size_t r = 0; r < 6; ++r) {
        const auto b = ball(g, v, r);
        std::vector<UnitId> expect;
        for (UnitId u = 0; u < g.n(); ++u) {
          if (d[v][u] <= r) expect.push_back(u);
        }
        EXPECT_EQ(b, expect);
        EXPECT_TRUE(std::includes(b.begin(), b.end(), prev.begin(), prev.end()));
        prev = b;
      }
    }
  }
}

TEST(GrowthConstant, KnownGraphs) {
  EXPECT_DOUBLE_EQ(growth_constant(simple_cycle(10)), 5.0 / 3.0);
  EXPECT_DOUBLE_EQ(growth_constant(complete(5)), 1.0);
  EXPECT_DOUBLE_EQ(growth_constant(star(4)), 2.5);
}

TEST(GrowthConstant, MatchesBruteForce) {
  std::mt19937_64 rng(5);
  for (int t = 0; t < 30; ++t) {
    const auto g = testing_support::random_graph(rng, 12, 0.2, 0.0, 0.1);
    EXPECT_DOUBLE_EQ(growth_constant(g), brute_growth(g));
  }
}

TEST(GrowthConstant, CycleFamilyBound) {
  for (auto [d, k] : std::vector<std::pair<std::size_t, std::size_t>>{
           {2, 1}, {4, 2}, {6, 3}}) {
    const auto g = generate_cycle(200, d, k);
    EXPECT_LE(growth_constant(g), 2.0 * static_cast<double>(k) + 1e-12)
        << "d=" << d << " kappa=" << k;
  }
}

TEST(Outcomes, SingleEdgeExamples) {
  const InterferenceGraph g(2, {{0, 1, 1.0}});
  const OutcomeModel m{{2.0, 2.0}, {1.0, 1.0}, 0.5};
  EXPECT_DOUBLE_EQ(evaluate_outcomes(g, m, std::vector<int>{1, 1})[0], 3.5);
  EXPECT_DOUBLE_EQ(evaluate_outcomes(g, m, std::vector<int>{1, 0})[0], 3.0);
  EXPECT_DOUBLE_EQ(evaluate_outcomes(g, m, std::vector<int>{0, 1})[0], 2.5);
  EXPECT_THROW(evaluate_outcomes(g, m, std::vector<int>{1}),
               std::invalid_argument);
}

TEST(Outcomes, MatchesNaiveOracle) {
  std::mt19937_64 rng(3);
  std::uniform_int_distribution<std::size_t> nd(1, 50);
  for (int t = 0; t < 100; ++t) {
    const std::size_t n = nd(rng);
    const auto g = testing_support::random_graph(rng, n, 0.2, -0.3, 0.6);
    OutcomeModel m;
    std::uniform_real_distribution<double> u(-1, 1);
    for (std::size_t i = 0; i < n; ++i) {
      m.alpha.push_back(u(rng));
      m.beta.push_back(u(rng));
    }
    m.gamma = u(rng);
    std::vector<int> z(n);
    for (auto& x : z) x = u(rng) > 0;
    const auto y = evaluate_outcomes(g, m, z);
    const auto expect = outcomes_direct(dense_weights(g), m, z);
    for (std::size_t i = 0; i < n; ++i) EXPECT_NEAR(y[i], expect[i], 1e-12);
  }
}

TEST(OutcomeBounds, UnitRangeExample) {
  const InterferenceGraph g(3, {{0, 1, -0.5}, {0, 2, 0.5}});
  const OutcomeModel m{{2, 2, 2}, {-1, 0, 0}, 1.0};
  const auto r = unit_outcome_range(g, m, 0);
  EXPECT_DOUBLE_EQ(r.lower, 0.5);
  EXPECT_DOUBLE_EQ(r.upper, 2.5);
}

TEST(OutcomeBounds, NoInterference) {
  const InterferenceGraph g(3, {{0, 1, 0.5}});
  const OutcomeModel m{{1, 4, 2}, {0, 0, 0}, 0.0};
  const auto r = outcome_bounds(g, m);
  EXPECT_DOUBLE_EQ(r.lower, 1.0);
  EXPECT_DOUBLE_EQ(r.upper, 4.0);
}

TEST(OutcomeBounds, TightAgainstEnumeration) {
  std::mt19937_64 rng(9);
  for (int t = 0; t < 40; ++t) {
    testing_support::InstanceShape shape;
    shape.n_min = 2;
    shape.n_max = 12;
    const auto s = testing_support::random_instance(rng, shape);
    const auto [lo, hi] = brute_outcome_range(s.g, s.model);
    const auto r = outcome_bounds(s.g, s.model);
    EXPECT_NEAR(r.lower, lo, 1e-12);
    EXPECT_NEAR(r.upper, hi, 1e-12);
  }
}

TEST(Rgg, GeometricEdgesRespectRadius) {
  // Rebuild positions from the same stream to check edge lengths.
  const std::size_t n = 100;
  const auto g = generate_rgg(n, 10.0, 0, 3);
  SequentialRng pos(CounterStream(3).child("rgg/positions"));
  const double side = std::sqrt(static_cast<double>(n));
  std::vector<double> x(n), y(n);
  for (std::size_t i = 0; i < n; ++i) {
    x[i] = pos.uniform(0.0, side);
    y[i] = pos.uniform(0.0, side);
  }
  const double radius = std::sqrt(10.0 / M_PI);
  std::size_t close_pairs = 0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      if (std::hypot(x[i] - x[j], y[i] - y[j]) <= radius) ++close_pairs;
    }
  }
  for (const Edge& e : g.edges()) {
    EXPECT_LE(std::hypot(x[e.from] - x[e.to], y[e.from] - y[e.to]),
              radius + 1e-12);
  }
  EXPECT_EQ(g.undirected_edges().size(), close_pairs);
}

TEST(Rgg, LongRangeDegreeAndSymmetry) {
  const auto g = generate_rgg(100, 0.0, 4, 8);
  for (UnitId i = 0; i < g.n(); ++i) EXPECT_GE(g.degree(i), 4u);
  std::set<std::pair<UnitId, UnitId>> directed;
  for (const Edge& e : g.edges()) directed.insert({e.from, e.to});
  for (const auto& [a, b] : directed) EXPECT_TRUE(directed.count({b, a}));
  EXPECT_TRUE(validate(g).violations.empty() ||
              std::none_of(validate(g).violations.begin(),
                           validate(g).violations.end(), [](const auto& v) {
                             return v.kind == ViolationKind::kSelfLoop ||
                                    v.kind == ViolationKind::kDuplicateEdge;
                           }));
}

TEST(Rgg, WeightsInRangeAndDeterministic) {
  const auto a = generate_rgg(300, 2.0, 2, 4);
  const auto b = generate_rgg(300, 2.0, 2, 4);
  ASSERT_EQ(a.edges().size(), b.edges().size());
  for (std::size_t k = 0; k < a.edges().size(); ++k) {
    EXPECT_EQ(a.edges()[k].weight, b.edges()[k].weight);
    EXPECT_GE(a.edges()[k].weight, -0.25);
    EXPECT_LT(a.edges()[k].weight, 0.5);
  }
}

TEST(Rgg, MeanDegreeNearR0) {
  double total = 0.0;
  for (std::uint64_t s = 0; s < 20; ++s) {
    const auto g = generate_rgg(2000, 4.0, 0, 100 + s);
    total += 2.0 * static_cast<double>(g.undirected_edges().size()) / 2000.0;
  }
  const double mean = total / 20.0;
  EXPECT_GE(mean, 3.2);
  EXPECT_LE(mean, 4.8);
}

TEST(Rgg, NormalizeOption) {
  const auto g = generate_rgg(200, 16.0, 0, 2, RggOptions{true});
  for (const auto& v : validate(g).violations) {
    EXPECT_NE(v.kind, ViolationKind::kUnitWeightSum) << v.message;
  }
}

TEST(Rgg, InvalidParameters) {
  EXPECT_THROW(generate_rgg(0, 4, 0, 1), std::invalid_argument);
  EXPECT_THROW(generate_rgg(10, 0, 0, 1), std::invalid_argument);
  EXPECT_THROW(generate_rgg(10, -1, 2, 1), std::invalid_argument);
}

std::set<UnitId> neighbours_of(const InterferenceGraph& g, UnitId i) {
  std::set<UnitId> out;
  for (const Edge& e : g.out_edges(i)) out.insert(e.to);
  return out;
}

TEST(Cycle, Neighbourhoods) {
  EXPECT_EQ(neighbours_of(generate_cycle(10, 2, 1), 0),
            (std::set<UnitId>{1, 2, 8, 9}));
  EXPECT_EQ(neighbours_of(generate_cycle(20, 2, 2), 0),
            (std::set<UnitId>{1, 19, 2, 4, 18, 16}));
}

TEST(Cycle, DegreeBoundAndWeights) {
  for (auto [n, d, k] : std::vector<std::tuple<std::size_t, std::size_t, std::size_t>>{
           {100, 4, 2}, {50, 3, 3}, {30, 2, 1}, {200, 6, 3}}) {
    const auto g = generate_cycle(n, d, k);
    EXPECT_LE(g.max_degree(), 2 * (d + k));
    for (UnitId i = 0; i < n; ++i) {
      double s = 0.0;
      for (const Edge& e : g.out_edges(i)) s += e.weight;
      EXPECT_NEAR(s, 1.0, 1e-12);
    }
  }
  EXPECT_THROW(generate_cycle(10, 2, 3), std::invalid_argument);
  EXPECT_THROW(generate_cycle(8, 2, 2), std::invalid_argument);
}

TEST(OutcomeModelGen, MeansAndAte) {
  for (std::uint64_t s = 0; s < 5; ++s) {
    const auto g = generate_rgg(300, 4.0, 1, s);
    const auto m = generate_outcome_model(g, s + 10);
    double sa = 0.0;
    for (double a : m.alpha) sa += a;
    EXPECT_NEAR(sa / 300.0, 5.0, 1e-12);
    EXPECT_NEAR(m.mean_beta(), 0.5, 1e-12);
    EXPECT_NEAR(m.true_ate(g), 1.0, 1e-12);
  }
}

TEST(OutcomeModelGen, LiteralGammaAndZeroWeight) {
  const auto g = generate_rgg(100, 4.0, 0, 1);
  const auto m = generate_outcome_model(g, 2, GammaRule::kLiteralInverse);
  EXPECT_NEAR(m.gamma * g.total_weight(), 0.5, 1e-12);
  EXPECT_THROW(generate_outcome_model(InterferenceGraph(3, {}), 1),
               std::invalid_argument);
}

TEST(GraphStats, Sidecar) {
  const auto g = generate_cycle(100, 4, 2);
  const auto m = generate_outcome_model(g, 1);
  const auto s = graph_stats(g, std::numeric_limits<std::size_t>::max(), &m);
  EXPECT_EQ(s.max_degree, g.max_degree());
  EXPECT_GE(s.growth_constant, 1.0);
  EXPECT_TRUE(s.has_outcome_bounds);
  EXPECT_LE(s.outcome_range.lower, s.outcome_range.upper);
}

}  // namespace
}  // namespace mixedrand
