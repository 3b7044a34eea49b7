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

// Shared test fixtures and brute-force oracles. Everything here is written
// from the model definitions directly and avoids the library code paths it
// is used to check.

#ifndef MIXEDRAND_TESTS_SUPPORT_HPP_
#define MIXEDRAND_TESTS_SUPPORT_HPP_

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <random>
#include <vector>

#include "mixedrand/graph.hpp"
#include "mixedrand/partition.hpp"

namespace testing_support {

using mixedrand::ClusterId;
using mixedrand::Clustering;
using mixedrand::Edge;
using mixedrand::InterferenceGraph;
using mixedrand::OutcomeModel;

struct SmallInstance {
  InterferenceGraph g;
  OutcomeModel model;
  Clustering c;
};

struct InstanceShape {
  std::size_t n_min = 2;
  std::size_t n_max = 6;
  std::size_t m_max = 3;
  double edge_prob = 0.4;
};

// Random directed weights in [-1, 2], rows rescaled so sum_j |v_ij| <= 1 and
// the global sum made non-negative; alpha in [3, 5], beta in [-1, 1],
// gamma in [-1.5, 1.5]; a random partition into at most m_max clusters.
inline SmallInstance random_instance(std::mt19937_64& rng,
                                     const InstanceShape& shape = {}) {
  std::uniform_int_distribution<std::size_t> nd(shape.n_min, shape.n_max);
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  const std::size_t n = nd(rng);
  std::vector<std::vector<double>> v(n, std::vector<double>(n, 0.0));
  std::vector<std::vector<bool>> has(n, std::vector<bool>(n, false));
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      if (i != j && u01(rng) < shape.edge_prob) {
        has[i][j] = true;
        v[i][j] = -1.0 + 3.0 * u01(rng);
      }
    }
  }
  for (std::size_t i = 0; i < n; ++i) {
    double s = 0.0;
    for (std::size_t j = 0; j < n; ++j) s += std::abs(v[i][j]);
    if (s > 1.0) {
      for (std::size_t j = 0; j < n; ++j) v[i][j] /= s;
    }
  }
  double total = 0.0;
  for (const auto& row : v) {
    for (double x : row) total += x;
  }
  std::vector<Edge> edges;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      if (has[i][j]) edges.push_back({i, j, total < 0.0 ? -v[i][j] : v[i][j]});
    }
  }
  OutcomeModel m;
  for (std::size_t i = 0; i < n; ++i) {
    m.alpha.push_back(3.0 + 2.0 * u01(rng));
    m.beta.push_back(-1.0 + 2.0 * u01(rng));
  }
  m.gamma = -1.5 + 3.0 * u01(rng);

  std::uniform_int_distribution<std::size_t> md(1, std::min(shape.m_max, n));
  const std::size_t mm = md(rng);
  std::uniform_int_distribution<std::size_t> pick(0, mm - 1);
  std::vector<std::size_t> labels(n);
  for (auto& l : labels) l = pick(rng);
  return {InterferenceGraph(n, std::move(edges)), std::move(m),
          Clustering::from_labels(labels)};
}

// Dense weight matrix; parallel edges are summed.
inline std::vector<std::vector<double>> dense_weights(
    const InterferenceGraph& g) {
  std::vector<std::vector<double>> v(g.n(), std::vector<double>(g.n(), 0.0));
  for (const Edge& e : g.edges()) v[e.from][e.to] += e.weight;
  return v;
}

inline std::vector<double> outcomes_direct(
    const std::vector<std::vector<double>>& v, const OutcomeModel& m,
    const std::vector<int>& z) {
  const std::size_t n = z.size();
  std::vector<double> y(n);
  for (std::size_t i = 0; i < n; ++i) {
    double s = 0.0;
    for (std::size_t j = 0; j < n; ++j) s += v[i][j] * z[j];
    y[i] = m.alpha[i] + z[i] * m.beta[i] + m.gamma * s;
  }
  return y;
}

inline std::vector<int> bits_of(std::uint64_t mask, std::size_t n) {
  std::vector<int> z(n);
  for (std::size_t i = 0; i < n; ++i) z[i] = static_cast<int>((mask >> i) & 1);
  return z;
}

// (Y_L, Y_M) by enumerating all treatment vectors.
inline std::pair<double, double> brute_outcome_range(const InterferenceGraph& g,
                                                     const OutcomeModel& m) {
  const auto v = dense_weights(g);
  double lo = std::numeric_limits<double>::infinity();
  double hi = -lo;
  for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << g.n()); ++mask) {
    for (double y : outcomes_direct(v, m, bits_of(mask, g.n()))) {
      lo = std::min(lo, y);
      hi = std::max(hi, y);
    }
  }
  return {lo, hi};
}

struct Moments {
  double mean = 0.0;
  double variance = 0.0;
};

// Exact moments by flat enumeration over (W, z) in {0,1}^m x {0,1}^n. A pair
// is feasible when every cluster-arm cluster is constant in z.
inline Moments brute_mixed_moments(const SmallInstance& s, double rho,
                                   double p) {
  const std::size_t n = s.g.n();
  const std::size_t m = s.c.size();
  const auto v = dense_weights(s.g);
  double m1 = 0.0, m2 = 0.0;
  for (std::uint64_t wmask = 0; wmask < (std::uint64_t{1} << m); ++wmask) {
    for (std::uint64_t zmask = 0; zmask < (std::uint64_t{1} << n); ++zmask) {
      const auto z = bits_of(zmask, n);
      double prob = std::pow(0.5, static_cast<double>(m));
      bool feasible = true;
      for (std::size_t k = 0; k < m && feasible; ++k) {
        const auto& members = s.c.cluster(k);
        if ((wmask >> k) & 1) {
          for (auto i : members) feasible = feasible && z[i] == z[members[0]];
          prob *= z[members[0]] ? p : 1.0 - p;
        } else {
          for (auto i : members) prob *= z[i] ? p : 1.0 - p;
        }
      }
      if (!feasible) continue;
      const auto y = outcomes_direct(v, s.model, z);
      double tc = 0.0, tb = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        const double t = z[i] / p - (1 - z[i]) / (1.0 - p);
        if ((wmask >> s.c.cluster_of(i)) & 1) {
          tc += t * y[i];
        } else {
          tb += t * y[i];
        }
      }
      tc *= 2.0 / static_cast<double>(n);
      tb *= 2.0 / static_cast<double>(n);
      const double tau = rho * tc - (rho - 1.0) * tb;
      m1 += prob * tau;
      m2 += prob * tau * tau;
    }
  }
  return {m1, m2 - m1 * m1};
}

// Exact moments of the HT estimator under cluster-based randomisation.
inline Moments brute_cluster_moments(const SmallInstance& s, double p) {
  const std::size_t n = s.g.n();
  const std::size_t m = s.c.size();
  const auto v = dense_weights(s.g);
  double m1 = 0.0, m2 = 0.0;
  for (std::uint64_t cmask = 0; cmask < (std::uint64_t{1} << m); ++cmask) {
    std::vector<int> z(n);
    double prob = 1.0;
    for (std::size_t k = 0; k < m; ++k) prob *= ((cmask >> k) & 1) ? p : 1.0 - p;
    for (std::size_t i = 0; i < n; ++i) {
      z[i] = static_cast<int>((cmask >> s.c.cluster_of(i)) & 1);
    }
    const auto y = outcomes_direct(v, s.model, z);
    double tau = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      tau += (z[i] / p - (1 - z[i]) / (1.0 - p)) * y[i];
    }
    tau /= static_cast<double>(n);
    m1 += prob * tau;
    m2 += prob * tau * tau;
  }
  return {m1, m2 - m1 * m1};
}

// eta and delta straight from their definitions.
inline std::pair<double, double> brute_eta_delta(const InterferenceGraph& g,
                                                 const Clustering& c) {
  const double n = static_cast<double>(g.n());
  const auto v = dense_weights(g);
  double eta = 0.0;
  for (std::size_t k = 0; k < c.size(); ++k) {
    eta += static_cast<double>(c.cluster(k).size() * c.cluster(k).size());
  }
  eta /= n * n;
  double delta = 0.0;
  for (std::size_t k = 0; k < c.size(); ++k) {
    for (std::size_t l = 0; l < c.size(); ++l) {
      if (k == l) continue;
      double dkl = 0.0, dlk = 0.0;
      for (auto i : c.cluster(k)) {
        for (auto j : c.cluster(l)) {
          dkl += v[i][j];
          dlk += v[j][i];
        }
      }
      delta += dkl * dlk;
    }
  }
  return {eta, delta / (n * n)};
}

// Random undirected simple graph on n vertices as symmetric directed edges
// with independent weights in [lo, hi].
inline InterferenceGraph random_graph(std::mt19937_64& rng, std::size_t n,
                                      double edge_prob, double lo, double hi) {
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  std::vector<Edge> edges;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      if (u01(rng) < edge_prob) {
        edges.push_back({i, j, lo + (hi - lo) * u01(rng)});
        edges.push_back({j, i, lo + (hi - lo) * u01(rng)});
      }
    }
  }
  return InterferenceGraph(n, std::move(edges));
}

// Surrogate objective A from its definition; +inf when rho is undefined.
inline double brute_objective(const InterferenceGraph& g, const Clustering& c,
                              double p, double yl, double ym) {
  const auto v = dense_weights(g);
  double a = 0.0, total = 0.0, within = 0.0;
  for (std::size_t i = 0; i < g.n(); ++i) {
    double pos = 0.0;
    for (std::size_t j = 0; j < g.n(); ++j) {
      pos += std::max(v[i][j], 0.0);
      total += v[i][j];
      if (c.cluster_of(i) == c.cluster_of(j)) within += v[i][j];
    }
    a = std::max(a, pos);
  }
  if (within == 0.0) return std::numeric_limits<double>::infinity();
  const double rho = total / within;
  const auto [eta, delta] = brute_eta_delta(g, c);
  const double q = p * (1 - p);
  const double c_eta = (2 / q + 1) * ym * ym - ym * yl - yl * yl;
  const double c_delta = (ym - yl) * (ym - yl) / (a * a);
  return rho * rho * (c_eta * eta + c_delta * std::abs(delta));
}

inline Clustering merged(const Clustering& c, ClusterId k, ClusterId l) {
  std::vector<std::size_t> labels = c.labels();
  for (auto& x : labels) {
    if (x == l) x = k;
  }
  return Clustering::from_labels(labels);
}

}  // namespace testing_support

#endif  // MIXEDRAND_TESTS_SUPPORT_HPP_
