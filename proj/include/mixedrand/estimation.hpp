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

// ATE estimators: the cluster-based Horvitz-Thompson estimator, the two arm
// estimators of the mixed design and their debiased combination.

#ifndef MIXEDRAND_ESTIMATION_HPP_
#define MIXEDRAND_ESTIMATION_HPP_

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <span>
#include <stdexcept>
#include <vector>

#include "mixedrand/design.hpp"
#include "mixedrand/graph.hpp"
#include "mixedrand/partition.hpp"

namespace mixedrand {

// t_i = z_i / p - (1 - z_i) / (1 - p).
inline double ht_weight(int z, double p) {
  return z ? 1.0 / p : -1.0 / (1.0 - p);
}

// (1/n) sum_i t_i Y_i, from observed outcomes only.
inline double ht_estimate(std::span<const int> z, std::span<const double> y,
                          double p) {
  if (!(p > 0.0 && p < 1.0)) {
    throw std::invalid_argument("HT estimator needs p in (0, 1)");
  }
  if (z.size() != y.size()) {
    throw std::invalid_argument("treatment and outcome lengths differ");
  }
  if (z.empty()) return 0.0;
  double s = 0.0;
  for (std::size_t i = 0; i < z.size(); ++i) s += ht_weight(z[i], p) * y[i];
  return s / static_cast<double>(z.size());
}

inline double ht_cluster_based(const InterferenceGraph& g,
                               const OutcomeModel& model,
                               const Assignment& a) {
  const auto y = evaluate_outcomes(g, model, a.z);
  return ht_estimate(a.z, y, a.p);
}

struct EstimateBreakdown {
  double tau = 0.0;
  double tau_c = 0.0;
  double tau_b = 0.0;
  double rho = 1.0;
  // Per-unit contributions, tau = mean(L):
  // L_i = 2 (2 rho w_i - rho - w_i + 1) t_i Y_i.
  std::vector<double> L;
};

// Mixed-design estimate from observed outcomes only.
inline EstimateBreakdown mixed_estimate_observed(std::span<const int> z,
                                                 std::span<const int> w_tilde,
                                                 std::span<const double> y,
                                                 double p, double rho,
                                                 bool keep_contributions = true) {
  if (!std::isfinite(rho)) {
    throw std::invalid_argument("mixed estimate needs a finite rho");
  }
  if (!(p > 0.0 && p < 1.0)) {
    throw std::invalid_argument("mixed estimate needs p in (0, 1)");
  }
  const std::size_t n = z.size();
  if (w_tilde.size() != n || y.size() != n) {
    throw std::invalid_argument("mixed estimate: length mismatch");
  }
  EstimateBreakdown out;
  out.rho = rho;
  if (n == 0) return out;
  if (keep_contributions) out.L.resize(n);
  double sc = 0.0;
  double sb = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double ty = ht_weight(z[i], p) * y[i];
    if (w_tilde[i]) {
      sc += ty;
    } else {
      sb += ty;
    }
    if (keep_contributions) {
      const double w = w_tilde[i];
      out.L[i] = 2.0 * (2.0 * rho * w - rho - w + 1.0) * ty;
    }
  }
  const double nn = static_cast<double>(n);
  out.tau_c = 2.0 * sc / nn;
  out.tau_b = 2.0 * sb / nn;
  out.tau = rho * out.tau_c - (rho - 1.0) * out.tau_b;
  return out;
}

inline EstimateBreakdown mixed_estimate(const InterferenceGraph& g,
                                        const OutcomeModel& model,
                                        const Clustering& c,
                                        const Assignment& a, double rho) {
  if (c.n() != g.n() || a.z.size() != g.n() || a.w_tilde.size() != g.n()) {
    throw std::invalid_argument("mixed estimate: size mismatch");
  }
  for (UnitId i = 0; i < g.n(); ++i) {
    if (!a.W.empty() && a.w_tilde[i] != a.W[c.cluster_of(i)]) {
      throw std::invalid_argument(
          "assignment was not produced under the given clustering");
    }
  }
  const auto y = evaluate_outcomes(g, model, a.z);
  return mixed_estimate_observed(a.z, a.w_tilde, y, a.p, rho);
}

// rho = sum_i sum_j v_ij / sum_i sum_j v_ij 1{c(i) = c(j)}.
inline double rho_fixed(const InterferenceGraph& g, const Clustering& c) {
  if (c.n() != g.n()) {
    throw std::invalid_argument("clustering does not match graph");
  }
  double total = 0.0;
  double within = 0.0;
  for (const Edge& e : g.edges()) {
    total += e.weight;
    if (c.cluster_of(e.from) == c.cluster_of(e.to)) within += e.weight;
  }
  if (within == 0.0) {
    throw std::domain_error(
        "rho undefined: clustering carries no within-cluster weight");
  }
  return total / within;
}

enum class DesignKind {
  kClusterBased,
  kMixed,
};

// Largest design support exhaustive enumeration accepts.
inline constexpr double kMaxEnumeratedOutcomes = 16777216.0;  // 2^24

// Calls visit(probability, assignment) for every outcome of the design on
// clustering c. Outcomes: (W, z) for the mixed design, z for cluster-based.
inline void enumerate_design(
    const Clustering& c, double p, DesignKind kind,
    const std::function<void(double, const Assignment&)>& visit) {
  if (!(p > 0.0 && p < 1.0)) {
    throw std::invalid_argument("enumeration needs p in (0, 1)");
  }
  double support = 1.0;
  for (const auto& cl : c.clusters()) {
    support *= kind == DesignKind::kMixed
                   ? 2.0 + std::ldexp(1.0, static_cast<int>(cl.size()))
                   : 2.0;
  }
  if (c.n() > 16 || support > kMaxEnumeratedOutcomes) {
    throw std::invalid_argument("instance too large for exhaustive enumeration");
  }
  const std::size_t m = c.size();
  Assignment a;
  a.p = p;
  a.W.assign(m, kind == DesignKind::kClusterBased ? 1 : 0);
  a.w_tilde.assign(c.n(), kind == DesignKind::kClusterBased ? 1 : 0);
  a.z.assign(c.n(), 0);

  // Depth-first over clusters; each cluster contributes its arm and its
  // treatments.
  std::function<void(ClusterId, double)> rec = [&](ClusterId k, double prob) {
    if (k == m) {
      visit(prob, a);
      return;
    }
    const auto& members = c.cluster(k);
    const double arm_prob = kind == DesignKind::kMixed ? 0.5 : 1.0;
    // Cluster arm: one shared coin.
    a.W[k] = 1;
    for (UnitId i : members) a.w_tilde[i] = 1;
    for (int coin = 0; coin <= 1; ++coin) {
      for (UnitId i : members) a.z[i] = coin;
      rec(k + 1, prob * arm_prob * (coin ? p : 1.0 - p));
    }
    if (kind != DesignKind::kMixed) return;
    // Bernoulli arm: independent coins.
    a.W[k] = 0;
    for (UnitId i : members) a.w_tilde[i] = 0;
    const std::size_t s = members.size();
    for (std::size_t mask = 0; mask < (std::size_t{1} << s); ++mask) {
      double q = arm_prob;
      for (std::size_t b = 0; b < s; ++b) {
        const int zi = (mask >> b) & 1;
        a.z[members[b]] = zi;
        q *= zi ? p : 1.0 - p;
      }
      rec(k + 1, prob * q);
    }
  };
  rec(0, 1.0);
}

struct ExactMoments {
  double mean = 0.0;
  double variance = 0.0;
};

// Exact mean and variance of the mixed estimator (kind = kMixed) or the
// cluster-based HT estimator (kind = kClusterBased) over the design law.
inline ExactMoments exhaustive_moments(const InterferenceGraph& g,
                                       const OutcomeModel& model,
                                       const Clustering& c, double rho,
                                       double p, DesignKind kind) {
  double m1 = 0.0;
  double m2 = 0.0;
  enumerate_design(c, p, kind, [&](double prob, const Assignment& a) {
    const auto y = evaluate_outcomes(g, model, a.z);
    const double tau =
        kind == DesignKind::kMixed
            ? mixed_estimate_observed(a.z, a.w_tilde, y, p, rho, false).tau
            : ht_estimate(a.z, y, p);
    m1 += prob * tau;
    m2 += prob * tau * tau;
  });
  return {m1, std::max(0.0, m2 - m1 * m1)};
}

// Exact E[tau] of the mixed-design estimator with multiplier rho.
inline double exhaustive_expectation(const InterferenceGraph& g,
                                     const OutcomeModel& model,
                                     const Clustering& c, double rho,
                                     double p) {
  return exhaustive_moments(g, model, c, rho, p, DesignKind::kMixed).mean;
}

}  // namespace mixedrand

#endif  // MIXEDRAND_ESTIMATION_HPP_
