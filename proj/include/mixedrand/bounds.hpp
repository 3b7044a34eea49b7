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

// Closed-form variance bounds for the cluster-based and mixed designs, the
// greedy clustering objective A(C) and its merge delta.

#ifndef MIXEDRAND_BOUNDS_HPP_
#define MIXEDRAND_BOUNDS_HPP_

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <stdexcept>

#include "mixedrand/graph.hpp"
#include "mixedrand/partition.hpp"

namespace mixedrand {

struct BoundReport {
  double lower = 0.0;
  double upper = 0.0;
  double eta = 0.0;
  double delta = 0.0;
  double rho = 0.0;
  double remainder_coefficient = 0.0;
};

namespace detail {

inline void check_bound_inputs(double p, double y_low, double y_high) {
  if (!(p > 0.0 && p < 1.0)) {
    throw std::invalid_argument("treatment probability must lie in (0, 1)");
  }
  if (!(y_low > 0.0) || !(y_low <= y_high)) {
    throw std::invalid_argument("outcome bounds must satisfy 0 < Y_L <= Y_M");
  }
}

}  // namespace detail

// Variance bounds for the HT estimator under cluster-based randomisation.
inline BoundReport bound_cluster_based(const PartitionStats& stats, double p,
                                       double y_low, double y_high,
                                       double gamma_sq) {
  detail::check_bound_inputs(p, y_low, y_high);
  const double q = p * (1.0 - p);
  BoundReport r;
  r.eta = stats.eta;
  r.delta = stats.delta;
  r.rho = stats.rho;
  r.lower = (y_low * y_low / q - 0.5 * y_high * y_high) * stats.eta +
            gamma_sq * stats.delta;
  r.upper = ((1.0 / q + 2.0) * y_high * y_high - y_high * y_low) * stats.eta +
            gamma_sq * stats.delta;
  return r;
}

// Leading coefficient of rho^2 eta in the mixed-design upper bound.
inline double mixed_upper_coefficient(double p, double y_low, double y_high) {
  const double q = p * (1.0 - p);
  return (2.0 / q + 1.0) * y_high * y_high - y_high * y_low - y_low * y_low;
}

inline double mixed_lower_coefficient(double p, double y_low, double y_high) {
  const double q = p * (1.0 - p);
  return 2.0 / q * y_low * y_low - 2.0 * y_high * y_high + y_high * y_low;
}

// Computable part of the mixed-design variance bounds. The unspecified
// O(rho^2 / (n p (1-p))) remainder is represented by
// remainder_coefficient * rho^2 / (n p (1-p)), added to the upper bound and
// subtracted from the lower bound.
inline BoundReport bound_mixed(const PartitionStats& stats, double p,
                               double y_low, double y_high, double gamma_sq,
                               double remainder_coefficient, std::size_t n) {
  detail::check_bound_inputs(p, y_low, y_high);
  if (!std::isfinite(stats.rho)) {
    throw std::invalid_argument("bound_mixed: rho is not finite");
  }
  if (n == 0) throw std::invalid_argument("bound_mixed: n must be positive");
  const double q = p * (1.0 - p);
  const double rho2 = stats.rho * stats.rho;
  const double remainder =
      remainder_coefficient * rho2 / (static_cast<double>(n) * q);
  BoundReport r;
  r.eta = stats.eta;
  r.delta = stats.delta;
  r.rho = stats.rho;
  r.remainder_coefficient = remainder_coefficient;
  r.upper = mixed_upper_coefficient(p, y_low, y_high) * rho2 * stats.eta +
            gamma_sq * rho2 * stats.delta + remainder;
  r.lower = mixed_lower_coefficient(p, y_low, y_high) * rho2 * stats.eta +
            gamma_sq * rho2 * stats.delta - remainder;
  return r;
}

// a = max_i sum_j max(v_ij, 0).
inline double positive_weight_scale(const InterferenceGraph& g) {
  double a = 0.0;
  for (UnitId i = 0; i < g.n(); ++i) {
    double s = 0.0;
    for (const Edge& e : g.out_edges(i)) s += std::max(e.weight, 0.0);
    a = std::max(a, s);
  }
  return a;
}

// The two coefficients of A(C) = c_eta rho^2 eta + c_delta rho^2 |delta|,
// where c_delta = ((Y_M - Y_L) / a)^2 stands in for the unknown gamma^2.
struct SurrogateObjective {
  double c_eta = 0.0;
  double c_delta = 0.0;

  SurrogateObjective(double p, double y_low, double y_high, double a) {
    detail::check_bound_inputs(p, y_low, y_high);
    if (!(a > 0.0)) {
      throw std::invalid_argument(
          "surrogate objective needs a > 0 (some positive weight)");
    }
    c_eta = mixed_upper_coefficient(p, y_low, y_high);
    const double r = (y_high - y_low) / a;
    c_delta = r * r;
  }

  // +infinity when rho is undefined (no within-cluster weight).
  double value(double rho, double eta, double delta) const {
    if (!std::isfinite(rho)) return std::numeric_limits<double>::infinity();
    const double rho2 = rho * rho;
    return c_eta * rho2 * eta + c_delta * rho2 * std::abs(delta);
  }
};

inline double surrogate_A(const PartitionStats& stats, double p, double y_low,
                          double y_high, double a) {
  return SurrogateObjective(p, y_low, y_high, a)
      .value(stats.rho, stats.eta, stats.delta);
}

// Change in (within weight, n^2 eta, n^2 delta) caused by merging two
// clusters k and l:
//   d_within   = D_kl + D_lk
//   d_eta_n2   = 2 |C_k| |C_l|
//   d_delta_n2 = -2 D_kl D_lk + 2 sum_{j != k,l} (D_kj D_jl + D_lj D_jk)
struct MergeEffect {
  double d_within = 0.0;
  double d_eta_n2 = 0.0;
  double d_delta_n2 = 0.0;
};

// Global quantities needed to evaluate A before and after a merge.
struct MergeState {
  double total = 0.0;
  double within = 0.0;
  double eta_n2 = 0.0;
  double delta_n2 = 0.0;
  double n2 = 1.0;

  double rho() const {
    return within != 0.0 ? total / within
                         : std::numeric_limits<double>::quiet_NaN();
  }
};

inline double merge_delta_value(const SurrogateObjective& obj,
                                const MergeState& s, const MergeEffect& e) {
  const double before = obj.value(s.rho(), s.eta_n2 / s.n2, s.delta_n2 / s.n2);
  const double w_after = s.within + e.d_within;
  if (w_after == 0.0) return std::numeric_limits<double>::infinity();
  const double after = obj.value(s.total / w_after,
                                 (s.eta_n2 + e.d_eta_n2) / s.n2,
                                 (s.delta_n2 + e.d_delta_n2) / s.n2);
  return after - before;
}

// Delta A for merging clusters k and l of `c`, computed from the local
// merge effect rather than by re-evaluating A on the merged partition.
inline double merge_delta(const InterferenceGraph& g, const Clustering& c,
                          ClusterId k, ClusterId l, double p, double y_low,
                          double y_high) {
  if (k == l || k >= c.size() || l >= c.size()) {
    throw std::invalid_argument("merge_delta: need two distinct valid clusters");
  }
  const SurrogateObjective obj(p, y_low, y_high, positive_weight_scale(g));
  const PartitionStats stats = partition_stats(g, c);
  const double n2 = static_cast<double>(g.n()) * static_cast<double>(g.n());
  MergeState state{stats.total_weight, stats.within_weight, stats.eta * n2,
                   stats.delta * n2, n2};

  // Rows and columns of D touching k or l.
  std::map<ClusterId, double> k_out, k_in, l_out, l_in;
  for (const Edge& e : g.edges()) {
    const ClusterId a = c.cluster_of(e.from);
    const ClusterId b = c.cluster_of(e.to);
    if (a == b) continue;
    if (a == k) k_out[b] += e.weight;
    if (b == k) k_in[a] += e.weight;
    if (a == l) l_out[b] += e.weight;
    if (b == l) l_in[a] += e.weight;
  }
  auto get = [](const std::map<ClusterId, double>& m, ClusterId j) {
    const auto it = m.find(j);
    return it == m.end() ? 0.0 : it->second;
  };
  MergeEffect eff;
  const double d_kl = get(k_out, l);
  const double d_lk = get(l_out, k);
  eff.d_within = d_kl + d_lk;
  eff.d_eta_n2 = 2.0 * static_cast<double>(c.cluster(k).size()) *
                 static_cast<double>(c.cluster(l).size());
  double cross = 0.0;
  for (ClusterId j = 0; j < c.size(); ++j) {
    if (j == k || j == l) continue;
    cross += get(k_out, j) * get(l_in, j) + get(l_out, j) * get(k_in, j);
  }
  eff.d_delta_n2 = -2.0 * d_kl * d_lk + 2.0 * cross;
  return merge_delta_value(obj, state, eff);
}

}  // namespace mixedrand

#endif  // MIXEDRAND_BOUNDS_HPP_
