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

// Clustering algorithms: greedy merging of a maximum-weight matching,
// 2-hop ball clustering for restricted-growth graphs, and the randomised
// weight-invariant clustering law driven by the edge-incidence eigenvector.

#ifndef MIXEDRAND_CLUSTERING_HPP_
#define MIXEDRAND_CLUSTERING_HPP_

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <map>
#include <stdexcept>
#include <unordered_map>
#include <utility>
#include <vector>

#include "mixedrand/bounds.hpp"
#include "mixedrand/graph.hpp"
#include "mixedrand/matching.hpp"
#include "mixedrand/partition.hpp"
#include "mixedrand/random.hpp"

namespace mixedrand {

struct GreedyOptions {
  MatchingOptions matching;
};

namespace detail {

// Agglomerative state for the greedy clustering. Keeps the sparse
// cross-weight matrix D as per-cluster link maps and caches the local merge
// effect of every pair of clusters within two hops of each other; pairs
// further apart only ever raise A (eta grows, nothing else moves).
class GreedyMerger {
 public:
  struct Link {
    double out = 0.0;  // D_kj
    double in = 0.0;   // D_jk
  };

  GreedyMerger(const InterferenceGraph& g, const Clustering& initial,
               const SurrogateObjective& objective)
      : objective_(objective) {
    const std::size_t m = initial.size();
    members_ = initial.clusters();
    alive_.assign(m, true);
    links_.assign(m, {});
    seen_.assign(m, 0);
    const double n = static_cast<double>(g.n());
    state_.n2 = n * n;
    for (const auto& c : members_) {
      state_.eta_n2 += static_cast<double>(c.size()) * static_cast<double>(c.size());
    }
    for (const Edge& e : g.edges()) {
      const ClusterId a = initial.cluster_of(e.from);
      const ClusterId b = initial.cluster_of(e.to);
      state_.total += e.weight;
      if (a == b) {
        state_.within += e.weight;
      } else {
        links_[a][b].out += e.weight;
        links_[b][a].in += e.weight;
      }
    }
    for (ClusterId a = 0; a < m; ++a) {
      for (const auto& [b, link] : links_[a]) {
        if (a < b) state_.delta_n2 += 2.0 * link.out * link.in;
      }
    }
    abs_.assign(m, 0.0);
    for (ClusterId a = 0; a < m; ++a) update_abs(a);
    for (ClusterId a = 0; a < m; ++a) refresh_pairs_of(a);
  }

  const MergeState& state() const { return state_; }

  // Performs merges while the best merge strictly lowers A. Ties go to the
  // lexicographically smallest cluster pair.
  void run() {
    while (true) {
      const double before = objective_.value(
          state_.rho(), state_.eta_n2 / state_.n2, state_.delta_n2 / state_.n2);
      double best = 0.0;
      std::size_t best_entry = kNoEntry;
      std::size_t kept = 0;
      for (std::size_t pos = 0; pos < candidates_.size(); ++pos) {
        const std::size_t idx = candidates_[pos];
        PairEntry& pe = cache_[idx];
        if (!alive_[pe.k] || !alive_[pe.l] || !may_improve(pe.effect)) {
          pe.listed = false;
          continue;
        }
        candidates_[kept++] = idx;
        const double d = merge_after(pe.effect) - before;
        if (d < best ||
            (d == best && best_entry != kNoEntry &&
             std::pair(pe.k, pe.l) < std::pair(cache_[best_entry].k,
                                               cache_[best_entry].l))) {
          best = d;
          best_entry = idx;
        }
      }
      candidates_.resize(kept);
      if (best_entry == kNoEntry) return;
      const PairEntry chosen = cache_[best_entry];
      ++merges_;
      if (merges_ % 64 == 0) compact();
      merge(chosen.k, chosen.l, chosen.effect);
    }
  }

  Clustering result(std::size_t n) const {
    std::vector<std::vector<UnitId>> clusters;
    for (ClusterId k = 0; k < members_.size(); ++k) {
      if (alive_[k]) clusters.push_back(members_[k]);
    }
    std::sort(clusters.begin(), clusters.end(),
              [](const auto& a, const auto& b) { return a.front() < b.front(); });
    return Clustering(n, std::move(clusters));
  }

 private:
  MergeEffect effect(ClusterId k, ClusterId l) const {
    MergeEffect e;
    const auto& lk = links_[k];
    const auto& ll = links_[l];
    double d_kl = 0.0;
    double d_lk = 0.0;
    if (const auto it = lk.find(l); it != lk.end()) {
      d_kl = it->second.out;
      d_lk = it->second.in;
    }
    e.d_within = d_kl + d_lk;
    e.d_eta_n2 = 2.0 * static_cast<double>(members_[k].size()) *
                 static_cast<double>(members_[l].size());
    double cross = 0.0;
    auto a = lk.begin();
    auto b = ll.begin();
    while (a != lk.end() && b != ll.end()) {
      if (a->first < b->first) {
        ++a;
      } else if (b->first < a->first) {
        ++b;
      } else {
        // common neighbour j: D_kj D_jl + D_lj D_jk
        cross += a->second.out * b->second.in + b->second.out * a->second.in;
        ++a;
        ++b;
      }
    }
    e.d_delta_n2 = -2.0 * d_kl * d_lk + 2.0 * cross;
    return e;
  }

  struct PairEntry {
    ClusterId k = 0;
    ClusterId l = 0;
    MergeEffect effect;
    bool listed = false;  // present in candidates_
  };

  // False only when merging can never lower A, whatever the global state:
  // with no direct link rho stays put, and the eta increase outweighs the
  // largest possible drop of the |delta| term.
  bool may_improve(const MergeEffect& e) const {
    if (e.d_within != 0.0) return true;
    return !(objective_.c_eta * e.d_eta_n2 >
             objective_.c_delta * std::abs(e.d_delta_n2));
  }

  // Sum of |D_kj| + |D_jk| over the clusters j linked to k.
  void update_abs(ClusterId k) {
    double s = 0.0;
    for (const auto& [j, link] : links_[k]) {
      (void)j;
      s += std::abs(link.out) + std::abs(link.in);
    }
    abs_[k] = s;
  }

  // For clusters without a direct link |d_delta_n2| <= 2 abs_k abs_l, so
  // when this fails the pair cannot lower A. The test stays valid until k
  // or l is merged: merges elsewhere only shrink abs_ (|x + y| <= |x| + |y|).
  bool two_hop_may_improve(ClusterId k, ClusterId l) const {
    return objective_.c_eta * static_cast<double>(members_[k].size()) *
               static_cast<double>(members_[l].size()) <=
           objective_.c_delta * abs_[k] * abs_[l];
  }

  void note_change(std::size_t idx) {
    PairEntry& pe = cache_[idx];
    if (!pe.listed && may_improve(pe.effect)) {
      pe.listed = true;
      candidates_.push_back(idx);
    }
  }

  static constexpr std::size_t kNoEntry = std::numeric_limits<std::size_t>::max();

  // A after applying `e` to the current state; +infinity when rho would be
  // undefined.
  double merge_after(const MergeEffect& e) const {
    const double w_after = state_.within + e.d_within;
    if (w_after == 0.0) return std::numeric_limits<double>::infinity();
    return objective_.value(state_.total / w_after,
                            (state_.eta_n2 + e.d_eta_n2) / state_.n2,
                            (state_.delta_n2 + e.d_delta_n2) / state_.n2);
  }

  static std::uint64_t key(ClusterId a, ClusterId b) {
    if (a > b) std::swap(a, b);
    return (static_cast<std::uint64_t>(a) << 32) | static_cast<std::uint64_t>(b);
  }

  void store(ClusterId a, ClusterId b) {
    if (a > b) std::swap(a, b);
    const MergeEffect e = effect(a, b);
    const auto [it, fresh] = index_.emplace(key(a, b), cache_.size());
    if (fresh) {
      cache_.push_back({a, b, e, false});
    } else {
      cache_[it->second].effect = e;
    }
    note_change(it->second);
  }

  // Drops entries that mention merged-away clusters.
  void compact() {
    std::vector<PairEntry> kept;
    kept.reserve(cache_.size());
    index_.clear();
    candidates_.clear();
    for (PairEntry pe : cache_) {
      if (!alive_[pe.k] || !alive_[pe.l]) continue;
      index_.emplace(key(pe.k, pe.l), kept.size());
      if (pe.listed) candidates_.push_back(kept.size());
      kept.push_back(pe);
    }
    cache_.swap(kept);
  }

  // Recomputes cached effects of all pairs (k, x) with x within two hops.
  // Each partner is visited once even when several paths reach it.
  void refresh_pairs_of(ClusterId k) {
    ++stamp_;
    seen_[k] = stamp_;
    for (const auto& [j, link1] : links_[k]) {
      (void)link1;
      if (seen_[j] != stamp_) {
        seen_[j] = stamp_;
        store(k, j);
      }
      for (const auto& [x, link2] : links_[j]) {
        (void)link2;
        if (seen_[x] == stamp_ || links_[k].count(x) != 0) continue;
        seen_[x] = stamp_;
        if (two_hop_may_improve(k, x)) store(k, x);
      }
    }
  }

  // Folds cluster l into cluster k. Cache entries that mention l become
  // stale and are skipped by run() until the next compaction.
  void merge(ClusterId k, ClusterId l, const MergeEffect& e) {
    state_.within += e.d_within;
    state_.eta_n2 += e.d_eta_n2;
    state_.delta_n2 += e.d_delta_n2;

    members_[k].insert(members_[k].end(), members_[l].begin(),
                       members_[l].end());
    std::sort(members_[k].begin(), members_[k].end());
    members_[l].clear();
    alive_[l] = false;

    const std::map<ClusterId, Link> k_before = std::move(links_[k]);
    const std::map<ClusterId, Link> l_before = std::move(links_[l]);
    links_[k] = k_before;
    links_[l].clear();
    links_[k].erase(l);
    for (const auto& [j, link] : l_before) {
      if (j == k) continue;
      Link& kj = links_[k][j];
      kj.out += link.out;
      kj.in += link.in;
      auto& back = links_[j];
      Link& jk = back[k];
      jk.out += link.in;
      jk.in += link.out;
      back.erase(l);
    }

    update_abs(k);
    for (const auto& [j, link] : links_[k]) {
      (void)link;
      update_abs(j);
    }
    refresh_pairs_of(k);

    // For two neighbours a, b of the merged cluster the common-neighbour
    // term through k and l becomes a single term through k + l. The change
    // is D_ak D_lb + D_al D_kb + D_bk D_la + D_bl D_ka; nothing else in
    // their merge effect moves. Pairs that only now share a neighbour get
    // a full evaluation.
    struct Around {
      ClusterId id;
      Link k;  // {D_k id, D_id k} before the merge
      Link l;
    };
    std::vector<Around> nbrs;
    nbrs.reserve(links_[k].size());
    for (const auto& [j, link] : links_[k]) {
      (void)link;
      Around a{j, {}, {}};
      if (const auto it = k_before.find(j); it != k_before.end()) a.k = it->second;
      if (const auto it = l_before.find(j); it != l_before.end()) a.l = it->second;
      nbrs.push_back(a);
    }
    for (std::size_t x = 0; x < nbrs.size(); ++x) {
      for (std::size_t y = x + 1; y < nbrs.size(); ++y) {
        const Around& a = nbrs[x];
        const Around& b = nbrs[y];
        const auto it = index_.find(key(a.id, b.id));
        if (it == index_.end()) {
          if (two_hop_may_improve(a.id, b.id)) store(a.id, b.id);
          continue;
        }
        const double change = a.k.in * b.l.out + a.l.in * b.k.out +
                              b.k.in * a.l.out + b.l.in * a.k.out;
        cache_[it->second].effect.d_delta_n2 += 2.0 * change;
        note_change(it->second);
      }
    }
  }

  SurrogateObjective objective_;
  MergeState state_;
  std::vector<std::vector<UnitId>> members_;
  std::vector<bool> alive_;
  std::vector<std::map<ClusterId, Link>> links_;
  std::vector<double> abs_;
  std::vector<std::uint64_t> seen_;
  std::uint64_t stamp_ = 0;
  std::vector<PairEntry> cache_;
  std::vector<std::size_t> candidates_;  // entries that may lower A
  std::size_t merges_ = 0;
  std::unordered_map<std::uint64_t, std::size_t> index_;
};

}  // namespace detail

// Greedy clustering: start from a maximum-weight matching (pairs plus
// singletons) and repeatedly merge the pair of clusters with the most
// negative change of the surrogate objective A(C) until no merge lowers it.
inline Clustering greedy_clustering(const InterferenceGraph& g, double p,
                                    double y_low, double y_high,
                                    const GreedyOptions& options = {}) {
  const double a = positive_weight_scale(g);
  if (!(a > 0.0)) {
    throw std::domain_error(
        "greedy clustering: no positive weights, surrogate is undefined");
  }
  const SurrogateObjective objective(p, y_low, y_high, a);
  const Matching matching = max_weight_matching(g, options.matching);
  std::vector<std::vector<UnitId>> init;
  std::vector<char> matched(g.n(), 0);
  for (const auto& [u, v] : matching.pairs) {
    init.push_back({u, v});
    matched[u] = matched[v] = 1;
  }
  for (UnitId i = 0; i < g.n(); ++i) {
    if (!matched[i]) init.push_back({i});
  }
  const Clustering start(g.n(), std::move(init));
  detail::GreedyMerger merger(g, start, objective);
  if (merger.state().within == 0.0 && merger.state().total != 0.0) {
    throw std::domain_error(
        "greedy clustering: matching carries no within-cluster weight");
  }
  merger.run();
  return merger.result(g.n());
}

// 2-hop clustering. Phase 1 scans units in ascending id and claims B_2(v)
// whenever it lies entirely among unassigned units; phase 2 cuts what is
// left into ascending-id chunks of floor(kappa (d + 1)) units.
inline Clustering two_hop_clustering(const InterferenceGraph& g, double kappa) {
  if (!(kappa >= 1.0)) {
    throw std::invalid_argument("two_hop_clustering: kappa must be >= 1");
  }
  const std::size_t n = g.n();
  const auto d = static_cast<double>(g.max_degree());
  const auto cap = std::max<std::size_t>(
      1, static_cast<std::size_t>(std::floor(kappa * (d + 1.0) + 1e-9)));
  std::vector<char> assigned(n, 0);
  std::vector<std::vector<UnitId>> clusters;
  for (UnitId v = 0; v < n; ++v) {
    if (assigned[v]) continue;
    auto b2 = ball(g, v, 2);
    const bool free = std::none_of(b2.begin(), b2.end(),
                                   [&](UnitId u) { return assigned[u] != 0; });
    if (!free) continue;
    for (UnitId u : b2) assigned[u] = 1;
    clusters.push_back(std::move(b2));
  }
  std::vector<UnitId> rest;
  for (UnitId v = 0; v < n; ++v) {
    if (!assigned[v]) rest.push_back(v);
  }
  std::size_t pos = 0;
  while (rest.size() - pos > cap) {
    clusters.emplace_back(rest.begin() + static_cast<std::ptrdiff_t>(pos),
                          rest.begin() + static_cast<std::ptrdiff_t>(pos + cap));
    pos += cap;
  }
  if (pos < rest.size()) {
    clusters.emplace_back(rest.begin() + static_cast<std::ptrdiff_t>(pos),
                          rest.end());
  }
  return Clustering(n, std::move(clusters));
}

struct PowerIterationOptions {
  double tolerance = 1e-10;
  std::size_t max_iterations = 100000;
};

// Law of the weight-invariant random clustering. Edge e of the undirected
// skeleton competes with every edge sharing an endpoint (itself included);
// it wins with probability omega_e / sum_{f ~ e} omega_f, which equals
// 1 / lambda* when omega is the Perron eigenvector of the edge-incidence
// matrix M (M_ef = 1 iff e and f share a vertex, M_ee = 1).
struct RandomClusteringLaw {
  std::size_t n = 0;
  std::vector<UndirectedEdge> edges;
  std::vector<double> omega;             // positive, scaled to max 1 per component
  std::vector<std::size_t> component;    // edge -> incidence component
  std::vector<double> component_lambda;  // dominant eigenvalue per component
  double lambda_star = 0.0;              // max over components; the law's rho
  std::size_t iterations = 0;

  // True when every component shares lambda*, i.e. every edge co-clusters
  // with the same probability 1 / lambda*.
  bool uniform(double tol = 1e-9) const {
    return std::all_of(component_lambda.begin(), component_lambda.end(),
                       [&](double l) {
                         return std::abs(l - lambda_star) <= tol * lambda_star;
                       });
  }

  double rho() const { return lambda_star; }
};

// y = M x, using vertex sums: (M x)_e = s_u + s_v - x_e.
inline void incidence_multiply(const std::vector<UndirectedEdge>& edges,
                               std::size_t n, const std::vector<double>& x,
                               std::vector<double>& y,
                               std::vector<double>& vertex_sum) {
  vertex_sum.assign(n, 0.0);
  for (std::size_t e = 0; e < edges.size(); ++e) {
    vertex_sum[edges[e].u] += x[e];
    vertex_sum[edges[e].v] += x[e];
  }
  y.resize(edges.size());
  for (std::size_t e = 0; e < edges.size(); ++e) {
    y[e] = vertex_sum[edges[e].u] + vertex_sum[edges[e].v] - x[e];
  }
}

// Builds the law by power iteration from the all-ones vector, separately on
// each connected component of the edge set. Converged when the Rayleigh
// quotient changes by less than tolerance (relative) and the residual
// |M w - lambda w|_inf is below sqrt(tolerance) * lambda |w|_inf.
inline RandomClusteringLaw weight_invariant_law(
    const InterferenceGraph& g, const PowerIterationOptions& options = {}) {
  RandomClusteringLaw law;
  law.n = g.n();
  law.edges = g.undirected_edges();
  const std::size_t m = law.edges.size();
  if (m == 0) {
    throw std::invalid_argument(
        "weight_invariant_law: graph has no undirected edge");
  }

  // Components via union-find on vertices.
  std::vector<std::size_t> parent(g.n());
  for (std::size_t v = 0; v < g.n(); ++v) parent[v] = v;
  auto find = [&](std::size_t v) {
    while (parent[v] != v) {
      parent[v] = parent[parent[v]];
      v = parent[v];
    }
    return v;
  };
  for (const auto& e : law.edges) parent[find(e.u)] = find(e.v);
  std::map<std::size_t, std::size_t> comp_index;
  law.component.resize(m);
  std::vector<std::vector<std::size_t>> comp_edges;
  for (std::size_t e = 0; e < m; ++e) {
    const auto [it, fresh] =
        comp_index.emplace(find(law.edges[e].u), comp_edges.size());
    if (fresh) comp_edges.emplace_back();
    law.component[e] = it->second;
    comp_edges[it->second].push_back(e);
  }

  law.omega.assign(m, 0.0);
  law.component_lambda.assign(comp_edges.size(), 0.0);
  const double residual_tol = std::sqrt(options.tolerance);
  for (std::size_t c = 0; c < comp_edges.size(); ++c) {
    const auto& ids = comp_edges[c];
    // Local relabelling keeps each multiply proportional to the component.
    std::map<UnitId, std::size_t> local_vertex;
    std::vector<UndirectedEdge> local;
    local.reserve(ids.size());
    for (std::size_t e : ids) {
      const auto& ed = law.edges[e];
      const auto u = local_vertex.emplace(ed.u, local_vertex.size()).first->second;
      const auto v = local_vertex.emplace(ed.v, local_vertex.size()).first->second;
      local.push_back({u, v, 1.0});
    }
    const std::size_t nv = local_vertex.size();
    std::vector<double> x(ids.size(), 1.0), y, scratch;
    double lambda = 0.0;
    bool converged = false;
    std::size_t it = 0;
    for (; it < options.max_iterations; ++it) {
      incidence_multiply(local, nv, x, y, scratch);
      double xy = 0.0, xx = 0.0;
      for (std::size_t e = 0; e < x.size(); ++e) {
        xy += x[e] * y[e];
        xx += x[e] * x[e];
      }
      const double next = xy / xx;
      double resid = 0.0, xmax = 0.0;
      for (std::size_t e = 0; e < x.size(); ++e) {
        resid = std::max(resid, std::abs(y[e] - next * x[e]));
        xmax = std::max(xmax, std::abs(x[e]));
      }
      const bool settled = it > 0 && std::abs(next - lambda) <=
                                         options.tolerance * std::abs(next);
      lambda = next;
      if (settled && resid <= residual_tol * lambda * xmax) {
        converged = true;
        break;
      }
      const double ymax = *std::max_element(y.begin(), y.end());
      for (std::size_t e = 0; e < x.size(); ++e) x[e] = y[e] / ymax;
    }
    law.iterations = std::max(law.iterations, it + 1);
    if (!converged) {
      throw NumericalError(
          "weight_invariant_law: power iteration did not converge");
    }
    law.component_lambda[c] = lambda;
    for (std::size_t k = 0; k < ids.size(); ++k) law.omega[ids[k]] = x[k];
  }
  law.lambda_star = *std::max_element(law.component_lambda.begin(),
                                      law.component_lambda.end());
  return law;
}

// One draw of the weight-invariant clustering. X_e ~ Beta(omega_e, 1) via
// X_e = U^(1/omega_e), compared on the log scale; edge e = {i, j} becomes the
// cluster {i, j} iff X_e is the maximum among edges touching i or j (ties go
// to the lower edge index). All other units are singletons.
template <class Uniform>
Clustering sample_clustering_with(const RandomClusteringLaw& law,
                                  const Uniform& open_uniform) {
  const std::size_t m = law.edges.size();
  std::vector<double> score(m);
  for (std::size_t e = 0; e < m; ++e) {
    score[e] = std::log(open_uniform(e)) / law.omega[e];
  }
  constexpr std::size_t kNone = std::numeric_limits<std::size_t>::max();
  std::vector<std::size_t> best(law.n, kNone);
  auto beats = [&](std::size_t a, std::size_t b) {
    return score[a] > score[b] || (score[a] == score[b] && a < b);
  };
  for (std::size_t e = 0; e < m; ++e) {
    for (UnitId v : {law.edges[e].u, law.edges[e].v}) {
      if (best[v] == kNone || beats(e, best[v])) best[v] = e;
    }
  }
  std::vector<std::size_t> labels(law.n);
  for (UnitId v = 0; v < law.n; ++v) labels[v] = v;
  for (std::size_t e = 0; e < m; ++e) {
    const auto& ed = law.edges[e];
    if (best[ed.u] == e && best[ed.v] == e) labels[ed.v] = ed.u;
  }
  return Clustering::from_labels(labels);
}

inline Clustering sample_clustering(const RandomClusteringLaw& law,
                                    std::uint64_t seed) {
  const CounterStream stream =
      CounterStream(seed).child("weight-invariant/beta");
  return sample_clustering_with(
      law, [&](std::uint64_t e) { return stream.open_uniform(e); });
}

}  // namespace mixedrand

#endif  // MIXEDRAND_CLUSTERING_HPP_
