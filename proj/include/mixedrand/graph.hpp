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

// Interference graph, linear exposure outcome model and the neighbourhood
// queries (balls, growth constant) used by the clustering algorithms.

#ifndef MIXEDRAND_GRAPH_HPP_
#define MIXEDRAND_GRAPH_HPP_

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <map>
#include <numeric>
#include <span>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace mixedrand {

using UnitId = std::size_t;

// Directed interference edge: unit `from` is influenced by the treatment of
// unit `to` with weight `weight` (j in N_i for from = i, to = j).
struct Edge {
  UnitId from = 0;
  UnitId to = 0;
  double weight = 0.0;

  friend bool operator==(const Edge&, const Edge&) = default;
};

// Edge of the undirected skeleton with the symmetrised weight
// v_uv + v_vu (a missing direction contributes 0). Always u < v.
struct UndirectedEdge {
  UnitId u = 0;
  UnitId v = 0;
  double weight = 0.0;
};

class InterferenceGraph {
 public:
  InterferenceGraph() = default;

  // Edges are stored sorted by (from, to). Ids must lie in [0, n); other
  // modelling assumptions (no self-loops, no duplicates, normalised weights)
  // are checked by validate(), not enforced here.
  InterferenceGraph(std::size_t n, std::vector<Edge> edges)
      : n_(n), edges_(std::move(edges)) {
    for (const Edge& e : edges_) {
      if (e.from >= n_ || e.to >= n_) {
        std::ostringstream msg;
        msg << "edge (" << e.from << ", " << e.to << ") out of range for n = "
            << n_;
        throw std::invalid_argument(msg.str());
      }
    }
    std::stable_sort(edges_.begin(), edges_.end(),
                     [](const Edge& a, const Edge& b) {
                       return a.from != b.from ? a.from < b.from : a.to < b.to;
                     });
    out_offsets_.assign(n_ + 1, 0);
    for (const Edge& e : edges_) ++out_offsets_[e.from + 1];
    std::partial_sum(out_offsets_.begin(), out_offsets_.end(),
                     out_offsets_.begin());

    std::vector<std::pair<UnitId, UnitId>> links;
    links.reserve(2 * edges_.size());
    for (const Edge& e : edges_) {
      if (e.from == e.to) continue;
      links.emplace_back(e.from, e.to);
      links.emplace_back(e.to, e.from);
    }
    std::sort(links.begin(), links.end());
    links.erase(std::unique(links.begin(), links.end()), links.end());
    nbr_offsets_.assign(n_ + 1, 0);
    for (const auto& l : links) ++nbr_offsets_[l.first + 1];
    std::partial_sum(nbr_offsets_.begin(), nbr_offsets_.end(),
                     nbr_offsets_.begin());
    nbrs_.reserve(links.size());
    for (const auto& l : links) nbrs_.push_back(l.second);

    for (const Edge& e : edges_) total_weight_ += e.weight;
  }

  std::size_t n() const { return n_; }
  std::span<const Edge> edges() const { return edges_; }

  // Out-edges of unit i, i.e. the edges (i, j) with j in N_i.
  std::span<const Edge> out_edges(UnitId i) const {
    return std::span<const Edge>(edges_).subspan(
        out_offsets_[i], out_offsets_[i + 1] - out_offsets_[i]);
  }

  // Neighbours of i on the undirected skeleton, ascending.
  std::span<const UnitId> neighbors(UnitId i) const {
    return std::span<const UnitId>(nbrs_).subspan(
        nbr_offsets_[i], nbr_offsets_[i + 1] - nbr_offsets_[i]);
  }

  std::size_t degree(UnitId i) const {
    return nbr_offsets_[i + 1] - nbr_offsets_[i];
  }

  // d: maximum degree of the undirected skeleton.
  std::size_t max_degree() const {
    std::size_t d = 0;
    for (UnitId i = 0; i < n_; ++i) d = std::max(d, degree(i));
    return d;
  }

  // Sum over all directed edges of v_ij.
  double total_weight() const { return total_weight_; }

  // Undirected skeleton edges with symmetrised weights, sorted by (u, v).
  std::vector<UndirectedEdge> undirected_edges() const {
    std::map<std::pair<UnitId, UnitId>, double> acc;
    for (const Edge& e : edges_) {
      if (e.from == e.to) continue;
      acc[{std::min(e.from, e.to), std::max(e.from, e.to)}] += e.weight;
    }
    std::vector<UndirectedEdge> out;
    out.reserve(acc.size());
    for (const auto& [key, w] : acc) out.push_back({key.first, key.second, w});
    return out;
  }

 private:
  std::size_t n_ = 0;
  std::vector<Edge> edges_;
  std::vector<std::size_t> out_offsets_{0};
  std::vector<std::size_t> nbr_offsets_{0};
  std::vector<UnitId> nbrs_;
  double total_weight_ = 0.0;
};

// Y_i(z) = alpha_i + z_i beta_i + gamma * sum_{j in N_i} v_ij z_j.
struct OutcomeModel {
  std::vector<double> alpha;
  std::vector<double> beta;
  double gamma = 0.0;

  double mean_beta() const {
    if (beta.empty()) return 0.0;
    return std::accumulate(beta.begin(), beta.end(), 0.0) /
           static_cast<double>(beta.size());
  }

  // mu(1) - mu(0) = mean(beta) + (gamma / n) * sum_i sum_j v_ij.
  double true_ate(const InterferenceGraph& g) const {
    if (g.n() == 0) return 0.0;
    return mean_beta() + gamma * g.total_weight() / static_cast<double>(g.n());
  }

  void check_against(const InterferenceGraph& g) const {
    if (alpha.size() != g.n() || beta.size() != g.n()) {
      throw std::invalid_argument(
          "outcome model size does not match graph unit count");
    }
  }
};

enum class ViolationKind {
  kUnitWeightSum,    // sum_j |v_ij| > 1
  kNegativeTotal,    // sum_i sum_j v_ij < 0
  kSelfLoop,
  kDuplicateEdge,
};

struct Violation {
  ViolationKind kind;
  UnitId unit = 0;   // unit (or edge source) concerned; unused for totals
  UnitId other = 0;  // edge target for self-loop / duplicate reports
  double value = 0.0;
  std::string message;
};

struct ValidationReport {
  std::vector<Violation> violations;
  bool ok() const { return violations.empty(); }
};

// Slack allowed when comparing sums against the normalisation limits.
inline constexpr double kValidationSlack = 1e-12;

inline ValidationReport validate(const InterferenceGraph& g) {
  ValidationReport report;
  auto fmt = [](double x) {
    std::ostringstream os;
    os.precision(6);
    os << x;
    return os.str();
  };
  for (UnitId i = 0; i < g.n(); ++i) {
    double abs_sum = 0.0;
    const auto out = g.out_edges(i);
    for (std::size_t k = 0; k < out.size(); ++k) {
      const Edge& e = out[k];
      abs_sum += std::abs(e.weight);
      if (e.to == i) {
        report.violations.push_back(
            {ViolationKind::kSelfLoop, i, i, e.weight,
             "self-loop on unit " + std::to_string(i)});
      }
      if (k > 0 && out[k - 1].to == e.to) {
        report.violations.push_back(
            {ViolationKind::kDuplicateEdge, i, e.to, e.weight,
             "duplicate edge (" + std::to_string(i) + ", " +
                 std::to_string(e.to) + ")"});
      }
    }
    if (abs_sum > 1.0 + kValidationSlack) {
      report.violations.push_back({ViolationKind::kUnitWeightSum, i, i, abs_sum,
                                   "unit " + std::to_string(i) +
                                       " weight sum " + fmt(abs_sum) + " > 1"});
    }
  }
  if (g.total_weight() < -kValidationSlack) {
    report.violations.push_back({ViolationKind::kNegativeTotal, 0, 0,
                                 g.total_weight(),
                                 "global weight sum " + fmt(g.total_weight()) +
                                     " < 0"});
  }
  return report;
}

// B_r(v) on the undirected skeleton, sorted ascending.
inline std::vector<UnitId> ball(const InterferenceGraph& g, UnitId v,
                                std::size_t r) {
  if (v >= g.n()) throw std::out_of_range("ball: unit id out of range");
  std::vector<std::size_t> dist(g.n(), std::numeric_limits<std::size_t>::max());
  std::vector<UnitId> frontier{v};
  std::vector<UnitId> out{v};
  dist[v] = 0;
  for (std::size_t step = 0; step < r && !frontier.empty(); ++step) {
    std::vector<UnitId> next;
    for (UnitId u : frontier) {
      for (UnitId w : g.neighbors(u)) {
        if (dist[w] == std::numeric_limits<std::size_t>::max()) {
          dist[w] = step + 1;
          next.push_back(w);
          out.push_back(w);
        }
      }
    }
    frontier = std::move(next);
  }
  std::sort(out.begin(), out.end());
  return out;
}

// kappa = max over v and 1 <= r < r_max of |B_{r+1}(v)| / |B_r(v)|.
// With the default cap the BFS runs until every ball saturates.
inline double growth_constant(
    const InterferenceGraph& g,
    std::size_t r_max = std::numeric_limits<std::size_t>::max()) {
  double kappa = 1.0;
  if (r_max < 2) return kappa;
  std::vector<std::size_t> mark(g.n(), std::numeric_limits<std::size_t>::max());
  std::vector<UnitId> frontier, next;
  for (UnitId v = 0; v < g.n(); ++v) {
    frontier.assign(1, v);
    mark[v] = v;
    std::size_t size = 1;  // |B_r|
    std::size_t prev = 0;  // |B_{r-1}|
    for (std::size_t r = 0; r < r_max && !frontier.empty(); ++r) {
      // Here size = |B_r|; expand to B_{r+1}.
      next.clear();
      for (UnitId u : frontier) {
        for (UnitId w : g.neighbors(u)) {
          if (mark[w] != v) {
            mark[w] = v;
            next.push_back(w);
          }
        }
      }
      prev = size;
      size += next.size();
      if (r >= 1) {
        kappa = std::max(kappa, static_cast<double>(size) /
                                    static_cast<double>(prev));
      }
      frontier.swap(next);
    }
  }
  return kappa;
}

inline std::vector<double> evaluate_outcomes(const InterferenceGraph& g,
                                             const OutcomeModel& model,
                                             std::span<const int> z) {
  model.check_against(g);
  if (z.size() != g.n()) {
    throw std::invalid_argument("treatment vector length does not match n");
  }
  std::vector<double> y(g.n());
  for (UnitId i = 0; i < g.n(); ++i) {
    double spill = 0.0;
    for (const Edge& e : g.out_edges(i)) spill += e.weight * z[e.to];
    y[i] = model.alpha[i] + z[i] * model.beta[i] + model.gamma * spill;
  }
  return y;
}

struct OutcomeRange {
  double lower = 0.0;  // Y_L
  double upper = 0.0;  // Y_M
};

// Per-unit achievable range of Y_i(z) over all z in {0,1}^n. Y_i is affine
// in the distinct treatments it depends on, so its extremes take each
// coefficient at its own best sign.
inline OutcomeRange unit_outcome_range(const InterferenceGraph& g,
                                       const OutcomeModel& model, UnitId i) {
  std::map<UnitId, double> coef;
  coef[i] += model.beta[i];
  for (const Edge& e : g.out_edges(i)) coef[e.to] += model.gamma * e.weight;
  OutcomeRange r{model.alpha[i], model.alpha[i]};
  for (const auto& [unit, c] : coef) {
    (void)unit;
    r.lower += std::min(0.0, c);
    r.upper += std::max(0.0, c);
  }
  return r;
}

// Tight (Y_L, Y_M): min / max of Y_i(z) over units and treatment vectors.
inline OutcomeRange outcome_bounds(const InterferenceGraph& g,
                                   const OutcomeModel& model) {
  model.check_against(g);
  if (g.n() == 0) return {};
  OutcomeRange out{std::numeric_limits<double>::infinity(),
                   -std::numeric_limits<double>::infinity()};
  for (UnitId i = 0; i < g.n(); ++i) {
    const OutcomeRange r = unit_outcome_range(g, model, i);
    out.lower = std::min(out.lower, r.lower);
    out.upper = std::max(out.upper, r.upper);
  }
  return out;
}

struct GraphStats {
  std::size_t max_degree = 0;
  double growth_constant = 1.0;
  double total_weight = 0.0;
  double max_abs_unit_weight = 0.0;
  std::size_t undirected_edge_count = 0;
  bool has_outcome_bounds = false;
  OutcomeRange outcome_range;
};

inline GraphStats graph_stats(
    const InterferenceGraph& g,
    std::size_t growth_radius_cap = std::numeric_limits<std::size_t>::max(),
    const OutcomeModel* model = nullptr) {
  GraphStats s;
  s.max_degree = g.max_degree();
  s.growth_constant = growth_constant(g, growth_radius_cap);
  s.total_weight = g.total_weight();
  for (UnitId i = 0; i < g.n(); ++i) {
    double a = 0.0;
    for (const Edge& e : g.out_edges(i)) a += std::abs(e.weight);
    s.max_abs_unit_weight = std::max(s.max_abs_unit_weight, a);
    s.undirected_edge_count += g.degree(i);
  }
  s.undirected_edge_count /= 2;
  if (model != nullptr) {
    s.has_outcome_bounds = true;
    s.outcome_range = outcome_bounds(g, *model);
  }
  return s;
}

}  // namespace mixedrand

#endif  // MIXEDRAND_GRAPH_HPP_
