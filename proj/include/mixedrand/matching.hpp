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

// Maximum-weight matching on the symmetrised interference graph and the
// decomposition of a graph's edges into matchings.

#ifndef MIXEDRAND_MATCHING_HPP_
#define MIXEDRAND_MATCHING_HPP_

#include <algorithm>
#include <cstddef>
#include <functional>
#include <limits>
#include <map>
#include <set>
#include <stdexcept>
#include <utility>
#include <vector>

#include "mixedrand/graph.hpp"

namespace mixedrand {

namespace detail {

// Edmonds' weighted blossom algorithm with explicit dual variables, O(n^3).
// Follows the classic primal-dual formulation (van Rantwijk's structure):
// vertices carry duals u_v, non-trivial blossoms carry z_B, and an edge is
// tight when u_i + u_j - 2 w_ij == 0.
class BlossomMatcher {
 public:
  struct WeightedEdge {
    int i;
    int j;
    double w;
  };

  BlossomMatcher(int nvertex, std::vector<WeightedEdge> edges,
                 bool max_cardinality)
      : nv_(nvertex), edges_(std::move(edges)), max_card_(max_cardinality) {}

  // mate[v] = matched partner or -1.
  std::vector<int> solve() {
    const int nedge = static_cast<int>(edges_.size());
    if (nv_ == 0 || nedge == 0) return std::vector<int>(nv_, -1);

    double max_w = 0.0;
    for (const auto& e : edges_) max_w = std::max(max_w, e.w);

    endpoint_.resize(2 * nedge);
    for (int p = 0; p < 2 * nedge; ++p) {
      endpoint_[p] = (p % 2 == 0) ? edges_[p / 2].i : edges_[p / 2].j;
    }
    neighbend_.assign(nv_, {});
    for (int k = 0; k < nedge; ++k) {
      neighbend_[edges_[k].i].push_back(2 * k + 1);
      neighbend_[edges_[k].j].push_back(2 * k);
    }
    mate_.assign(nv_, -1);
    label_.assign(2 * nv_, 0);
    labelend_.assign(2 * nv_, -1);
    inblossom_.resize(nv_);
    for (int v = 0; v < nv_; ++v) inblossom_[v] = v;
    blossomparent_.assign(2 * nv_, -1);
    blossomchilds_.assign(2 * nv_, {});
    blossombase_.assign(2 * nv_, -1);
    for (int v = 0; v < nv_; ++v) blossombase_[v] = v;
    blossomendps_.assign(2 * nv_, {});
    bestedge_.assign(2 * nv_, -1);
    blossombestedges_.assign(2 * nv_, {});
    has_bestedges_.assign(2 * nv_, false);
    unused_.clear();
    for (int b = nv_; b < 2 * nv_; ++b) unused_.push_back(b);
    dualvar_.assign(2 * nv_, 0.0);
    for (int v = 0; v < nv_; ++v) dualvar_[v] = max_w;
    allowedge_.assign(nedge, false);
    queue_.clear();

    for (int stage = 0; stage < nv_; ++stage) {
      std::fill(label_.begin(), label_.end(), 0);
      std::fill(bestedge_.begin(), bestedge_.end(), -1);
      for (int b = nv_; b < 2 * nv_; ++b) {
        blossombestedges_[b].clear();
        has_bestedges_[b] = false;
      }
      std::fill(allowedge_.begin(), allowedge_.end(), false);
      queue_.clear();
      for (int v = 0; v < nv_; ++v) {
        if (mate_[v] == -1 && label_[inblossom_[v]] == 0) assign_label(v, 1, -1);
      }
      bool augmented = false;
      while (true) {
        while (!queue_.empty() && !augmented) {
          const int v = queue_.back();
          queue_.pop_back();
          for (int p : neighbend_[v]) {
            const int k = p / 2;
            const int w = endpoint_[p];
            if (inblossom_[v] == inblossom_[w]) continue;
            double kslack = 0.0;
            if (!allowedge_[k]) {
              kslack = slack(k);
              if (kslack <= 0.0) allowedge_[k] = true;
            }
            if (allowedge_[k]) {
              if (label_[inblossom_[w]] == 0) {
                assign_label(w, 2, p ^ 1);
              } else if (label_[inblossom_[w]] == 1) {
                const int base = scan_blossom(v, w);
                if (base >= 0) {
                  add_blossom(base, k);
                } else {
                  augment_matching(k);
                  augmented = true;
                  break;
                }
              } else if (label_[w] == 0) {
                label_[w] = 2;
                labelend_[w] = p ^ 1;
              }
            } else if (label_[inblossom_[w]] == 1) {
              const int b = inblossom_[v];
              if (bestedge_[b] == -1 || kslack < slack(bestedge_[b])) {
                bestedge_[b] = k;
              }
            } else if (label_[w] == 0) {
              if (bestedge_[w] == -1 || kslack < slack(bestedge_[w])) {
                bestedge_[w] = k;
              }
            }
          }
        }
        if (augmented) break;

        int deltatype = -1;
        double delta = 0.0;
        int deltaedge = -1;
        int deltablossom = -1;
        if (!max_card_) {
          deltatype = 1;
          delta = *std::min_element(dualvar_.begin(), dualvar_.begin() + nv_);
        }
        for (int v = 0; v < nv_; ++v) {
          if (label_[inblossom_[v]] == 0 && bestedge_[v] != -1) {
            const double d = slack(bestedge_[v]);
            if (deltatype == -1 || d < delta) {
              delta = d;
              deltatype = 2;
              deltaedge = bestedge_[v];
            }
          }
        }
        for (int b = 0; b < 2 * nv_; ++b) {
          if (blossomparent_[b] == -1 && label_[b] == 1 && bestedge_[b] != -1) {
            const double d = slack(bestedge_[b]) / 2.0;
            if (deltatype == -1 || d < delta) {
              delta = d;
              deltatype = 3;
              deltaedge = bestedge_[b];
            }
          }
        }
        for (int b = nv_; b < 2 * nv_; ++b) {
          if (blossombase_[b] >= 0 && blossomparent_[b] == -1 &&
              label_[b] == 2 && (deltatype == -1 || dualvar_[b] < delta)) {
            delta = dualvar_[b];
            deltatype = 4;
            deltablossom = b;
          }
        }
        if (deltatype == -1) {
          deltatype = 1;
          delta = std::max(
              0.0, *std::min_element(dualvar_.begin(), dualvar_.begin() + nv_));
        }
        for (int v = 0; v < nv_; ++v) {
          if (label_[inblossom_[v]] == 1) {
            dualvar_[v] -= delta;
          } else if (label_[inblossom_[v]] == 2) {
            dualvar_[v] += delta;
          }
        }
        for (int b = nv_; b < 2 * nv_; ++b) {
          if (blossombase_[b] >= 0 && blossomparent_[b] == -1) {
            if (label_[b] == 1) {
              dualvar_[b] += delta;
            } else if (label_[b] == 2) {
              dualvar_[b] -= delta;
            }
          }
        }
        if (deltatype == 1) {
          break;
        } else if (deltatype == 2) {
          allowedge_[deltaedge] = true;
          int i = edges_[deltaedge].i;
          int j = edges_[deltaedge].j;
          if (label_[inblossom_[i]] == 0) std::swap(i, j);
          queue_.push_back(i);
        } else if (deltatype == 3) {
          allowedge_[deltaedge] = true;
          queue_.push_back(edges_[deltaedge].i);
        } else {
          expand_blossom(deltablossom, false);
        }
      }
      if (!augmented) break;
      for (int b = nv_; b < 2 * nv_; ++b) {
        if (blossomparent_[b] == -1 && blossombase_[b] >= 0 && label_[b] == 1 &&
            dualvar_[b] == 0.0) {
          expand_blossom(b, true);
        }
      }
    }
    std::vector<int> result(nv_, -1);
    for (int v = 0; v < nv_; ++v) {
      if (mate_[v] >= 0) result[v] = endpoint_[mate_[v]];
    }
    return result;
  }

 private:
  double slack(int k) const {
    const auto& e = edges_[k];
    return dualvar_[e.i] + dualvar_[e.j] - 2.0 * e.w;
  }

  void leaves(int b, std::vector<int>& out) const {
    if (b < nv_) {
      out.push_back(b);
      return;
    }
    for (int t : blossomchilds_[b]) leaves(t, out);
  }

  std::vector<int> leaves(int b) const {
    std::vector<int> out;
    leaves(b, out);
    return out;
  }

  void assign_label(int w, int t, int p) {
    const int b = inblossom_[w];
    label_[w] = label_[b] = t;
    labelend_[w] = labelend_[b] = p;
    bestedge_[w] = bestedge_[b] = -1;
    if (t == 1) {
      leaves(b, queue_);
    } else if (t == 2) {
      const int base = blossombase_[b];
      assign_label(endpoint_[mate_[base]], 1, mate_[base] ^ 1);
    }
  }

  int scan_blossom(int v, int w) {
    std::vector<int> path;
    int base = -1;
    while (v != -1 || w != -1) {
      int b = inblossom_[v];
      if (label_[b] & 4) {
        base = blossombase_[b];
        break;
      }
      path.push_back(b);
      label_[b] = 5;
      if (labelend_[b] == -1) {
        v = -1;
      } else {
        v = endpoint_[labelend_[b]];
        b = inblossom_[v];
        v = endpoint_[labelend_[b]];
      }
      if (w != -1) std::swap(v, w);
    }
    for (int b : path) label_[b] = 1;
    return base;
  }

  void add_blossom(int base, int k) {
    int v = edges_[k].i;
    int w = edges_[k].j;
    const int bb = inblossom_[base];
    int bv = inblossom_[v];
    int bw = inblossom_[w];
    const int b = unused_.back();
    unused_.pop_back();
    blossombase_[b] = base;
    blossomparent_[b] = -1;
    blossomparent_[bb] = b;
    std::vector<int> path;
    std::vector<int> endps;
    while (bv != bb) {
      blossomparent_[bv] = b;
      path.push_back(bv);
      endps.push_back(labelend_[bv]);
      v = endpoint_[labelend_[bv]];
      bv = inblossom_[v];
    }
    path.push_back(bb);
    std::reverse(path.begin(), path.end());
    std::reverse(endps.begin(), endps.end());
    endps.push_back(2 * k);
    while (bw != bb) {
      blossomparent_[bw] = b;
      path.push_back(bw);
      endps.push_back(labelend_[bw] ^ 1);
      w = endpoint_[labelend_[bw]];
      bw = inblossom_[w];
    }
    blossomchilds_[b] = path;
    blossomendps_[b] = endps;
    label_[b] = 1;
    labelend_[b] = labelend_[bb];
    dualvar_[b] = 0.0;
    for (int leaf : leaves(b)) {
      if (label_[inblossom_[leaf]] == 2) queue_.push_back(leaf);
      inblossom_[leaf] = b;
    }
    std::vector<int> bestedgeto(2 * nv_, -1);
    for (int child : path) {
      std::vector<std::vector<int>> nblists;
      if (!has_bestedges_[child]) {
        for (int leaf : leaves(child)) {
          std::vector<int> list;
          for (int p : neighbend_[leaf]) list.push_back(p / 2);
          nblists.push_back(std::move(list));
        }
      } else {
        nblists.push_back(blossombestedges_[child]);
      }
      for (const auto& nblist : nblists) {
        for (int kk : nblist) {
          int i = edges_[kk].i;
          int j = edges_[kk].j;
          if (inblossom_[j] == b) std::swap(i, j);
          const int bj = inblossom_[j];
          if (bj != b && label_[bj] == 1 &&
              (bestedgeto[bj] == -1 || slack(kk) < slack(bestedgeto[bj]))) {
            bestedgeto[bj] = kk;
          }
        }
      }
      blossombestedges_[child].clear();
      has_bestedges_[child] = false;
      bestedge_[child] = -1;
    }
    blossombestedges_[b].clear();
    for (int kk : bestedgeto) {
      if (kk != -1) blossombestedges_[b].push_back(kk);
    }
    has_bestedges_[b] = true;
    bestedge_[b] = -1;
    for (int kk : blossombestedges_[b]) {
      if (bestedge_[b] == -1 || slack(kk) < slack(bestedge_[b])) {
        bestedge_[b] = kk;
      }
    }
  }

  void expand_blossom(int b, bool endstage) {
    const std::vector<int> childs = blossomchilds_[b];
    for (int s : childs) {
      blossomparent_[s] = -1;
      if (s < nv_) {
        inblossom_[s] = s;
      } else if (endstage && dualvar_[s] == 0.0) {
        expand_blossom(s, endstage);
      } else {
        for (int leaf : leaves(s)) inblossom_[leaf] = s;
      }
    }
    if (!endstage && label_[b] == 2) {
      const auto& ch = blossomchilds_[b];
      const auto& ep = blossomendps_[b];
      const int len = static_cast<int>(ch.size());
      auto at = [len](const std::vector<int>& vec, int idx) {
        return vec[((idx % len) + len) % len];
      };
      const int entrychild = inblossom_[endpoint_[labelend_[b] ^ 1]];
      int j = static_cast<int>(
          std::find(ch.begin(), ch.end(), entrychild) - ch.begin());
      int jstep;
      int endptrick;
      if (j & 1) {
        j -= len;
        jstep = 1;
        endptrick = 0;
      } else {
        jstep = -1;
        endptrick = 1;
      }
      int p = labelend_[b];
      while (j != 0) {
        label_[endpoint_[p ^ 1]] = 0;
        label_[endpoint_[at(ep, j - endptrick) ^ endptrick ^ 1]] = 0;
        assign_label(endpoint_[p ^ 1], 2, p);
        allowedge_[at(ep, j - endptrick) / 2] = true;
        j += jstep;
        p = at(ep, j - endptrick) ^ endptrick;
        allowedge_[p / 2] = true;
        j += jstep;
      }
      int bv = at(ch, j);
      label_[endpoint_[p ^ 1]] = label_[bv] = 2;
      labelend_[endpoint_[p ^ 1]] = labelend_[bv] = p;
      bestedge_[bv] = -1;
      j += jstep;
      while (at(ch, j) != entrychild) {
        bv = at(ch, j);
        if (label_[bv] == 1) {
          j += jstep;
          continue;
        }
        int found = -1;
        for (int leaf : leaves(bv)) {
          if (label_[leaf] != 0) {
            found = leaf;
            break;
          }
        }
        if (found != -1) {
          label_[found] = 0;
          label_[endpoint_[mate_[blossombase_[bv]]]] = 0;
          assign_label(found, 2, labelend_[found]);
        }
        j += jstep;
      }
    }
    label_[b] = labelend_[b] = -1;
    blossomchilds_[b].clear();
    blossomendps_[b].clear();
    blossombase_[b] = -1;
    blossombestedges_[b].clear();
    has_bestedges_[b] = false;
    bestedge_[b] = -1;
    unused_.push_back(b);
  }

  void augment_blossom(int b, int v) {
    int t = v;
    while (blossomparent_[t] != b) t = blossomparent_[t];
    if (t >= nv_) augment_blossom(t, v);
    auto& ch = blossomchilds_[b];
    auto& ep = blossomendps_[b];
    const int len = static_cast<int>(ch.size());
    auto at = [len](const std::vector<int>& vec, int idx) {
      return vec[((idx % len) + len) % len];
    };
    const int i = static_cast<int>(std::find(ch.begin(), ch.end(), t) -
                                   ch.begin());
    int j = i;
    int jstep;
    int endptrick;
    if (i & 1) {
      j -= len;
      jstep = 1;
      endptrick = 0;
    } else {
      jstep = -1;
      endptrick = 1;
    }
    while (j != 0) {
      j += jstep;
      t = at(ch, j);
      const int p = at(ep, j - endptrick) ^ endptrick;
      if (t >= nv_) augment_blossom(t, endpoint_[p]);
      j += jstep;
      t = at(ch, j);
      if (t >= nv_) augment_blossom(t, endpoint_[p ^ 1]);
      mate_[endpoint_[p]] = p ^ 1;
      mate_[endpoint_[p ^ 1]] = p;
    }
    std::rotate(ch.begin(), ch.begin() + i, ch.end());
    std::rotate(ep.begin(), ep.begin() + i, ep.end());
    blossombase_[b] = blossombase_[ch[0]];
  }

  void augment_matching(int k) {
    const int v = edges_[k].i;
    const int w = edges_[k].j;
    const std::pair<int, int> starts[2] = {{v, 2 * k + 1}, {w, 2 * k}};
    for (auto [s, p] : starts) {
      while (true) {
        const int bs = inblossom_[s];
        if (bs >= nv_) augment_blossom(bs, s);
        mate_[s] = p;
        if (labelend_[bs] == -1) break;
        const int t = endpoint_[labelend_[bs]];
        const int bt = inblossom_[t];
        s = endpoint_[labelend_[bt]];
        const int j = endpoint_[labelend_[bt] ^ 1];
        if (bt >= nv_) augment_blossom(bt, j);
        mate_[j] = labelend_[bt];
        p = labelend_[bt] ^ 1;
      }
    }
  }

  int nv_;
  std::vector<WeightedEdge> edges_;
  bool max_card_;
  std::vector<int> endpoint_;
  std::vector<std::vector<int>> neighbend_;
  std::vector<int> mate_;
  std::vector<int> label_;
  std::vector<int> labelend_;
  std::vector<int> inblossom_;
  std::vector<int> blossomparent_;
  std::vector<std::vector<int>> blossomchilds_;
  std::vector<int> blossombase_;
  std::vector<std::vector<int>> blossomendps_;
  std::vector<int> bestedge_;
  std::vector<std::vector<int>> blossombestedges_;
  std::vector<bool> has_bestedges_;
  std::vector<int> unused_;
  std::vector<double> dualvar_;
  std::vector<bool> allowedge_;
  std::vector<int> queue_;
};

// Kuhn's augmenting-path bipartite matching. adj[l] lists right vertices.
// Returns match_left[l] (right vertex or -1).
inline std::vector<int> bipartite_matching(
    const std::vector<std::vector<int>>& adj, int n_right) {
  const int n_left = static_cast<int>(adj.size());
  std::vector<int> match_left(n_left, -1);
  std::vector<int> match_right(n_right, -1);
  std::vector<int> seen(n_right, -1);
  std::function<bool(int, int)> try_augment = [&](int l, int round) {
    for (int r : adj[l]) {
      if (seen[r] == round) continue;
      seen[r] = round;
      if (match_right[r] == -1 || try_augment(match_right[r], round)) {
        match_left[l] = r;
        match_right[r] = l;
        return true;
      }
    }
    return false;
  };
  for (int l = 0; l < n_left; ++l) try_augment(l, l);
  return match_left;
}

}  // namespace detail

// A set of vertex-disjoint unordered pairs (u < v), sorted, together with the
// total symmetrised weight sum of (v_uv + v_vu).
struct Matching {
  std::vector<std::pair<UnitId, UnitId>> pairs;
  double weight = 0.0;
  bool exact = true;  // false when the greedy 1/2-approximation was used
};

struct MatchingOptions {
  // Graphs with more units than this use the greedy heaviest-edge-first
  // matching instead of the exact blossom algorithm.
  std::size_t exact_threshold = 2000;
};

inline Matching matching_from_mates(const std::vector<int>& mate,
                                    const std::vector<UndirectedEdge>& edges) {
  std::map<std::pair<UnitId, UnitId>, double> weight_of;
  for (const auto& e : edges) weight_of[{e.u, e.v}] = e.weight;
  Matching m;
  for (std::size_t v = 0; v < mate.size(); ++v) {
    if (mate[v] > static_cast<int>(v)) {
      const auto key = std::make_pair(v, static_cast<UnitId>(mate[v]));
      m.pairs.push_back(key);
      m.weight += weight_of.at(key);
    }
  }
  return m;
}

// Exact maximum-weight matching over an explicit undirected edge list.
// Only strictly positive edges are considered.
inline Matching exact_max_weight_matching(
    std::size_t n, const std::vector<UndirectedEdge>& edges) {
  std::vector<detail::BlossomMatcher::WeightedEdge> wedges;
  std::vector<UndirectedEdge> kept;
  for (const auto& e : edges) {
    if (e.weight > 0.0) {
      wedges.push_back(
          {static_cast<int>(e.u), static_cast<int>(e.v), e.weight});
      kept.push_back(e);
    }
  }
  detail::BlossomMatcher matcher(static_cast<int>(n), std::move(wedges),
                                 /*max_cardinality=*/false);
  return matching_from_mates(matcher.solve(), kept);
}

// Heaviest-edge-first greedy matching; a 1/2-approximation.
inline Matching greedy_max_weight_matching(
    std::size_t n, const std::vector<UndirectedEdge>& edges) {
  std::vector<UndirectedEdge> order;
  for (const auto& e : edges) {
    if (e.weight > 0.0) order.push_back(e);
  }
  std::stable_sort(order.begin(), order.end(),
                   [](const UndirectedEdge& a, const UndirectedEdge& b) {
                     return a.weight > b.weight;
                   });
  std::vector<char> used(n, 0);
  Matching m;
  m.exact = false;
  for (const auto& e : order) {
    if (used[e.u] || used[e.v]) continue;
    used[e.u] = used[e.v] = 1;
    m.pairs.emplace_back(e.u, e.v);
    m.weight += e.weight;
  }
  std::sort(m.pairs.begin(), m.pairs.end());
  return m;
}

inline Matching max_weight_matching(const InterferenceGraph& g,
                                    const MatchingOptions& options = {}) {
  const auto edges = g.undirected_edges();
  if (g.n() > options.exact_threshold) {
    return greedy_max_weight_matching(g.n(), edges);
  }
  return exact_max_weight_matching(g.n(), edges);
}

// Maximum-cardinality matching on the subgraph spanned by `edges`.
inline std::vector<std::pair<UnitId, UnitId>> max_cardinality_matching(
    std::size_t n, const std::vector<std::pair<UnitId, UnitId>>& edges) {
  std::vector<detail::BlossomMatcher::WeightedEdge> wedges;
  for (const auto& [u, v] : edges) {
    wedges.push_back({static_cast<int>(u), static_cast<int>(v), 1.0});
  }
  detail::BlossomMatcher matcher(static_cast<int>(n), std::move(wedges),
                                 /*max_cardinality=*/true);
  const auto mate = matcher.solve();
  std::vector<std::pair<UnitId, UnitId>> out;
  for (std::size_t v = 0; v < mate.size(); ++v) {
    if (mate[v] > static_cast<int>(v)) out.emplace_back(v, mate[v]);
  }
  return out;
}

// Each layer is a matching of skeleton edges; every skeleton edge appears
// in exactly one layer.
struct MatchingDecomposition {
  std::vector<std::vector<UndirectedEdge>> layers;
};

// Peels the residual edge set layer by layer. Each round takes the vertices
// U of maximum residual degree D and covers each of them once:
//   M1: a maximum matching inside U,
//   M2: each still-unmatched u in U paired with its smallest-id unused
//       residual neighbour outside U,
//   M3: a bipartite matching saturating the remaining U' (U' has no residual
//       edges inside itself and every partner has residual degree < D, so
//       Hall's condition holds).
// Every round lowers the maximum residual degree by one and emits at most
// two layers, so at most 2d layers are produced.
inline MatchingDecomposition decompose_into_matchings(
    const InterferenceGraph& g) {
  const std::size_t n = g.n();
  const auto all = g.undirected_edges();
  std::map<std::pair<UnitId, UnitId>, double> weight_of;
  for (const auto& e : all) weight_of[{e.u, e.v}] = e.weight;
  auto key = [](UnitId a, UnitId b) {
    return std::make_pair(std::min(a, b), std::max(a, b));
  };

  std::vector<std::set<UnitId>> residual(n);
  for (const auto& e : all) {
    residual[e.u].insert(e.v);
    residual[e.v].insert(e.u);
  }
  std::size_t remaining = all.size();
  auto remove_edge = [&](UnitId a, UnitId b) {
    residual[a].erase(b);
    residual[b].erase(a);
    --remaining;
  };
  auto to_layer = [&](const std::vector<std::pair<UnitId, UnitId>>& pairs) {
    std::vector<UndirectedEdge> layer;
    for (const auto& [a, b] : pairs) {
      const auto k = key(a, b);
      layer.push_back({k.first, k.second, weight_of.at(k)});
    }
    std::sort(layer.begin(), layer.end(),
              [](const UndirectedEdge& x, const UndirectedEdge& y) {
                return x.u != y.u ? x.u < y.u : x.v < y.v;
              });
    return layer;
  };

  MatchingDecomposition out;
  while (remaining > 0) {
    std::size_t top = 0;
    for (UnitId v = 0; v < n; ++v) top = std::max(top, residual[v].size());
    std::vector<char> in_u(n, 0);
    std::vector<UnitId> u_set;
    for (UnitId v = 0; v < n; ++v) {
      if (residual[v].size() == top) {
        in_u[v] = 1;
        u_set.push_back(v);
      }
    }

    std::vector<std::pair<UnitId, UnitId>> inside;
    for (UnitId v : u_set) {
      for (UnitId w : residual[v]) {
        if (in_u[w] && v < w) inside.emplace_back(v, w);
      }
    }
    auto layer = max_cardinality_matching(n, inside);
    std::vector<char> covered(n, 0);
    for (const auto& [a, b] : layer) covered[a] = covered[b] = 1;
    for (UnitId u : u_set) {
      if (covered[u]) continue;
      for (UnitId w : residual[u]) {
        if (!in_u[w] && !covered[w]) {
          layer.emplace_back(u, w);
          covered[u] = covered[w] = 1;
          break;
        }
      }
    }
    for (const auto& [a, b] : layer) remove_edge(a, b);
    if (!layer.empty()) out.layers.push_back(to_layer(layer));

    std::vector<UnitId> leftover;
    for (UnitId u : u_set) {
      if (!covered[u]) leftover.push_back(u);
    }
    if (!leftover.empty()) {
      std::vector<UnitId> right_ids;
      std::map<UnitId, int> right_index;
      std::vector<std::vector<int>> adj(leftover.size());
      for (std::size_t l = 0; l < leftover.size(); ++l) {
        for (UnitId w : residual[leftover[l]]) {
          auto [it, fresh] =
              right_index.emplace(w, static_cast<int>(right_ids.size()));
          if (fresh) right_ids.push_back(w);
          adj[l].push_back(it->second);
        }
      }
      const auto match = detail::bipartite_matching(
          adj, static_cast<int>(right_ids.size()));
      std::vector<std::pair<UnitId, UnitId>> third;
      for (std::size_t l = 0; l < leftover.size(); ++l) {
        if (match[l] >= 0) third.emplace_back(leftover[l], right_ids[match[l]]);
      }
      for (const auto& [a, b] : third) remove_edge(a, b);
      if (!third.empty()) out.layers.push_back(to_layer(third));
    }
  }
  return out;
}

inline double layer_weight(const std::vector<UndirectedEdge>& layer) {
  double w = 0.0;
  for (const auto& e : layer) w += e.weight;
  return w;
}

}  // namespace mixedrand

#endif  // MIXEDRAND_MATCHING_HPP_
