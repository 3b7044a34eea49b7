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

// Instance generators: random geometric graphs with long-range links,
// (d, kappa)-cycle networks, and the rescaled random outcome model.

#ifndef MIXEDRAND_GENERATORS_HPP_
#define MIXEDRAND_GENERATORS_HPP_

#include <cmath>
#include <cstdint>
#include <numbers>
#include <set>
#include <stdexcept>
#include <utility>
#include <vector>

#include "mixedrand/graph.hpp"
#include "mixedrand/random.hpp"

namespace mixedrand {

struct RggOptions {
  // Rescale each unit's out-weights so that sum_j |v_ij| <= 1.
  bool normalize_weights = false;
};

// Random geometric graph on [0, sqrt(n)]^2 with connection radius
// sqrt(r0 / pi), plus r1 long-range partners per unit drawn uniformly among
// units outside the radius. Each undirected link yields both directed edges,
// each with an independent weight from U(-1/r, 2/r), r = r0 + r1.
inline InterferenceGraph generate_rgg(std::size_t n, double r0, std::size_t r1,
                                      std::uint64_t seed,
                                      const RggOptions& options = {}) {
  const double r = r0 + static_cast<double>(r1);
  if (n < 1 || r0 < 0.0 || !(r > 0.0) || !std::isfinite(r0)) {
    throw std::invalid_argument(
        "generate_rgg: need n >= 1, r0 >= 0, r1 >= 0, r0 + r1 > 0");
  }
  const CounterStream root(seed);
  SequentialRng pos_rng(root.child("rgg/positions"));
  SequentialRng link_rng(root.child("rgg/long-range"));
  SequentialRng weight_rng(root.child("rgg/weights"));

  const double side = std::sqrt(static_cast<double>(n));
  std::vector<double> x(n), y(n);
  for (std::size_t i = 0; i < n; ++i) {
    x[i] = pos_rng.uniform(0.0, side);
    y[i] = pos_rng.uniform(0.0, side);
  }
  const double radius = std::sqrt(r0 / std::numbers::pi);
  const double radius_sq = radius * radius;
  auto close = [&](std::size_t i, std::size_t j) {
    const double dx = x[i] - x[j];
    const double dy = y[i] - y[j];
    return dx * dx + dy * dy <= radius_sq;
  };

  // Bucket grid with cell side >= radius, so neighbours live in adjacent cells.
  const double cell = std::max(radius, 1e-9);
  const auto cells_per_side = static_cast<std::size_t>(std::max(
      1.0,
      std::min(std::floor(side / cell), std::sqrt(static_cast<double>(n)))));
  const double cell_size = side / static_cast<double>(cells_per_side);
  auto cell_of = [&](double c) {
    return std::min(cells_per_side - 1,
                    static_cast<std::size_t>(c / cell_size));
  };
  std::vector<std::vector<std::size_t>> grid(cells_per_side * cells_per_side);
  for (std::size_t i = 0; i < n; ++i) {
    grid[cell_of(x[i]) * cells_per_side + cell_of(y[i])].push_back(i);
  }

  std::set<std::pair<std::size_t, std::size_t>> links;
  std::vector<std::vector<std::size_t>> geo(n);
  if (r0 > 0.0) {
    for (std::size_t i = 0; i < n; ++i) {
      const std::size_t cx = cell_of(x[i]);
      const std::size_t cy = cell_of(y[i]);
      for (std::size_t gx = cx == 0 ? 0 : cx - 1;
           gx <= std::min(cells_per_side - 1, cx + 1); ++gx) {
        for (std::size_t gy = cy == 0 ? 0 : cy - 1;
             gy <= std::min(cells_per_side - 1, cy + 1); ++gy) {
          for (std::size_t j : grid[gx * cells_per_side + gy]) {
            if (j > i && close(i, j)) {
              links.emplace(i, j);
              geo[i].push_back(j);
              geo[j].push_back(i);
            }
          }
        }
      }
    }
  }

  if (r1 > 0) {
    std::vector<char> excluded(n, 0);
    for (std::size_t i = 0; i < n; ++i) {
      // Candidates: not i, not within the radius.
      excluded[i] = 1;
      std::size_t excluded_count = 1;
      for (std::size_t j : geo[i]) {
        if (!excluded[j]) {
          excluded[j] = 1;
          ++excluded_count;
        }
      }
      // Units inside the radius but not linked cannot exist (geo is exact),
      // so the remaining candidates are exactly the non-excluded units.
      std::vector<std::size_t> picked;
      const std::size_t available = n - excluded_count;
      const std::size_t want = std::min<std::size_t>(r1, available);
      while (picked.size() < want) {
        const std::size_t j = link_rng.below(n);
        if (excluded[j]) continue;
        excluded[j] = 1;
        picked.push_back(j);
      }
      for (std::size_t j : picked) {
        links.emplace(std::min(i, j), std::max(i, j));
        excluded[j] = 0;
      }
      excluded[i] = 0;
      for (std::size_t j : geo[i]) excluded[j] = 0;
    }
  }

  std::vector<Edge> edges;
  edges.reserve(2 * links.size());
  for (const auto& [i, j] : links) {
    edges.push_back({i, j, weight_rng.uniform(-1.0 / r, 2.0 / r)});
    edges.push_back({j, i, weight_rng.uniform(-1.0 / r, 2.0 / r)});
  }
  if (options.normalize_weights) {
    std::vector<double> abs_sum(n, 0.0);
    for (const Edge& e : edges) abs_sum[e.from] += std::abs(e.weight);
    for (Edge& e : edges) {
      if (abs_sum[e.from] > 1.0) e.weight /= abs_sum[e.from];
    }
  }
  return InterferenceGraph(n, std::move(edges));
}

enum class CycleWeightRule {
  kInverseDegree,  // v_ij = 1 / |N_i|
  kRandom,         // v_ij ~ U(-1/|N_i|, 2/|N_i|), seeded
};

// (d, kappa)-cycle: unit i is linked to i +- 1 .. i +- (kappa - 1) and to
// i +- kappa, i +- 2 kappa, ..., i +- d kappa (mod n).
inline InterferenceGraph generate_cycle(
    std::size_t n, std::size_t d, std::size_t kappa,
    CycleWeightRule rule = CycleWeightRule::kInverseDegree,
    std::uint64_t seed = 0) {
  if (kappa < 1 || kappa > d || n <= 2 * d * kappa) {
    throw std::invalid_argument(
        "generate_cycle: need 1 <= kappa <= d and n > 2 d kappa");
  }
  std::vector<std::size_t> offsets;
  for (std::size_t k = 1; k < kappa; ++k) offsets.push_back(k);
  for (std::size_t k = 1; k <= d; ++k) offsets.push_back(k * kappa);

  SequentialRng rng(CounterStream(seed).child("cycle/weights"));
  std::vector<Edge> edges;
  for (std::size_t i = 0; i < n; ++i) {
    std::set<std::size_t> nbrs;
    for (std::size_t off : offsets) {
      nbrs.insert((i + off) % n);
      nbrs.insert((i + n - off) % n);
    }
    const double deg = static_cast<double>(nbrs.size());
    for (std::size_t j : nbrs) {
      const double w = rule == CycleWeightRule::kInverseDegree
                           ? 1.0 / deg
                           : rng.uniform(-1.0 / deg, 2.0 / deg);
      edges.push_back({i, j, w});
    }
  }
  return InterferenceGraph(n, std::move(edges));
}

enum class GammaRule {
  kUnitAte,        // (gamma / n) * sum v = 0.5, so the ATE is exactly 1
  kLiteralInverse, // gamma = 0.5 / sum v
};

// alpha, beta drawn from U(-1, 1) then shifted to means 5 and 0.5.
inline OutcomeModel generate_outcome_model(const InterferenceGraph& g,
                                           std::uint64_t seed,
                                           GammaRule rule = GammaRule::kUnitAte) {
  const double total = g.total_weight();
  if (total == 0.0) {
    throw std::invalid_argument(
        "generate_outcome_model: total interference weight is zero");
  }
  const std::size_t n = g.n();
  SequentialRng rng(CounterStream(seed).child("outcome-model"));
  OutcomeModel m;
  m.alpha.resize(n);
  m.beta.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    m.alpha[i] = rng.uniform(-1.0, 1.0);
    m.beta[i] = rng.uniform(-1.0, 1.0);
  }
  auto recentre = [n](std::vector<double>& v, double target) {
    double mean = 0.0;
    for (double x : v) mean += x;
    mean /= static_cast<double>(n);
    for (double& x : v) x += target - mean;
  };
  recentre(m.alpha, 5.0);
  recentre(m.beta, 0.5);
  m.gamma = rule == GammaRule::kUnitAte
                ? 0.5 * static_cast<double>(n) / total
                : 0.5 / total;
  return m;
}

}  // namespace mixedrand

#endif  // MIXEDRAND_GENERATORS_HPP_
