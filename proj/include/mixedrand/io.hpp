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

// JSON file formats for graphs, outcome models, clusterings, assignments and
// reports. Doubles are written in shortest round-trip form, so reading a file
// back reproduces every value bit for bit.

#ifndef MIXEDRAND_IO_HPP_
#define MIXEDRAND_IO_HPP_

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"
#include "mixedrand/bounds.hpp"
#include "mixedrand/design.hpp"
#include "mixedrand/estimation.hpp"
#include "mixedrand/graph.hpp"
#include "mixedrand/partition.hpp"
#include "mixedrand/random.hpp"
#include "mixedrand/simulation.hpp"

namespace mixedrand {

using Json = nlohmann::json;

// Graph: {"n": 3, "edges": [[i, j, v_ij], ...]}.
inline Json to_json(const InterferenceGraph& g) {
  Json edges = Json::array();
  for (const Edge& e : g.edges()) edges.push_back({e.from, e.to, e.weight});
  return {{"n", g.n()}, {"edges", std::move(edges)}};
}

inline InterferenceGraph graph_from_json(const Json& j) {
  const auto n = j.at("n").get<std::size_t>();
  std::vector<Edge> edges;
  for (const Json& e : j.at("edges")) {
    if (!e.is_array() || e.size() != 3) {
      throw std::invalid_argument("graph edge must be [from, to, weight]");
    }
    edges.push_back({e[0].get<UnitId>(), e[1].get<UnitId>(),
                     e[2].get<double>()});
  }
  return InterferenceGraph(n, std::move(edges));
}

// Outcome model: {"alpha": [...], "beta": [...], "gamma": g}.
inline Json to_json(const OutcomeModel& m) {
  return {{"alpha", m.alpha}, {"beta", m.beta}, {"gamma", m.gamma}};
}

inline OutcomeModel model_from_json(const Json& j) {
  OutcomeModel m;
  m.alpha = j.at("alpha").get<std::vector<double>>();
  m.beta = j.at("beta").get<std::vector<double>>();
  m.gamma = j.at("gamma").get<double>();
  if (m.alpha.size() != m.beta.size()) {
    throw std::invalid_argument("outcome model: alpha and beta lengths differ");
  }
  return m;
}

// Clustering: {"n": 4, "clusters": [[0, 1], [2], [3]]}, optionally with the
// multiplier "rho" the clustering should be analysed with.
inline Json to_json(const Clustering& c) {
  return {{"n", c.n()}, {"clusters", c.clusters()}};
}

inline Clustering clustering_from_json(const Json& j) {
  auto clusters = j.at("clusters").get<std::vector<std::vector<UnitId>>>();
  std::size_t n = 0;
  if (j.contains("n")) {
    n = j.at("n").get<std::size_t>();
  } else {
    for (const auto& c : clusters) n += c.size();
  }
  return Clustering(n, std::move(clusters));
}

// Assignment: {"W": [...], "w_tilde": [...], "z": [...], "p": p, "seed": s}.
inline Json to_json(const Assignment& a) {
  return {{"W", a.W}, {"w_tilde", a.w_tilde}, {"z", a.z},
          {"p", a.p}, {"seed", a.seed}};
}

inline Assignment assignment_from_json(const Json& j) {
  Assignment a;
  a.z = j.at("z").get<std::vector<int>>();
  a.W = j.value("W", std::vector<int>{});
  a.w_tilde = j.value("w_tilde", std::vector<int>(a.z.size(), 0));
  a.p = j.at("p").get<double>();
  a.seed = j.value("seed", std::uint64_t{0});
  if (a.w_tilde.size() != a.z.size()) {
    throw std::invalid_argument("assignment: w_tilde and z lengths differ");
  }
  for (int v : a.z) {
    if (v != 0 && v != 1) throw std::invalid_argument("assignment: z must be 0/1");
  }
  return a;
}

// Non-finite values become null.
inline Json number_or_null(double x) {
  return std::isfinite(x) ? Json(x) : Json(nullptr);
}

inline Json to_json(const PartitionStats& s) {
  return {{"n", s.n},
          {"eta", s.eta},
          {"delta", s.delta},
          {"rho", number_or_null(s.rho)},
          {"within_weight", s.within_weight},
          {"total_weight", s.total_weight},
          {"max_cluster_size", s.max_cluster_size}};
}

inline Json to_json(const BoundReport& b) {
  return {{"lower", b.lower},
          {"upper", b.upper},
          {"eta", b.eta},
          {"delta", b.delta},
          {"rho", number_or_null(b.rho)},
          {"remainder_coefficient", b.remainder_coefficient}};
}

inline Json to_json(const GraphStats& s) {
  Json j = {{"max_degree", s.max_degree},
            {"growth_constant", s.growth_constant},
            {"total_weight", s.total_weight},
            {"max_abs_unit_weight", s.max_abs_unit_weight},
            {"undirected_edge_count", s.undirected_edge_count}};
  if (s.has_outcome_bounds) {
    j["y_low"] = s.outcome_range.lower;
    j["y_high"] = s.outcome_range.upper;
  }
  return j;
}

inline Json to_json(const ValidationReport& r) {
  Json v = Json::array();
  for (const auto& x : r.violations) v.push_back(x.message);
  return v;
}

inline Json to_json(const EstimateBreakdown& e) {
  return {{"tau", e.tau}, {"tau_c", e.tau_c}, {"tau_b", e.tau_b},
          {"rho", e.rho}};
}

// Wall time is left out unless asked for, so equal runs give equal bytes.
inline Json to_json(const SimulationReport& r, bool with_samples,
                    bool with_timing) {
  Json j = {{"design", r.design},
            {"n", r.n},
            {"replicates", r.replicates},
            {"seed", r.seed},
            {"p", r.p},
            {"mean", r.mean},
            {"variance", r.variance},
            {"std_error", r.std_error},
            {"ci95", {r.ci_low, r.ci_high}},
            {"true_ate", r.true_ate},
            {"bias", r.bias},
            {"y_low", r.y_low},
            {"y_high", r.y_high},
            {"mean_cluster_count", r.mean_cluster_count}};
  j["bound"] = r.bound_available ? to_json(r.bound) : Json(nullptr);
  if (r.normality_available && !r.normality.degenerate) {
    j["normality"] = {{"skewness", r.normality.skewness},
                      {"excess_kurtosis", r.normality.excess_kurtosis},
                      {"ks", r.normality.ks}};
  } else {
    j["normality"] = nullptr;
  }
  if (with_samples) j["samples"] = r.samples;
  if (with_timing) j["wall_time_s"] = r.wall_time_s;
  return j;
}

inline std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path.string() + "' for reading");
  std::ostringstream os;
  os << in.rdbuf();
  if (in.bad()) throw IoError("error reading '" + path.string() + "'");
  return os.str();
}

inline void write_text_file(const std::filesystem::path& path,
                            const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
  out << text;
  out.flush();
  if (!out) throw IoError("error writing '" + path.string() + "'");
}

// Parse failures become std::invalid_argument naming the file.
inline Json read_json_file(const std::filesystem::path& path) {
  const std::string text = read_text_file(path);
  try {
    return Json::parse(text);
  } catch (const Json::exception& e) {
    throw std::invalid_argument("'" + path.string() +
                                "' is not valid JSON: " + e.what());
  }
}

inline void write_json_file(const std::filesystem::path& path, const Json& j) {
  write_text_file(path, j.dump(2) + "\n");
}

namespace detail {

template <class T, class F>
T load_with(const std::filesystem::path& path, F&& convert) {
  const Json j = read_json_file(path);
  try {
    return convert(j);
  } catch (const Json::exception& e) {
    throw std::invalid_argument("'" + path.string() + "': " + e.what());
  } catch (const std::invalid_argument& e) {
    throw std::invalid_argument("'" + path.string() + "': " + e.what());
  } catch (const std::out_of_range& e) {
    throw std::invalid_argument("'" + path.string() + "': " + e.what());
  }
}

}  // namespace detail

inline InterferenceGraph load_graph(const std::filesystem::path& path) {
  return detail::load_with<InterferenceGraph>(path, graph_from_json);
}

inline OutcomeModel load_model(const std::filesystem::path& path) {
  return detail::load_with<OutcomeModel>(path, model_from_json);
}

inline Clustering load_clustering(const std::filesystem::path& path) {
  return detail::load_with<Clustering>(path, clustering_from_json);
}

inline Assignment load_assignment(const std::filesystem::path& path) {
  return detail::load_with<Assignment>(path, assignment_from_json);
}

// 64-bit FNV-1a of a file's bytes, as 16 hex digits.
inline std::string file_digest(const std::filesystem::path& path) {
  const std::string bytes = read_text_file(path);
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  std::ostringstream os;
  os << std::hex << std::setw(16) << std::setfill('0') << h;
  return os.str();
}

}  // namespace mixedrand

#endif  // MIXEDRAND_IO_HPP_
