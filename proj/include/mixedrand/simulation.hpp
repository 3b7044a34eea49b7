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

// Monte Carlo harness: design -> assign -> observe -> estimate, repeated over
// replicates with per-replicate seeds, plus moment and normality summaries.

#ifndef MIXEDRAND_SIMULATION_HPP_
#define MIXEDRAND_SIMULATION_HPP_

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <exception>
#include <iomanip>
#include <limits>
#include <memory>
#include <optional>
#include <span>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <thread>
#include <vector>

#include "mixedrand/bounds.hpp"
#include "mixedrand/clustering.hpp"
#include "mixedrand/design.hpp"
#include "mixedrand/estimation.hpp"
#include "mixedrand/generators.hpp"
#include "mixedrand/graph.hpp"
#include "mixedrand/partition.hpp"
#include "mixedrand/random.hpp"

namespace mixedrand {

// Pairwise summation over a fixed order. Results depend only on the values
// and their order, never on how they were produced.
inline double pairwise_sum(const double* x, std::size_t n) {
  if (n <= 8) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += x[i];
    return s;
  }
  const std::size_t h = n / 2;
  return pairwise_sum(x, h) + pairwise_sum(x + h, n - h);
}

inline double pairwise_sum(std::span<const double> x) {
  return pairwise_sum(x.data(), x.size());
}

struct NormalityDiagnostics {
  double skewness = 0.0;
  double excess_kurtosis = 0.0;
  double ks = 0.0;  // sup |F_n - Phi| of the standardised sample
  bool degenerate = false;  // zero sample variance; other fields are NaN
};

inline double standard_normal_cdf(double x) {
  return 0.5 * std::erfc(-x / std::sqrt(2.0));
}

inline constexpr std::size_t kMinNormalitySamples = 100;

inline NormalityDiagnostics normality_diagnostics(std::span<const double> x) {
  if (x.size() < kMinNormalitySamples) {
    throw std::invalid_argument(
        "normality diagnostics need at least 100 samples");
  }
  const double n = static_cast<double>(x.size());
  const double mean = pairwise_sum(x) / n;
  std::vector<double> c2(x.size()), c3(x.size()), c4(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double d = x[i] - mean;
    c2[i] = d * d;
    c3[i] = d * d * d;
    c4[i] = d * d * d * d;
  }
  const double m2 = pairwise_sum(c2) / n;
  NormalityDiagnostics out;
  if (!(m2 > 0.0)) {
    const double nan = std::numeric_limits<double>::quiet_NaN();
    out.skewness = out.excess_kurtosis = out.ks = nan;
    out.degenerate = true;
    return out;
  }
  const double m3 = pairwise_sum(c3) / n;
  const double m4 = pairwise_sum(c4) / n;
  out.skewness = m3 / std::pow(m2, 1.5);
  out.excess_kurtosis = m4 / (m2 * m2) - 3.0;

  // Standardise with the unbiased sample SD.
  const double sd = std::sqrt(m2 * n / (n - 1.0));
  std::vector<double> s(x.begin(), x.end());
  std::sort(s.begin(), s.end());
  double ks = 0.0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    const double f = standard_normal_cdf((s[i] - mean) / sd);
    ks = std::max(ks, static_cast<double>(i + 1) / n - f);
    ks = std::max(ks, f - static_cast<double>(i) / n);
  }
  out.ks = ks;
  return out;
}

// Where the instance comes from.
struct GraphSpec {
  enum class Kind { kRgg, kCycle, kProvided };
  Kind kind = Kind::kRgg;
  std::size_t n = 1000;
  double r0 = 4.0;
  std::size_t r1 = 0;
  std::size_t d = 4;
  std::size_t kappa = 2;
  bool normalize = false;
  std::uint64_t seed = 1;
  GammaRule gamma_rule = GammaRule::kUnitAte;
  // Replaces the generated model's gamma (rgg and cycle only).
  std::optional<double> gamma;
  // kProvided only.
  std::shared_ptr<const InterferenceGraph> graph;
  std::shared_ptr<const OutcomeModel> model;
};

struct Instance {
  InterferenceGraph graph;
  OutcomeModel model;
};

inline std::uint64_t model_seed(std::uint64_t graph_seed) {
  return derive_key(graph_seed, hash_name("outcome-model"));
}

inline Instance build_instance(const GraphSpec& spec) {
  switch (spec.kind) {
    case GraphSpec::Kind::kRgg: {
      auto g = generate_rgg(spec.n, spec.r0, spec.r1, spec.seed,
                            RggOptions{spec.normalize});
      auto m = generate_outcome_model(g, model_seed(spec.seed),
                                      spec.gamma_rule);
      if (spec.gamma) m.gamma = *spec.gamma;
      return {std::move(g), std::move(m)};
    }
    case GraphSpec::Kind::kCycle: {
      auto g = generate_cycle(spec.n, spec.d, spec.kappa,
                              CycleWeightRule::kInverseDegree, spec.seed);
      auto m = generate_outcome_model(g, model_seed(spec.seed),
                                      spec.gamma_rule);
      if (spec.gamma) m.gamma = *spec.gamma;
      return {std::move(g), std::move(m)};
    }
    case GraphSpec::Kind::kProvided: {
      if (!spec.graph) {
        throw std::invalid_argument("graph spec: no graph provided");
      }
      OutcomeModel m = spec.model ? *spec.model
                                  : generate_outcome_model(
                                        *spec.graph, model_seed(spec.seed),
                                        spec.gamma_rule);
      m.check_against(*spec.graph);
      return {*spec.graph, std::move(m)};
    }
  }
  throw std::invalid_argument("graph spec: unknown kind");
}

enum class SimDesign {
  kFixedGreedy,
  kTwoHop,
  kWeightInvariant,
  kClusterBased,
  kBernoulli,
};

inline std::string_view design_name(SimDesign d) {
  switch (d) {
    case SimDesign::kFixedGreedy: return "fixed-greedy";
    case SimDesign::kTwoHop: return "two-hop";
    case SimDesign::kWeightInvariant: return "weight-invariant";
    case SimDesign::kClusterBased: return "cluster-based";
    case SimDesign::kBernoulli: return "bernoulli";
  }
  return "unknown";
}

inline SimDesign parse_design(std::string_view s) {
  for (SimDesign d : {SimDesign::kFixedGreedy, SimDesign::kTwoHop,
                      SimDesign::kWeightInvariant, SimDesign::kClusterBased,
                      SimDesign::kBernoulli}) {
    if (s == design_name(d)) return d;
  }
  if (s == "F") return SimDesign::kFixedGreedy;
  if (s == "W") return SimDesign::kWeightInvariant;
  throw std::invalid_argument("unknown design '" + std::string(s) + "'");
}

struct BoundOptions {
  std::optional<double> y_low;   // default: outcome_bounds lower
  std::optional<double> y_high;  // default: outcome_bounds upper
  double remainder_coefficient = 0.0;
};

struct SimulationConfig {
  GraphSpec graph;
  SimDesign design = SimDesign::kFixedGreedy;
  double p = 0.5;
  std::size_t replicates = 1000;
  std::uint64_t seed = 0;
  BoundOptions bounds;
  std::size_t threads = 1;
  bool keep_samples = true;
  double kappa = 0.0;  // two-hop only; 0 means the graph's growth constant
  GreedyOptions greedy;
  // Replaces the computed clustering of the fixed-clustering designs.
  std::shared_ptr<const Clustering> clustering;
};

struct SimulationReport {
  std::string design;
  std::size_t n = 0;
  std::size_t replicates = 0;
  std::uint64_t seed = 0;
  double p = 0.5;
  std::vector<double> samples;
  double mean = 0.0;
  double variance = 0.0;  // divisor R - 1
  double std_error = 0.0;
  double ci_low = 0.0;    // normal-approximation 95% interval for E[tau]
  double ci_high = 0.0;
  double true_ate = 0.0;
  double bias = 0.0;
  double y_low = 0.0;
  double y_high = 0.0;
  bool bound_available = false;
  BoundReport bound;
  bool normality_available = false;
  NormalityDiagnostics normality;
  double mean_cluster_count = 0.0;
  double wall_time_s = 0.0;
};

inline std::uint64_t replicate_seed(std::uint64_t master, std::uint64_t r) {
  return derive_key(master, hash_name("replicate"), r);
}

// Outcome-range inputs of the bounds and of the greedy objective.
inline OutcomeRange resolved_outcome_range(const Instance& inst,
                                           const BoundOptions& opts) {
  const OutcomeRange range = outcome_bounds(inst.graph, inst.model);
  return {opts.y_low.value_or(range.lower), opts.y_high.value_or(range.upper)};
}

inline bool uses_fixed_clustering(SimDesign d) {
  return d == SimDesign::kFixedGreedy || d == SimDesign::kTwoHop ||
         d == SimDesign::kClusterBased;
}

// The clustering a fixed-clustering design runs on: the override if one is
// given, otherwise greedy (fixed-greedy, cluster-based) or 2-hop.
inline Clustering fixed_clustering_for(const Instance& inst,
                                       const SimulationConfig& cfg) {
  if (!uses_fixed_clustering(cfg.design)) {
    throw std::invalid_argument("design '" +
                                std::string(design_name(cfg.design)) +
                                "' has no fixed clustering");
  }
  if (cfg.clustering) {
    if (cfg.clustering->n() != inst.graph.n()) {
      throw std::invalid_argument("clustering does not match graph size");
    }
    return *cfg.clustering;
  }
  if (cfg.design == SimDesign::kTwoHop) {
    const double kappa =
        cfg.kappa > 0.0 ? cfg.kappa : growth_constant(inst.graph);
    return two_hop_clustering(inst.graph, kappa);
  }
  const OutcomeRange r = resolved_outcome_range(inst, cfg.bounds);
  return greedy_clustering(inst.graph, cfg.p, r.lower, r.upper, cfg.greedy);
}

namespace detail {

// Everything a replicate needs, fixed before the replicate loop.
struct Prepared {
  const Instance* instance = nullptr;
  SimDesign design = SimDesign::kFixedGreedy;
  double p = 0.5;
  std::optional<Clustering> clustering;
  std::optional<RandomClusteringLaw> law;
  double rho = 1.0;
};

struct ReplicateOutput {
  double tau = 0.0;
  double eta = 0.0;
  double delta = 0.0;
  double clusters = 0.0;
};

inline ReplicateOutput run_replicate(const Prepared& prep, std::uint64_t seed) {
  const InterferenceGraph& g = prep.instance->graph;
  const OutcomeModel& model = prep.instance->model;
  ReplicateOutput out;
  switch (prep.design) {
    case SimDesign::kBernoulli: {
      const Assignment a = assign_bernoulli(g.n(), prep.p, seed);
      out.tau = ht_estimate(a.z, evaluate_outcomes(g, model, a.z), prep.p);
      out.clusters = static_cast<double>(g.n());
      break;
    }
    case SimDesign::kClusterBased: {
      const Assignment a = assign_cluster_based(*prep.clustering, prep.p, seed);
      out.tau = ht_estimate(a.z, evaluate_outcomes(g, model, a.z), prep.p);
      out.clusters = static_cast<double>(prep.clustering->size());
      break;
    }
    case SimDesign::kFixedGreedy:
    case SimDesign::kTwoHop: {
      const Assignment a = assign_mixed(*prep.clustering, prep.p, seed);
      const auto y = evaluate_outcomes(g, model, a.z);
      out.tau = mixed_estimate_observed(a.z, a.w_tilde, y, prep.p, prep.rho,
                                        false)
                    .tau;
      out.clusters = static_cast<double>(prep.clustering->size());
      break;
    }
    case SimDesign::kWeightInvariant: {
      const Clustering c = sample_clustering(
          *prep.law, derive_key(seed, hash_name("clustering")));
      const Assignment a = assign_mixed(c, prep.p, seed);
      const auto y = evaluate_outcomes(g, model, a.z);
      out.tau = mixed_estimate_observed(a.z, a.w_tilde, y, prep.p, prep.rho,
                                        false)
                    .tau;
      const PartitionStats st = partition_stats(g, c);
      out.eta = st.eta;
      out.delta = st.delta;
      out.clusters = static_cast<double>(c.size());
      break;
    }
  }
  return out;
}

}  // namespace detail

// Runs the Monte Carlo loop on an already-built instance.
inline SimulationReport run_simulation_on(const Instance& inst,
                                          const SimulationConfig& cfg) {
  if (cfg.replicates < 1) {
    throw std::invalid_argument("simulation needs at least one replicate");
  }
  if (cfg.design != SimDesign::kBernoulli && !(cfg.p > 0.0 && cfg.p < 1.0)) {
    throw std::invalid_argument("treatment probability must lie in (0, 1)");
  }
  const auto t0 = std::chrono::steady_clock::now();
  const InterferenceGraph& g = inst.graph;
  inst.model.check_against(g);

  SimulationReport rep;
  rep.design = std::string(design_name(cfg.design));
  rep.n = g.n();
  rep.replicates = cfg.replicates;
  rep.seed = cfg.seed;
  rep.p = cfg.p;
  rep.true_ate = inst.model.true_ate(g);

  const OutcomeRange range = resolved_outcome_range(inst, cfg.bounds);
  rep.y_low = range.lower;
  rep.y_high = range.upper;

  detail::Prepared prep;
  prep.instance = &inst;
  prep.design = cfg.design;
  prep.p = cfg.p;
  if (uses_fixed_clustering(cfg.design)) {
    prep.clustering = fixed_clustering_for(inst, cfg);
  } else if (cfg.design == SimDesign::kWeightInvariant) {
    prep.law = weight_invariant_law(g);
    prep.rho = prep.law->rho();
  }
  if (cfg.design == SimDesign::kFixedGreedy ||
      cfg.design == SimDesign::kTwoHop) {
    prep.rho = rho_fixed(g, *prep.clustering);
  }

  const std::size_t R = cfg.replicates;
  std::vector<detail::ReplicateOutput> outs(R);
  const std::size_t workers =
      std::max<std::size_t>(1, std::min(cfg.threads, R));
  auto work = [&](std::size_t w) {
    for (std::size_t r = w; r < R; r += workers) {
      outs[r] = detail::run_replicate(prep, replicate_seed(cfg.seed, r));
    }
  };
  if (workers == 1) {
    work(0);
  } else {
    std::vector<std::thread> pool;
    std::vector<std::exception_ptr> errors(workers);
    for (std::size_t w = 0; w < workers; ++w) {
      pool.emplace_back([&, w] {
        try {
          work(w);
        } catch (...) {
          errors[w] = std::current_exception();
        }
      });
    }
    for (auto& t : pool) t.join();
    for (auto& e : errors) {
      if (e) std::rethrow_exception(e);
    }
  }

  std::vector<double> tau(R), eta(R), delta(R), clusters(R);
  for (std::size_t r = 0; r < R; ++r) {
    tau[r] = outs[r].tau;
    eta[r] = outs[r].eta;
    delta[r] = outs[r].delta;
    clusters[r] = outs[r].clusters;
  }
  const double Rd = static_cast<double>(R);
  rep.mean = pairwise_sum(tau) / Rd;
  if (R > 1) {
    std::vector<double> sq(R);
    for (std::size_t r = 0; r < R; ++r) {
      sq[r] = (tau[r] - rep.mean) * (tau[r] - rep.mean);
    }
    rep.variance = pairwise_sum(sq) / (Rd - 1.0);
  }
  rep.std_error = std::sqrt(rep.variance / Rd);
  rep.ci_low = rep.mean - 1.959963984540054 * rep.std_error;
  rep.ci_high = rep.mean + 1.959963984540054 * rep.std_error;
  rep.bias = rep.mean - rep.true_ate;
  rep.mean_cluster_count = pairwise_sum(clusters) / Rd;

  // Bounds. The model's true gamma enters the delta term.
  const double gamma_sq = inst.model.gamma * inst.model.gamma;
  const bool bound_inputs_ok =
      cfg.p > 0.0 && cfg.p < 1.0 && rep.y_low > 0.0 && rep.y_low <= rep.y_high;
  if (bound_inputs_ok) {
    switch (cfg.design) {
      case SimDesign::kFixedGreedy:
      case SimDesign::kTwoHop:
        rep.bound = bound_mixed(partition_stats(g, *prep.clustering), cfg.p,
                                rep.y_low, rep.y_high, gamma_sq,
                                cfg.bounds.remainder_coefficient, g.n());
        rep.bound_available = true;
        break;
      case SimDesign::kWeightInvariant: {
        // The bound is affine in (eta, delta) at fixed rho, so its average
        // over the sampled clusterings is the bound at the mean statistics.
        PartitionStats st;
        st.n = g.n();
        st.eta = pairwise_sum(eta) / Rd;
        st.delta = pairwise_sum(delta) / Rd;
        st.rho = prep.rho;
        rep.bound = bound_mixed(st, cfg.p, rep.y_low, rep.y_high, gamma_sq,
                                cfg.bounds.remainder_coefficient, g.n());
        rep.bound_available = true;
        break;
      }
      case SimDesign::kClusterBased:
        rep.bound = bound_cluster_based(partition_stats(g, *prep.clustering),
                                        cfg.p, rep.y_low, rep.y_high, gamma_sq);
        rep.bound_available = true;
        break;
      case SimDesign::kBernoulli:
        rep.bound = bound_cluster_based(
            partition_stats(g, Clustering::singletons(g.n())), cfg.p,
            rep.y_low, rep.y_high, gamma_sq);
        rep.bound_available = true;
        break;
    }
  }

  if (R >= kMinNormalitySamples) {
    rep.normality = normality_diagnostics(tau);
    rep.normality_available = true;
  }
  if (cfg.keep_samples) rep.samples = std::move(tau);
  rep.wall_time_s = std::chrono::duration<double>(
                        std::chrono::steady_clock::now() - t0)
                        .count();
  return rep;
}

inline SimulationReport run_simulation(const SimulationConfig& cfg) {
  const Instance inst = build_instance(cfg.graph);
  return run_simulation_on(inst, cfg);
}

// One report per graph seed, with within- and between-instance spread.
struct MultiSeedSummary {
  std::vector<SimulationReport> reports;
  double mean_of_means = 0.0;
  double mean_within_variance = 0.0;   // average replicate variance
  double between_variance = 0.0;       // variance of per-seed means
};

inline MultiSeedSummary run_over_graph_seeds(
    SimulationConfig cfg, const std::vector<std::uint64_t>& graph_seeds) {
  if (graph_seeds.empty()) {
    throw std::invalid_argument("need at least one graph seed");
  }
  MultiSeedSummary s;
  std::vector<double> means, vars;
  for (std::uint64_t gs : graph_seeds) {
    cfg.graph.seed = gs;
    s.reports.push_back(run_simulation(cfg));
    means.push_back(s.reports.back().mean);
    vars.push_back(s.reports.back().variance);
  }
  const double k = static_cast<double>(means.size());
  s.mean_of_means = pairwise_sum(means) / k;
  s.mean_within_variance = pairwise_sum(vars) / k;
  if (means.size() > 1) {
    std::vector<double> sq;
    for (double m : means) sq.push_back((m - s.mean_of_means) * (m - s.mean_of_means));
    s.between_variance = pairwise_sum(sq) / (k - 1.0);
  }
  return s;
}

struct ScalingRow {
  std::size_t n = 0;
  double mean = 0.0;
  double variance = 0.0;
  double var_hat_upper = 0.0;
};

struct ScalingTable {
  std::vector<ScalingRow> rows;
  std::optional<double> slope;  // least-squares slope of log var on log n
};

inline ScalingTable scaling_study(const SimulationConfig& base,
                                  const std::vector<std::size_t>& n_list) {
  if (n_list.empty()) throw std::invalid_argument("scaling study: no sizes");
  if (base.graph.kind == GraphSpec::Kind::kProvided) {
    throw std::invalid_argument("scaling study needs a generated graph");
  }
  ScalingTable t;
  for (std::size_t n : n_list) {
    SimulationConfig cfg = base;
    cfg.graph.n = n;
    cfg.keep_samples = false;
    const SimulationReport r = run_simulation(cfg);
    t.rows.push_back({n, r.mean, r.variance,
                      r.bound_available
                          ? r.bound.upper
                          : std::numeric_limits<double>::quiet_NaN()});
  }
  if (t.rows.size() >= 2) {
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    const double k = static_cast<double>(t.rows.size());
    for (const auto& row : t.rows) {
      const double x = std::log(static_cast<double>(row.n));
      const double y = std::log(row.variance);
      sx += x;
      sy += y;
      sxx += x * x;
      sxy += x * y;
    }
    const double den = k * sxx - sx * sx;
    if (den != 0.0) t.slope = (k * sxy - sx * sy) / den;
  }
  return t;
}

// CSV with one row per (instance, design).
inline std::string csv_header() {
  return "n,r0,r1,design,R,mean,var,var_hat_upper,eta,delta,rho,skew,kurt,ks,"
         "wall_time_s";
}

struct CsvContext {
  std::optional<double> r0;
  std::optional<std::size_t> r1;
  bool timing = false;  // wall time varies run to run; off keeps rows stable
};

inline std::string format_number(double x) {
  if (std::isnan(x)) return "NA";
  std::ostringstream os;
  os << std::setprecision(10) << x;
  return os.str();
}

inline std::string csv_row(const SimulationReport& r, const CsvContext& ctx) {
  std::ostringstream os;
  const double nan = std::numeric_limits<double>::quiet_NaN();
  os << r.n << ',' << (ctx.r0 ? format_number(*ctx.r0) : "NA") << ','
     << (ctx.r1 ? std::to_string(*ctx.r1) : "NA") << ',' << r.design << ','
     << r.replicates << ',' << format_number(r.mean) << ','
     << format_number(r.variance) << ','
     << format_number(r.bound_available ? r.bound.upper : nan) << ','
     << format_number(r.bound_available ? r.bound.eta : nan) << ','
     << format_number(r.bound_available ? r.bound.delta : nan) << ','
     << format_number(r.bound_available ? r.bound.rho : nan) << ','
     << format_number(r.normality_available ? r.normality.skewness : nan)
     << ','
     << format_number(r.normality_available ? r.normality.excess_kurtosis
                                            : nan)
     << ',' << format_number(r.normality_available ? r.normality.ks : nan)
     << ',' << (ctx.timing ? format_number(r.wall_time_s) : "NA");
  return os.str();
}

}  // namespace mixedrand

#endif  // MIXEDRAND_SIMULATION_HPP_
