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

// mixedrand command-line front end.
//
// Exit codes: 0 success, 2 usage or configuration error, 3 I/O failure,
// 4 numerical failure.

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "mixedrand/mixedrand.hpp"

namespace fs = std::filesystem;
using namespace mixedrand;

namespace {

constexpr int kExitUsage = 2;
constexpr int kExitIo = 3;
constexpr int kExitNumerical = 4;

void emit(const Json& j, const std::string& path) {
  if (path.empty() || path == "-") {
    std::cout << j.dump(2) << "\n";
  } else {
    write_json_file(path, j);
  }
}

void emit_text(const std::string& text, const std::string& path) {
  if (path.empty() || path == "-") {
    std::cout << text;
  } else {
    write_text_file(path, text);
  }
}

std::size_t as_count(double x, const char* what) {
  if (!(x >= 0.0) || std::floor(x) != x) {
    throw std::invalid_argument(std::string(what) +
                                " must be a non-negative integer");
  }
  return static_cast<std::size_t>(x);
}

// Graph source shared by simulate and friends.
struct GraphArgs {
  std::vector<double> rgg;
  std::vector<std::size_t> cycle;
  std::string graph_file;
  std::string model_file;
  std::uint64_t graph_seed = 1;
  bool normalize = false;
  bool literal_gamma = false;

  void add_to(CLI::App* cmd, bool allow_file,
              const std::string& seed_flag = "--graph-seed") {
    auto* source = cmd->add_option_group("graph source");
    source->add_option("--rgg", rgg, "Random geometric graph: n r0 r1")
        ->expected(3);
    source->add_option("--cycle", cycle, "(d, kappa)-cycle: n d kappa")
        ->expected(3);
    if (allow_file) {
      auto* f = source->add_option("--graph", graph_file, "Graph JSON file");
      cmd->add_option("--model", model_file, "Outcome model JSON file")
          ->needs(f);
    }
    source->require_option(1);
    cmd->add_option(seed_flag, graph_seed, "Seed of the generated graph");
    cmd->add_flag("--normalize", normalize,
                  "Rescale RGG weights so every unit's weights sum to 1");
    cmd->add_flag("--literal-gamma", literal_gamma,
                  "Set gamma = 0.5 / sum(v) instead of an ATE of 1");
  }

  GraphSpec spec() const {
    GraphSpec s;
    s.seed = graph_seed;
    s.normalize = normalize;
    s.gamma_rule = literal_gamma ? GammaRule::kLiteralInverse
                                 : GammaRule::kUnitAte;
    if (!rgg.empty()) {
      s.kind = GraphSpec::Kind::kRgg;
      s.n = as_count(rgg[0], "n");
      s.r0 = rgg[1];
      s.r1 = as_count(rgg[2], "r1");
    } else if (!cycle.empty()) {
      s.kind = GraphSpec::Kind::kCycle;
      s.n = cycle[0];
      s.d = cycle[1];
      s.kappa = cycle[2];
    } else if (!graph_file.empty()) {
      s.kind = GraphSpec::Kind::kProvided;
      s.graph = std::make_shared<const InterferenceGraph>(load_graph(graph_file));
      if (!model_file.empty()) {
        s.model = std::make_shared<const OutcomeModel>(load_model(model_file));
      }
    } else {
      throw std::invalid_argument(
          "one of --rgg, --cycle or --graph is required");
    }
    return s;
  }
};

// ---- gen-graph -------------------------------------------------------------

struct GenGraphArgs {
  GraphArgs graph;
  std::string out;
  std::string stats_out;
  std::string model_out;
  std::size_t growth_radius = 0;
};

void run_gen_graph(const GenGraphArgs& a) {
  if (a.graph.rgg.empty() && a.graph.cycle.empty()) {
    throw std::invalid_argument("gen-graph needs --rgg or --cycle");
  }
  const GraphSpec spec = a.graph.spec();
  const Instance inst = build_instance(spec);
  const std::size_t cap = a.growth_radius == 0
                              ? std::numeric_limits<std::size_t>::max()
                              : a.growth_radius;
  const GraphStats stats = graph_stats(inst.graph, cap, &inst.model);
  Json sidecar = to_json(stats);
  sidecar["n"] = inst.graph.n();
  sidecar["directed_edge_count"] = inst.graph.edges().size();
  sidecar["seed"] = spec.seed;
  sidecar["generator"] =
      spec.kind == GraphSpec::Kind::kRgg
          ? Json{{"rgg", {{"n", spec.n}, {"r0", spec.r0}, {"r1", spec.r1}}}}
          : Json{{"cycle",
                  {{"n", spec.n}, {"d", spec.d}, {"kappa", spec.kappa}}}};
  sidecar["violations"] = to_json(validate(inst.graph));
  sidecar["gamma"] = inst.model.gamma;
  sidecar["true_ate"] = inst.model.true_ate(inst.graph);

  emit(to_json(inst.graph), a.out);
  std::string stats_path = a.stats_out;
  if (stats_path.empty() && !a.out.empty() && a.out != "-") {
    stats_path = a.out + ".stats.json";
  }
  if (!stats_path.empty()) emit(sidecar, stats_path);
  if (!a.model_out.empty()) emit(to_json(inst.model), a.model_out);
}

// ---- cluster ---------------------------------------------------------------

struct ClusterArgs {
  std::string graph;
  std::string model;
  std::string algo = "greedy";
  double p = 0.5;
  std::optional<double> y_low;
  std::optional<double> y_high;
  double kappa = 0.0;
  std::uint64_t seed = 0;
  std::string out;
};

OutcomeRange range_from(const InterferenceGraph& g, const std::string& model,
                        std::optional<double> y_low,
                        std::optional<double> y_high) {
  OutcomeRange r{0.0, 0.0};
  if (!model.empty()) {
    const OutcomeModel m = load_model(model);
    r = outcome_bounds(g, m);
  } else if (!y_low || !y_high) {
    throw std::invalid_argument(
        "outcome bounds unknown: pass --model or both --y-low and --y-high");
  }
  if (y_low) r.lower = *y_low;
  if (y_high) r.upper = *y_high;
  return r;
}

void run_cluster(const ClusterArgs& a) {
  const InterferenceGraph g = load_graph(a.graph);
  Json out;
  std::optional<Clustering> c;
  double rho = std::numeric_limits<double>::quiet_NaN();
  if (a.algo == "greedy") {
    const OutcomeRange r = range_from(g, a.model, a.y_low, a.y_high);
    c = greedy_clustering(g, a.p, r.lower, r.upper);
  } else if (a.algo == "two-hop") {
    const double kappa = a.kappa > 0.0 ? a.kappa : growth_constant(g);
    c = two_hop_clustering(g, kappa);
    out["kappa"] = kappa;
  } else if (a.algo == "weight-invariant") {
    const RandomClusteringLaw law = weight_invariant_law(g);
    c = sample_clustering(law, a.seed);
    rho = law.rho();
    out["lambda_star"] = law.lambda_star;
    out["law_uniform"] = law.uniform();
    out["seed"] = a.seed;
  } else if (a.algo == "singleton") {
    c = Clustering::singletons(g.n());
  } else if (a.algo == "whole") {
    c = Clustering::whole(g.n());
  } else {
    throw std::invalid_argument("unknown clustering algorithm '" + a.algo +
                                "'");
  }
  const PartitionStats st = partition_stats(g, *c);
  if (std::isnan(rho) && st.rho_defined()) rho = st.rho;
  Json j = to_json(*c);
  j["algo"] = a.algo;
  j["rho"] = number_or_null(rho);
  j["stats"] = to_json(st);
  for (auto& [k, v] : out.items()) j[k] = v;
  emit(j, a.out);
}

// ---- assign ----------------------------------------------------------------

struct AssignArgs {
  std::string clustering;
  std::size_t n = 0;
  std::string design = "mixed";
  double p = 0.5;
  std::uint64_t seed = 0;
  std::string out;
};

void run_assign(const AssignArgs& a) {
  Assignment asg;
  if (a.design == "bernoulli") {
    std::size_t n = a.n;
    if (!a.clustering.empty()) n = load_clustering(a.clustering).n();
    if (n == 0) {
      throw std::invalid_argument("bernoulli assignment needs --n or --clustering");
    }
    asg = assign_bernoulli(n, a.p, a.seed);
  } else {
    if (a.clustering.empty()) {
      throw std::invalid_argument("--clustering is required for design '" +
                                  a.design + "'");
    }
    const Clustering c = load_clustering(a.clustering);
    if (a.design == "mixed") {
      asg = assign_mixed(c, a.p, a.seed);
    } else if (a.design == "cluster-based") {
      asg = assign_cluster_based(c, a.p, a.seed);
    } else {
      throw std::invalid_argument("unknown design '" + a.design + "'");
    }
  }
  Json j = to_json(asg);
  j["design"] = a.design;
  emit(j, a.out);
}

// ---- estimate --------------------------------------------------------------

struct EstimateArgs {
  std::string graph;
  std::string model;
  std::string clustering;
  std::string assignment;
  std::string estimator = "mixed";
  std::optional<double> rho;
  std::string out;
};

// rho: explicit flag, else the clustering file's "rho", else computed.
double resolve_rho(const InterferenceGraph& g, const Clustering& c,
                   const std::string& clustering_file,
                   std::optional<double> flag) {
  if (flag) return *flag;
  const Json j = read_json_file(clustering_file);
  if (j.contains("rho") && j["rho"].is_number()) return j["rho"].get<double>();
  return rho_fixed(g, c);
}

void run_estimate(const EstimateArgs& a) {
  const InterferenceGraph g = load_graph(a.graph);
  const OutcomeModel m = load_model(a.model);
  m.check_against(g);
  const Assignment asg = load_assignment(a.assignment);
  if (asg.z.size() != g.n()) {
    throw std::invalid_argument("assignment does not match graph size");
  }
  Json j;
  if (a.estimator == "ht") {
    j["tau"] = ht_cluster_based(g, m, asg);
  } else if (a.estimator == "mixed") {
    if (a.clustering.empty()) {
      throw std::invalid_argument("--clustering is required for the mixed estimator");
    }
    const Clustering c = load_clustering(a.clustering);
    const double rho = resolve_rho(g, c, a.clustering, a.rho);
    j = to_json(mixed_estimate(g, m, c, asg, rho));
  } else {
    throw std::invalid_argument("unknown estimator '" + a.estimator + "'");
  }
  j["estimator"] = a.estimator;
  j["true_ate"] = m.true_ate(g);
  emit(j, a.out);
}

// ---- bounds ----------------------------------------------------------------

struct BoundsArgs {
  std::string graph;
  std::string model;
  std::string clustering;
  double p = 0.5;
  std::optional<double> y_low;
  std::optional<double> y_high;
  std::optional<double> gamma;
  std::optional<double> rho;
  double remainder = 0.0;
  std::string out;
};

void run_bounds(const BoundsArgs& a) {
  const InterferenceGraph g = load_graph(a.graph);
  const Clustering c = load_clustering(a.clustering);
  if (c.n() != g.n()) {
    throw std::invalid_argument("clustering does not match graph size");
  }
  const OutcomeRange r = range_from(g, a.model, a.y_low, a.y_high);
  double gamma = 0.0;
  if (a.gamma) {
    gamma = *a.gamma;
  } else if (!a.model.empty()) {
    gamma = load_model(a.model).gamma;
  } else {
    throw std::invalid_argument("gamma unknown: pass --model or --gamma");
  }
  PartitionStats st = partition_stats(g, c);
  if (a.rho) st.rho = *a.rho;
  Json j;
  j["stats"] = to_json(st);
  j["y_low"] = r.lower;
  j["y_high"] = r.upper;
  j["cluster_based"] =
      to_json(bound_cluster_based(st, a.p, r.lower, r.upper, gamma * gamma));
  if (std::isfinite(st.rho)) {
    j["mixed"] = to_json(bound_mixed(st, a.p, r.lower, r.upper, gamma * gamma,
                                     a.remainder, g.n()));
    const double scale = positive_weight_scale(g);
    j["surrogate_A"] =
        scale > 0.0 ? Json(surrogate_A(st, a.p, r.lower, r.upper, scale))
                    : Json(nullptr);
  } else {
    j["mixed"] = nullptr;
    j["surrogate_A"] = nullptr;
  }
  emit(j, a.out);
}

// ---- simulate --------------------------------------------------------------

struct SimArgs {
  GraphArgs graph;
  std::string design = "fixed-greedy";
  double p = 0.5;
  std::size_t reps = 1000;
  std::uint64_t seed = 0;
  std::size_t threads = 1;
  std::optional<double> y_low;
  std::optional<double> y_high;
  double remainder = 0.0;
  double kappa = 0.0;
  std::string clustering;
  std::string json_out;
  std::string csv_out;
  bool emit_samples = false;
  bool timing = false;

  void add_to(CLI::App* cmd) {
    graph.add_to(cmd, true);
    cmd->add_option("--design", design,
                    "fixed-greedy|two-hop|weight-invariant|cluster-based|"
                    "bernoulli");
    cmd->add_option("--p", p, "Treatment probability");
    cmd->add_option("--reps", reps, "Replicates")->check(CLI::PositiveNumber);
    cmd->add_option("--seed", seed, "Master seed");
    cmd->add_option("--threads", threads, "Worker threads")
        ->check(CLI::PositiveNumber);
    cmd->add_option("--y-low", y_low, "Override Y_L");
    cmd->add_option("--y-high", y_high, "Override Y_M");
    cmd->add_option("--remainder", remainder,
                    "Coefficient of the rho^2/(n p(1-p)) bound term");
    cmd->add_option("--kappa", kappa, "Growth constant for two-hop");
    cmd->add_option("--clustering", clustering,
                    "Clustering JSON replacing the computed one");
  }

  SimulationConfig config() const {
    SimulationConfig cfg;
    cfg.graph = graph.spec();
    cfg.design = parse_design(design);
    cfg.p = p;
    cfg.replicates = reps;
    cfg.seed = seed;
    cfg.threads = threads;
    cfg.bounds.y_low = y_low;
    cfg.bounds.y_high = y_high;
    cfg.bounds.remainder_coefficient = remainder;
    cfg.kappa = kappa;
    if (!clustering.empty()) {
      cfg.clustering =
          std::make_shared<const Clustering>(load_clustering(clustering));
    }
    return cfg;
  }

  CsvContext csv_context() const {
    CsvContext ctx;
    ctx.timing = timing;
    if (!graph.rgg.empty()) {
      ctx.r0 = graph.rgg[1];
      ctx.r1 = static_cast<std::size_t>(graph.rgg[2]);
    }
    return ctx;
  }
};

void run_simulate(const SimArgs& a) {
  const SimulationConfig cfg = a.config();
  const SimulationReport rep = run_simulation(cfg);
  if (!a.csv_out.empty()) {
    emit_text(csv_header() + "\n" + csv_row(rep, a.csv_context()) + "\n",
              a.csv_out);
  }
  if (!a.json_out.empty() || a.csv_out.empty()) {
    emit(to_json(rep, a.emit_samples, a.timing), a.json_out);
  }
}

// ---- scaling ---------------------------------------------------------------

struct ScalingArgs {
  SimArgs sim;
  std::vector<std::size_t> sizes{1000, 2000, 4000};
  double r0 = 4.0;
  std::size_t r1 = 0;
};

void run_scaling(const ScalingArgs& a) {
  SimArgs s = a.sim;
  s.graph.rgg = {static_cast<double>(a.sizes.front()), a.r0,
                 static_cast<double>(a.r1)};
  const SimulationConfig cfg = s.config();
  const ScalingTable t = scaling_study(cfg, a.sizes);
  Json rows = Json::array();
  std::ostringstream csv;
  csv << "n,mean,var,var_hat_upper\n";
  for (const auto& row : t.rows) {
    rows.push_back({{"n", row.n},
                    {"mean", row.mean},
                    {"var", row.variance},
                    {"var_hat_upper", number_or_null(row.var_hat_upper)}});
    csv << row.n << ',' << format_number(row.mean) << ','
        << format_number(row.variance) << ','
        << format_number(row.var_hat_upper) << '\n';
  }
  if (!a.sim.csv_out.empty()) emit_text(csv.str(), a.sim.csv_out);
  emit({{"design", a.sim.design},
        {"r0", a.r0},
        {"r1", a.r1},
        {"rows", rows},
        {"loglog_slope", t.slope ? Json(*t.slope) : Json(nullptr)}},
       a.sim.json_out);
}

// ---- table1 ----------------------------------------------------------------

struct Table1Args {
  std::vector<std::string> rows{"all"};
  std::size_t reps = 10000;
  std::string designs = "F,W";
  std::uint64_t seed = 0;
  std::uint64_t graph_seed = 1;
  std::size_t graph_seeds = 1;
  double y_high = 6.0;
  std::size_t threads = 1;
  std::string out;
  bool timing = false;
};

struct Table1Row {
  std::size_t n;
  double r0;
  std::size_t r1;
};

std::vector<Table1Row> table1_grid() {
  std::vector<Table1Row> rows;
  for (std::size_t n : {1000, 2000, 4000}) {
    for (auto [r0, r1] : std::vector<std::pair<double, std::size_t>>{
             {4, 0}, {2, 2}, {0, 4}, {16, 0}, {8, 8}, {0, 16}}) {
      rows.push_back({n, r0, r1});
    }
  }
  return rows;
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> parts;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, sep)) {
    if (!item.empty()) parts.push_back(item);
  }
  return parts;
}

std::vector<Table1Row> parse_rows(const std::vector<std::string>& specs) {
  std::vector<Table1Row> rows;
  for (const std::string& spec : specs) {
    for (const std::string& item : split(spec, ';')) {
      if (item == "all") {
        for (const auto& r : table1_grid()) rows.push_back(r);
        continue;
      }
      const auto parts = split(item, ',');
      if (parts.size() != 3) {
        throw std::invalid_argument("row '" + item + "' is not n,r0,r1");
      }
      try {
        rows.push_back({as_count(std::stod(parts[0]), "n"), std::stod(parts[1]),
                        as_count(std::stod(parts[2]), "r1")});
      } catch (const std::logic_error&) {
        throw std::invalid_argument("row '" + item + "' is not n,r0,r1");
      }
    }
  }
  return rows;
}

void run_table1(const Table1Args& a) {
  const auto rows = parse_rows(a.rows);
  std::vector<SimDesign> designs;
  for (const auto& d : split(a.designs, ',')) designs.push_back(parse_design(d));
  if (designs.empty()) throw std::invalid_argument("no designs selected");
  if (a.graph_seeds < 1) throw std::invalid_argument("--graph-seeds must be >= 1");
  std::ostringstream csv;
  csv << csv_header() << "\n";
  for (const Table1Row& row : rows) {
    for (std::size_t s = 0; s < a.graph_seeds; ++s) {
      GraphSpec spec;
      spec.kind = GraphSpec::Kind::kRgg;
      spec.n = row.n;
      spec.r0 = row.r0;
      spec.r1 = row.r1;
      spec.seed = a.graph_seed + s;
      const Instance inst = build_instance(spec);
      for (SimDesign d : designs) {
        SimulationConfig cfg;
        cfg.graph = spec;
        cfg.design = d;
        cfg.replicates = a.reps;
        cfg.seed = a.seed;
        cfg.threads = a.threads;
        cfg.keep_samples = false;
        cfg.bounds.y_high = a.y_high;
        const SimulationReport rep = run_simulation_on(inst, cfg);
        csv << csv_row(rep, {row.r0, row.r1, a.timing}) << "\n";
      }
    }
  }
  emit_text(csv.str(), a.out);
}

// ---- pipeline --------------------------------------------------------------

struct PipelineArgs {
  std::string config;
  bool dry_run = false;
  std::string out_dir;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> reps;
  std::optional<std::size_t> threads;
};

// Resolved pipeline plan. Precedence: command-line flags, then the config
// file, then built-in defaults. Relative paths are resolved against the
// config file's directory.
struct PipelinePlan {
  Json echo;
  fs::path out_dir;
  SimulationConfig sim;
  std::string design;
};

fs::path resolve_path(const fs::path& base, const std::string& p) {
  const fs::path path(p);
  return path.is_absolute() ? path : base / path;
}

PipelinePlan plan_pipeline(const PipelineArgs& a) {
  const fs::path cfg_path(a.config);
  const Json cfg = read_json_file(cfg_path);
  const fs::path base = cfg_path.parent_path();
  if (!cfg.is_object()) {
    throw std::invalid_argument("'" + a.config + "': config must be an object");
  }
  PipelinePlan plan;
  try {
    const std::string out_dir =
        !a.out_dir.empty() ? a.out_dir : cfg.value("out_dir", std::string("run"));
    plan.out_dir = a.out_dir.empty() ? resolve_path(base, out_dir)
                                     : fs::path(out_dir);

    const Json graph = cfg.at("graph");
    GraphSpec& gs = plan.sim.graph;
    gs.seed = graph.value("seed", std::uint64_t{1});
    gs.normalize = graph.value("normalize", false);
    if (graph.contains("rgg")) {
      const auto v = graph.at("rgg").get<std::vector<double>>();
      if (v.size() != 3) throw std::invalid_argument("graph.rgg needs [n, r0, r1]");
      gs.kind = GraphSpec::Kind::kRgg;
      gs.n = as_count(v[0], "n");
      gs.r0 = v[1];
      gs.r1 = as_count(v[2], "r1");
    } else if (graph.contains("cycle")) {
      const auto v = graph.at("cycle").get<std::vector<std::size_t>>();
      if (v.size() != 3) throw std::invalid_argument("graph.cycle needs [n, d, kappa]");
      gs.kind = GraphSpec::Kind::kCycle;
      gs.n = v[0];
      gs.d = v[1];
      gs.kappa = v[2];
    } else if (graph.contains("file")) {
      const fs::path f = resolve_path(base, graph.at("file").get<std::string>());
      if (!fs::exists(f)) {
        throw std::invalid_argument("graph file '" + f.string() + "' not found");
      }
      gs.kind = GraphSpec::Kind::kProvided;
      gs.graph = std::make_shared<const InterferenceGraph>(load_graph(f));
    } else {
      throw std::invalid_argument("graph needs one of rgg, cycle, file");
    }
    if (cfg.contains("model") && cfg["model"].contains("file")) {
      const fs::path f =
          resolve_path(base, cfg["model"].at("file").get<std::string>());
      if (!fs::exists(f)) {
        throw std::invalid_argument("model file '" + f.string() + "' not found");
      }
      if (gs.kind != GraphSpec::Kind::kProvided) {
        throw std::invalid_argument("a model file needs a graph file");
      }
      gs.model = std::make_shared<const OutcomeModel>(load_model(f));
      gs.model->check_against(*gs.graph);
    }

    const Json sim = cfg.value("simulation", Json::object());
    plan.design = sim.value("design", std::string("fixed-greedy"));
    plan.sim.design = parse_design(plan.design);
    plan.sim.p = sim.value("p", 0.5);
    plan.sim.replicates = sim.value("reps", std::size_t{1000});
    plan.sim.seed = sim.value("seed", cfg.value("seed", std::uint64_t{0}));
    plan.sim.threads = sim.value("threads", std::size_t{1});
    if (sim.contains("y_low")) plan.sim.bounds.y_low = sim["y_low"].get<double>();
    if (sim.contains("y_high")) plan.sim.bounds.y_high = sim["y_high"].get<double>();
    plan.sim.bounds.remainder_coefficient = sim.value("remainder", 0.0);
    plan.sim.kappa = sim.value("kappa", 0.0);

    if (cfg.contains("clustering") && cfg["clustering"].contains("file")) {
      const fs::path f =
          resolve_path(base, cfg["clustering"].at("file").get<std::string>());
      if (!fs::exists(f)) {
        throw std::invalid_argument("clustering file '" + f.string() +
                                    "' not found");
      }
      if (!uses_fixed_clustering(plan.sim.design)) {
        throw std::invalid_argument("design '" + plan.design +
                                    "' does not take a clustering file");
      }
      plan.sim.clustering = std::make_shared<const Clustering>(load_clustering(f));
    }
  } catch (const Json::exception& e) {
    throw std::invalid_argument("'" + a.config + "': " + e.what());
  } catch (const IoError& e) {
    // A referenced file that cannot be read is a configuration error.
    throw std::invalid_argument("'" + a.config + "': " + e.what());
  }
  if (a.seed) plan.sim.seed = *a.seed;
  if (a.reps) plan.sim.replicates = *a.reps;
  if (a.threads) plan.sim.threads = *a.threads;
  if (plan.sim.replicates < 1) throw std::invalid_argument("reps must be >= 1");
  if (!(plan.sim.p > 0.0 && plan.sim.p < 1.0)) {
    throw std::invalid_argument("p must lie in (0, 1)");
  }
  plan.echo = cfg;
  plan.echo["out_dir"] = plan.out_dir.string();
  plan.echo["simulation"]["design"] = plan.design;
  plan.echo["simulation"]["p"] = plan.sim.p;
  plan.echo["simulation"]["reps"] = plan.sim.replicates;
  plan.echo["simulation"]["seed"] = plan.sim.seed;
  plan.echo["simulation"]["threads"] = plan.sim.threads;
  return plan;
}

// Removes what a failed run wrote.
class OutputTracker {
 public:
  explicit OutputTracker(fs::path dir) : dir_(std::move(dir)) {}
  ~OutputTracker() {
    if (committed_) return;
    std::error_code ec;
    for (const auto& f : files_) fs::remove(f, ec);
    if (created_dir_) fs::remove(dir_, ec);
  }
  void prepare() {
    if (!fs::exists(dir_)) {
      std::error_code ec;
      fs::create_directories(dir_, ec);
      if (ec) throw IoError("cannot create '" + dir_.string() + "'");
      created_dir_ = true;
    }
  }
  fs::path file(const std::string& name) {
    files_.push_back(dir_ / name);
    return files_.back();
  }
  const std::vector<fs::path>& files() const { return files_; }
  void commit() { committed_ = true; }

 private:
  fs::path dir_;
  std::vector<fs::path> files_;
  bool created_dir_ = false;
  bool committed_ = false;
};

void run_pipeline(const PipelineArgs& a) {
  const PipelinePlan plan = plan_pipeline(a);
  if (a.dry_run) {
    std::cout << Json{{"valid", true}, {"plan", plan.echo}}.dump(2) << "\n";
    return;
  }
  const auto t0 = std::chrono::steady_clock::now();
  OutputTracker out(plan.out_dir);
  out.prepare();

  const Instance inst = build_instance(plan.sim.graph);
  write_json_file(out.file("graph.json"), to_json(inst.graph));
  write_json_file(out.file("model.json"), to_json(inst.model));
  SimulationConfig sim = plan.sim;
  if (uses_fixed_clustering(sim.design)) {
    const Clustering c = fixed_clustering_for(inst, sim);
    Json cj = to_json(c);
    cj["stats"] = to_json(partition_stats(inst.graph, c));
    write_json_file(out.file("clustering.json"), cj);
    sim.clustering = std::make_shared<const Clustering>(c);
  }
  const SimulationReport rep = run_simulation_on(inst, sim);
  write_json_file(out.file("report.json"), to_json(rep, true, false));
  CsvContext ctx;
  if (sim.graph.kind == GraphSpec::Kind::kRgg) {
    ctx.r0 = sim.graph.r0;
    ctx.r1 = sim.graph.r1;
  }
  write_text_file(out.file("report.csv"),
                  csv_header() + "\n" + csv_row(rep, ctx) + "\n");

  Json outputs = Json::array();
  for (const auto& f : out.files()) {
    outputs.push_back({{"path", f.filename().string()},
                       {"fnv1a64", file_digest(f)}});
  }
  const double wall = std::chrono::duration<double>(
                          std::chrono::steady_clock::now() - t0)
                          .count();
  const Json manifest = {
      {"config", plan.echo},
      {"versions",
       {{"mixedrand", MIXEDRAND_VERSION},
        {"nlohmann_json", std::to_string(NLOHMANN_JSON_VERSION_MAJOR) + "." +
                              std::to_string(NLOHMANN_JSON_VERSION_MINOR) +
                              "." +
                              std::to_string(NLOHMANN_JSON_VERSION_PATCH)},
        {"cli11", CLI11_VERSION}}},
      {"seed", sim.seed},
      {"wall_clock_s", wall},
      {"outputs", outputs}};
  write_json_file(out.file("manifest.json"), manifest);
  out.commit();
  std::cout << (plan.out_dir / "manifest.json").string() << "\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Mixed randomization designs for experiments under network "
               "interference"};
  app.require_subcommand(1);
  app.set_version_flag("--version", MIXEDRAND_VERSION);

  GenGraphArgs gen;
  auto* gen_cmd = app.add_subcommand("gen-graph", "Generate a graph and model");
  gen.graph.add_to(gen_cmd, false, "--seed");
  gen_cmd->add_option("--out", gen.out, "Graph JSON output (default stdout)");
  gen_cmd->add_option("--stats", gen.stats_out,
                      "Stats sidecar (default <out>.stats.json)");
  gen_cmd->add_option("--model-out", gen.model_out, "Outcome model output");
  gen_cmd->add_option("--growth-radius", gen.growth_radius,
                      "Largest radius in the growth constant (0: all)");

  ClusterArgs cl;
  auto* cl_cmd = app.add_subcommand("cluster", "Cluster a graph");
  cl_cmd->add_option("--graph", cl.graph, "Graph JSON")->required();
  cl_cmd->add_option("--model", cl.model, "Outcome model, for Y_L and Y_M");
  cl_cmd->add_option("--algo", cl.algo,
                     "greedy|two-hop|weight-invariant|singleton|whole");
  cl_cmd->add_option("--p", cl.p, "Treatment probability");
  cl_cmd->add_option("--y-low", cl.y_low, "Y_L");
  cl_cmd->add_option("--y-high", cl.y_high, "Y_M");
  cl_cmd->add_option("--kappa", cl.kappa, "Growth constant for two-hop");
  cl_cmd->add_option("--seed", cl.seed, "Seed for weight-invariant sampling");
  cl_cmd->add_option("--out", cl.out, "Output (default stdout)");

  AssignArgs as;
  auto* as_cmd = app.add_subcommand("assign", "Draw a treatment assignment");
  as_cmd->add_option("--clustering", as.clustering, "Clustering JSON");
  as_cmd->add_option("--n", as.n, "Unit count (bernoulli)");
  as_cmd->add_option("--design", as.design, "mixed|cluster-based|bernoulli");
  as_cmd->add_option("--p", as.p, "Treatment probability");
  as_cmd->add_option("--seed", as.seed, "Seed");
  as_cmd->add_option("--out", as.out, "Output (default stdout)");

  EstimateArgs es;
  auto* es_cmd = app.add_subcommand("estimate", "Estimate the ATE");
  es_cmd->add_option("--graph", es.graph, "Graph JSON")->required();
  es_cmd->add_option("--model", es.model, "Outcome model JSON")->required();
  es_cmd->add_option("--assignment", es.assignment, "Assignment JSON")
      ->required();
  es_cmd->add_option("--clustering", es.clustering, "Clustering JSON");
  es_cmd->add_option("--estimator", es.estimator, "mixed|ht");
  es_cmd->add_option("--rho", es.rho, "Override rho");
  std::uint64_t unused_seed = 0;  // estimation draws nothing
  es_cmd->add_option("--seed", unused_seed)->group("");
  es_cmd->add_option("--out", es.out, "Output (default stdout)");

  BoundsArgs bo;
  auto* bo_cmd = app.add_subcommand("bounds", "Variance bounds of a clustering");
  bo_cmd->add_option("--graph", bo.graph, "Graph JSON")->required();
  bo_cmd->add_option("--clustering", bo.clustering, "Clustering JSON")
      ->required();
  bo_cmd->add_option("--model", bo.model, "Outcome model JSON");
  bo_cmd->add_option("--p", bo.p, "Treatment probability");
  bo_cmd->add_option("--y-low", bo.y_low, "Y_L");
  bo_cmd->add_option("--y-high", bo.y_high, "Y_M");
  bo_cmd->add_option("--gamma", bo.gamma, "Interference strength");
  bo_cmd->add_option("--rho", bo.rho, "Override rho");
  bo_cmd->add_option("--remainder", bo.remainder,
                     "Coefficient of the rho^2/(n p(1-p)) term");
  bo_cmd->add_option("--out", bo.out, "Output (default stdout)");

  SimArgs sim;
  auto* sim_cmd = app.add_subcommand("simulate", "Monte Carlo simulation");
  sim.add_to(sim_cmd);
  sim_cmd->add_option("--json", sim.json_out, "JSON report (default stdout)");
  sim_cmd->add_option("--csv", sim.csv_out, "CSV report");
  sim_cmd->add_flag("--emit-samples", sim.emit_samples,
                    "Include per-replicate estimates in the JSON report");
  sim_cmd->add_flag("--timing", sim.timing, "Report wall time");

  ScalingArgs sc;
  auto* sc_cmd = app.add_subcommand("scaling", "Variance against n on RGGs");
  sc_cmd->add_option("--sizes", sc.sizes, "Graph sizes")->delimiter(',');
  sc_cmd->add_option("--r0", sc.r0, "Expected short-range degree");
  sc_cmd->add_option("--r1", sc.r1, "Long-range links per unit");
  sc_cmd->add_option("--graph-seed", sc.sim.graph.graph_seed, "Graph seed");
  sc_cmd->add_option("--design", sc.sim.design, "Design");
  sc_cmd->add_option("--p", sc.sim.p, "Treatment probability");
  sc_cmd->add_option("--reps", sc.sim.reps, "Replicates")
      ->check(CLI::PositiveNumber);
  sc_cmd->add_option("--seed", sc.sim.seed, "Master seed");
  sc_cmd->add_option("--threads", sc.sim.threads, "Worker threads")
      ->check(CLI::PositiveNumber);
  sc_cmd->add_option("--y-high", sc.sim.y_high, "Override Y_M");
  sc_cmd->add_option("--json", sc.sim.json_out, "JSON output (default stdout)");
  sc_cmd->add_option("--csv", sc.sim.csv_out, "CSV output");

  Table1Args t1;
  auto* t1_cmd = app.add_subcommand("table1", "Desk-scale simulation grid");
  t1_cmd->add_option("--rows", t1.rows,
                     "Rows as n,r0,r1 (';'-separated or repeated), or all");
  t1_cmd->add_option("--reps", t1.reps, "Replicates")
      ->check(CLI::PositiveNumber);
  t1_cmd->add_option("--designs", t1.designs, "Comma-separated designs");
  t1_cmd->add_option("--seed", t1.seed, "Master seed");
  t1_cmd->add_option("--graph-seed", t1.graph_seed, "First graph seed");
  t1_cmd->add_option("--graph-seeds", t1.graph_seeds, "Graph seeds per row");
  t1_cmd->add_option("--y-high", t1.y_high, "Y_M used by the bounds");
  t1_cmd->add_option("--threads", t1.threads, "Worker threads")
      ->check(CLI::PositiveNumber);
  t1_cmd->add_option("--out", t1.out, "CSV output (default stdout)");
  t1_cmd->add_flag("--timing", t1.timing, "Fill the wall_time_s column");

  PipelineArgs pl;
  auto* pl_cmd = app.add_subcommand("pipeline", "Generate, cluster, simulate");
  pl_cmd->add_option("--config", pl.config, "Pipeline JSON config")
      ->required();
  pl_cmd->add_flag("--dry-run", pl.dry_run, "Validate only, write nothing");
  pl_cmd->add_option("--out-dir", pl.out_dir, "Override out_dir");
  pl_cmd->add_option("--seed", pl.seed, "Override the master seed");
  pl_cmd->add_option("--reps", pl.reps, "Override the replicate count");
  pl_cmd->add_option("--threads", pl.threads, "Override worker threads");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    if (code == 0) return 0;
    const auto subs = app.get_subcommands();
    std::cerr << "\n" << (subs.empty() ? app.help() : subs.front()->help());
    return kExitUsage;
  }

  try {
    if (*gen_cmd) run_gen_graph(gen);
    if (*cl_cmd) run_cluster(cl);
    if (*as_cmd) run_assign(as);
    if (*es_cmd) run_estimate(es);
    if (*bo_cmd) run_bounds(bo);
    if (*sim_cmd) run_simulate(sim);
    if (*sc_cmd) run_scaling(sc);
    if (*t1_cmd) run_table1(t1);
    if (*pl_cmd) run_pipeline(pl);
  } catch (const IoError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitIo;
  } catch (const NumericalError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitNumerical;
  } catch (const std::domain_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitNumerical;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::out_of_range& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
