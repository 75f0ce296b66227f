// Command-line front end: generate, cluster and bench subcommands.
//
// Exit codes: 0 success, 1 runtime failure, 2 usage or validation error.
#pragma once

#include <atomic>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <mutex>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "fairad/baseline.hpp"
#include "fairad/fairad.hpp"
#include "fairad/io.hpp"
#include "fairad/metrics.hpp"
#include "fairad/msbm.hpp"

namespace fairad::cli {

namespace fs = std::filesystem;

enum ExitCode : int { kOk = 0, kRuntime = 1, kUsage = 2 };

struct GenerateArgs {
  index_t n = 0, h = 2, k = 2;
  std::optional<double> a, b, c, d;
  std::uint64_t seed = 0;
  fs::path out;
};

struct RunConfig {
  std::string method = "fairad";
  index_t k = 0;
  double mu = 1e9;
  double alpha = 1e-4;
  int R = 10;
  int tau = 10;
  std::optional<double> beta;  // resolved from the post-LCC n when unset
  index_t m = 30;
  std::uint64_t seed = 0;
  double tol = 1e-8;
  std::size_t jobs = 1;
  fs::path edges, groups, truth, out = ".";
  bool dump_test_vectors = false;
  bool dump_hierarchy = false;
  bool dump_anchors = false;

  FairadConfig fairad_config(double resolved_beta) const {
    FairadConfig cfg;
    cfg.set_seed(seed);
    cfg.set_mu(mu);
    cfg.relaxation.num_vectors = R;
    cfg.relaxation.iterations = tau;
    cfg.relaxation.beta = resolved_beta;
    cfg.relaxation.jobs = jobs;
    cfg.coarsening.alpha = alpha;
    cfg.anchors.m = m;
    cfg.anchors.k = k;
    cfg.solve.tol = tol;
    cfg.solve.jobs = jobs;
    return cfg;
  }

  SCConfig sc_config() const {
    SCConfig cfg;
    cfg.k = k;
    cfg.set_seed(seed);
    return cfg;
  }

  void validate() const {
    if (method != "fairad" && method != "sc")
      throw ValidationError("--method must be fairad or sc");
    if (k < 2) throw ValidationError("--k must be >= 2");
    if (edges.empty()) throw ValidationError("--edges is required");
    if (method == "fairad" && groups.empty())
      throw ValidationError("--groups is required for method fairad");
    if (beta && !(*beta > 0.0)) throw ValidationError("--beta must be positive");
    if (!(tol > 0.0)) throw ValidationError("--tol must be positive");
    if (method == "fairad") {
      auto cfg = fairad_config(1.0);
      cfg.relaxation.validate();
      cfg.coarsening.validate();
      cfg.anchors.validate();
    }
  }

  nlohmann::json to_json(double resolved_beta, index_t n) const {
    nlohmann::json j = {{"method", method}, {"k", k},         {"mu", mu},
                        {"alpha", alpha},   {"R", R},         {"tau", tau},
                        {"beta", resolved_beta},              {"beta_from_default", !beta},
                        {"m", m},           {"seed", seed},   {"tol", tol},
                        {"n_after_lcc", n}, {"edges", edges.string()}};
    j["groups"] = groups.empty() ? nlohmann::json(nullptr) : nlohmann::json(groups.string());
    j["truth"] = truth.empty() ? nlohmann::json(nullptr) : nlohmann::json(truth.string());
    return j;
  }
};

struct BenchArgs {
  std::vector<index_t> n, h, k;
  std::vector<std::uint64_t> seeds;
  std::vector<std::string> methods = {"fairad", "sc"};
  std::size_t jobs = 1;
  fs::path out;
};

struct BenchRow {
  index_t n = 0, h = 0, k = 0;
  std::uint64_t seed = 0;
  std::string method;
  std::optional<double> error_rate, average_balance;
  double runtime_ms = 0.0;
  std::string status = "ok";
};

namespace detail {

inline void write_json(const nlohmann::json& j, const fs::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out << j.dump(2) << '\n';
  if (!out) throw IoError("write failed: " + path.string());
}

inline void ensure_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create " + dir.string() + ": " + ec.message());
}

inline std::string csv_value(const std::optional<double>& v) {
  return v ? format_double(*v) : std::string();
}

/// Raw labels renumbered 0.. in ascending order of value.
inline std::vector<index_t> dense_labels(std::span<const long long> raw, index_t* count) {
  std::set<long long> values(raw.begin(), raw.end());
  std::map<long long, index_t> id;
  for (long long v : values) id.emplace(v, static_cast<index_t>(id.size()));
  std::vector<index_t> out;
  out.reserve(raw.size());
  for (long long v : raw) out.push_back(id.at(v));
  if (count) *count = static_cast<index_t>(values.size());
  return out;
}

inline std::size_t jobs_from_env() {
  if (const char* s = std::getenv("FAIRAD_JOBS")) {
    const long v = std::strtol(s, nullptr, 10);
    if (v > 0) return static_cast<std::size_t>(v);
  }
  return 1;
}

}  // namespace detail

inline int cmd_generate(const GenerateArgs& args, std::ostream& log) {
  MsbmConfig cfg;
  cfg.n = args.n;
  cfg.h = args.h;
  cfg.k = args.k;
  cfg.a = args.a;
  cfg.b = args.b;
  cfg.c = args.c;
  cfg.d = args.d;
  cfg.seed = args.seed;
  cfg.validate();
  const auto inst = msbm_generate(cfg);
  write_instance(inst, args.out);
  const auto [pa, pb, pc, pd] = cfg.probabilities();
  nlohmann::json manifest = {{"command", "generate"},
                             {"n", cfg.n},
                             {"h", cfg.h},
                             {"k", cfg.k},
                             {"a", pa},
                             {"b", pb},
                             {"c", pc},
                             {"d", pd},
                             {"seed", cfg.seed},
                             {"num_edges", inst.graph.num_edges()},
                             {"files", {"edges.tsv", "groups.txt", "truth.txt"}}};
  detail::write_json(manifest, args.out / "manifest.json");
  log << "wrote " << inst.graph.num_edges() << " edges to " << args.out.string() << '\n';
  return kOk;
}

inline int cmd_cluster(const RunConfig& run, std::ostream& log) {
  run.validate();
  Stopwatch total;
  std::map<std::string, double> timings;

  Stopwatch sw;
  auto file = load_edge_list(run.edges);
  SparseGraph g = std::move(file.graph);
  std::optional<std::vector<long long>> groups_raw, truth_raw;
  if (!run.groups.empty()) groups_raw = load_node_labels(run.groups);
  if (!run.truth.empty()) truth_raw = load_node_labels(run.truth);
  // Label files may list trailing nodes that never appear in an edge.
  index_t n_files = g.size();
  for (const auto* raw : {&groups_raw, &truth_raw})
    if (*raw) n_files = std::max<index_t>(n_files, static_cast<index_t>((*raw)->size()));
  if (n_files > g.size()) {
    const auto edges = g.edges();
    g = SparseGraph::from_edges(n_files, edges);
  }
  if (groups_raw && static_cast<index_t>(groups_raw->size()) != g.size())
    throw ValidationError("group file has " + std::to_string(groups_raw->size()) +
                          " rows but the graph has " + std::to_string(g.size()) + " nodes");
  if (truth_raw && static_cast<index_t>(truth_raw->size()) != g.size())
    throw ValidationError("truth file has " + std::to_string(truth_raw->size()) +
                          " rows but the graph has " + std::to_string(g.size()) + " nodes");
  timings["load"] = sw.elapsed_ms();

  sw.reset();
  const Subgraph lcc = largest_connected_component(g);
  const SparseGraph& graph = lcc.graph;
  const index_t n = graph.size();
  timings["lcc"] = sw.elapsed_ms();
  if (n < run.k) throw ValidationError("largest component has fewer nodes than k");

  std::optional<GroupPartition> groups;
  if (groups_raw) {
    const auto kept = lcc.filter(*groups_raw);
    groups = GroupPartition::from_raw(kept);
  }
  std::optional<std::vector<index_t>> truth;
  if (truth_raw) {
    index_t distinct = 0;
    truth = detail::dense_labels(lcc.filter(*truth_raw), &distinct);
    if (distinct > run.k)
      throw ValidationError("truth has " + std::to_string(distinct) + " labels, more than k");
  }

  const double beta = run.beta ? *run.beta : default_beta(n);
  detail::ensure_dir(run.out);
  save_id_map(lcc.new_to_old, run.out / "component_map.csv");
  nlohmann::json manifest = {{"command", "cluster"}, {"config", run.to_json(beta, n)},
                             {"nodes_in_input", g.size()},
                             {"self_loops_dropped", file.self_loops_dropped}};
  detail::write_json(manifest, run.out / "manifest.json");

  ClusterAssignment assignment;
  nlohmann::json diagnostics;
  if (run.method == "fairad") {
    if (groups->num_groups() < 2)
      throw ValidationError("fairad needs at least two groups in the largest component");
    const auto res = run_fairad(graph, *groups, run.k, run.fairad_config(beta));
    assignment = res.assignment;
    diagnostics = res.diagnostics.to_json();
    for (const auto& [name, ms] : res.diagnostics.timings_ms)
      if (name != "total") timings[name] = ms;
    if (run.dump_test_vectors) {
      std::ofstream out(run.out / "test_vectors.csv", std::ios::binary);
      out << "node_id";
      for (int r = 0; r < res.test_vectors.count(); ++r) out << ",x" << r;
      out << '\n';
      for (index_t i = 0; i < n; ++i) {
        out << lcc.new_to_old[i];
        for (double v : res.test_vectors.node(i)) out << ',' << format_double(v);
        out << '\n';
      }
    }
    if (run.dump_hierarchy) detail::write_json(res.diagnostics.hierarchy, run.out / "hierarchy.json");
    if (run.dump_anchors) {
      std::ofstream out(run.out / "anchors.csv", std::ios::binary);
      out << "node_id,cluster\n";
      for (std::size_t t = 0; t < res.anchors.size(); ++t)
        out << lcc.new_to_old[res.anchors.rep_nodes[t]] << ',' << res.anchors.rep_labels[t] << '\n';
    }
  } else {
    sw.reset();
    assignment = run_sc(graph, run.sc_config());
    timings["sc"] = sw.elapsed_ms();
    diagnostics = {{"timings_ms", {{"sc", timings["sc"]}}}};
  }
  timings["total"] = total.elapsed_ms();

  save_cluster_labels(assignment.labels, lcc.new_to_old, run.out / "labels.csv");
  std::optional<std::span<const index_t>> truth_span;
  if (truth) truth_span = std::span<const index_t>(*truth);
  const auto report = compile_report(assignment.labels, run.k, graph,
                                     groups ? &*groups : nullptr, truth_span, timings);
  detail::write_json(report.to_json(), run.out / "metrics.json");
  detail::write_json(diagnostics, run.out / "diagnostics.json");

  log << run.method << ": n=" << n << " k=" << run.k;
  if (report.error_rate) log << " error_rate=" << format_double(*report.error_rate);
  if (report.average_balance) log << " average_balance=" << format_double(*report.average_balance);
  log << " time_ms=" << format_double(timings["total"]) << '\n';
  return kOk;
}

/// One (n, h, k, seed, method) cell on the LCC of a fresh mSBM instance.
inline BenchRow bench_cell(index_t n, index_t h, index_t k, std::uint64_t seed,
                           const std::string& method) {
  BenchRow row{n, h, k, seed, method};
  try {
    MsbmConfig mc;
    mc.n = n;
    mc.h = h;
    mc.k = k;
    mc.seed = seed;
    const auto inst = msbm_generate(mc);
    Stopwatch sw;
    const Subgraph lcc = largest_connected_component(inst.graph);
    const auto groups = GroupPartition::from_raw(
        lcc.filter(std::vector<long long>(inst.groups.groups().begin(), inst.groups.groups().end())));
    const auto truth = lcc.filter(inst.truth);
    ClusterAssignment a;
    if (method == "fairad") {
      FairadConfig cfg;
      cfg.set_seed(seed);
      a = run_fairad(lcc.graph, groups, k, cfg).assignment;
    } else if (method == "sc") {
      SCConfig cfg;
      cfg.k = k;
      cfg.set_seed(seed);
      a = run_sc(lcc.graph, cfg);
    } else {
      throw ValidationError("unknown method " + method);
    }
    row.runtime_ms = sw.elapsed_ms();
    row.error_rate = error_rate(a.labels, truth, k);
    row.average_balance = average_balance(groups, a.labels, k).average;
  } catch (const std::exception& e) {
    row.status = std::string("error: ") + e.what();
    for (char& ch : row.status)
      if (ch == ',' || ch == '\n') ch = ';';
  }
  return row;
}

inline int cmd_bench(const BenchArgs& args, std::ostream& log) {
  if (args.n.empty() || args.h.empty() || args.k.empty() || args.seeds.empty())
    throw ValidationError("bench needs at least one value for each of --n, --h, --k, --seeds");
  for (const auto& m : args.methods)
    if (m != "fairad" && m != "sc") throw ValidationError("unknown method " + m);
  std::vector<BenchRow> rows;
  for (index_t n : args.n)
    for (index_t h : args.h)
      for (index_t k : args.k)
        for (std::uint64_t s : args.seeds)
          for (const auto& m : args.methods) rows.push_back({n, h, k, s, m});

  detail::ensure_dir(args.out);
  std::mutex sink;
  std::atomic<std::size_t> done{0};
  parallel_for(rows.size(), std::max<std::size_t>(1, args.jobs), [&](std::size_t i) {
    BenchRow r = bench_cell(rows[i].n, rows[i].h, rows[i].k, rows[i].seed, rows[i].method);
    std::lock_guard<std::mutex> lock(sink);
    rows[i] = std::move(r);
    log << '[' << ++done << '/' << rows.size() << "] n=" << rows[i].n << " h=" << rows[i].h
        << " k=" << rows[i].k << " seed=" << rows[i].seed << ' ' << rows[i].method << ' '
        << rows[i].status << '\n';
  });

  std::ofstream res(args.out / "results.csv", std::ios::binary);
  res << "n,h,k,seed,method,error_rate,average_balance,runtime_ms,status\n";
  for (const auto& r : rows)
    res << r.n << ',' << r.h << ',' << r.k << ',' << r.seed << ',' << r.method << ','
        << detail::csv_value(r.error_rate) << ',' << detail::csv_value(r.average_balance) << ','
        << format_double(r.runtime_ms) << ',' << r.status << '\n';

  // per-cell means over successful rows
  struct Acc {
    std::size_t runs = 0, failures = 0;
    double err = 0, bal = 0, ms = 0;
  };
  std::map<std::tuple<index_t, index_t, index_t, std::string>, Acc> cells;
  std::vector<std::tuple<index_t, index_t, index_t, std::string>> order;
  for (const auto& r : rows) {
    auto key = std::make_tuple(r.n, r.h, r.k, r.method);
    auto [it, fresh] = cells.try_emplace(key);
    if (fresh) order.push_back(key);
    auto& acc = it->second;
    if (r.status != "ok") {
      ++acc.failures;
      continue;
    }
    ++acc.runs;
    acc.err += *r.error_rate;
    acc.bal += *r.average_balance;
    acc.ms += r.runtime_ms;
  }
  std::ofstream sum(args.out / "summary.csv", std::ios::binary);
  sum << "n,h,k,method,runs,failures,mean_error_rate,mean_average_balance,mean_runtime_ms\n";
  for (const auto& key : order) {
    const auto& acc = cells.at(key);
    const auto mean = [&](double s) -> std::optional<double> {
      if (acc.runs == 0) return std::nullopt;
      return s / static_cast<double>(acc.runs);
    };
    sum << std::get<0>(key) << ',' << std::get<1>(key) << ',' << std::get<2>(key) << ','
        << std::get<3>(key) << ',' << acc.runs << ',' << acc.failures << ','
        << detail::csv_value(mean(acc.err)) << ',' << detail::csv_value(mean(acc.bal)) << ','
        << detail::csv_value(mean(acc.ms)) << '\n';
  }
  if (!res || !sum) throw IoError("failed writing bench output under " + args.out.string());
  return kOk;
}

/// Parses argv and dispatches. Errors go to `err`, progress to `out`.
inline int run(int argc, const char* const* argv, std::ostream& out = std::cout,
               std::ostream& err = std::cerr) {
  CLI::App app{"Fair graph clustering with algebraic distance"};
  app.require_subcommand(1);
  // -h would collide with --h (group count)
  app.set_help_flag("--help", "print help");

  GenerateArgs gen;
  auto* g = app.add_subcommand("generate", "write a synthetic mSBM instance");
  g->set_help_flag("--help", "print help");
  g->add_option("--n", gen.n, "number of nodes")->required();
  g->add_option("--h", gen.h, "number of groups");
  g->add_option("--k", gen.k, "number of clusters");
  g->add_option("--a", gen.a, "same group, same cluster probability");
  g->add_option("--b", gen.b, "same group, different cluster probability");
  g->add_option("--c", gen.c, "different group, same cluster probability");
  g->add_option("--d", gen.d, "different group, different cluster probability");
  g->add_option("--seed", gen.seed);
  g->add_option("--out", gen.out, "output directory")->required();

  RunConfig run_cfg;
  run_cfg.jobs = detail::jobs_from_env();
  double beta = 0.0;
  auto* c = app.add_subcommand("cluster", "cluster a graph");
  c->set_help_flag("--help", "print help");
  c->add_option("--method", run_cfg.method)->check(CLI::IsMember({"fairad", "sc"}));
  c->add_option("--k", run_cfg.k, "number of clusters")->required();
  c->add_option("--edges", run_cfg.edges, "edge list")->required();
  c->add_option("--groups", run_cfg.groups, "per-node group labels");
  c->add_option("--truth", run_cfg.truth, "per-node planted labels");
  c->add_option("--out", run_cfg.out, "output directory");
  c->add_option("--mu", run_cfg.mu);
  c->add_option("--alpha", run_cfg.alpha);
  c->add_option("--R", run_cfg.R, "number of test vectors");
  c->add_option("--tau", run_cfg.tau, "Jacobi iterations per test vector");
  auto* beta_opt = c->add_option("--beta", beta, "distance scale (default n / ln n)");
  c->add_option("--m", run_cfg.m, "minimum anchor count");
  c->add_option("--seed", run_cfg.seed);
  c->add_option("--tol", run_cfg.tol);
  c->add_option("--jobs", run_cfg.jobs);
  c->add_flag("--dump-test-vectors", run_cfg.dump_test_vectors);
  c->add_flag("--dump-hierarchy", run_cfg.dump_hierarchy);
  c->add_flag("--dump-anchors", run_cfg.dump_anchors);

  BenchArgs bench;
  bench.jobs = detail::jobs_from_env();
  auto* b = app.add_subcommand("bench", "sweep mSBM cells with both methods");
  b->set_help_flag("--help", "print help");
  b->add_option("--n", bench.n)->required();
  b->add_option("--h", bench.h)->required();
  b->add_option("--k", bench.k)->required();
  b->add_option("--seeds", bench.seeds)->required();
  b->add_option("--methods", bench.methods);
  b->add_option("--jobs", bench.jobs);
  b->add_option("--out", bench.out)->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    app.exit(e, out, err);
    return kUsage;
  }

  try {
    if (*g) return cmd_generate(gen, out);
    if (*c) {
      if (*beta_opt) run_cfg.beta = beta;
      return cmd_cluster(run_cfg, out);
    }
    return cmd_bench(bench, out);
  } catch (const ValidationError& e) {
    err << "error: " << e.what() << '\n';
    return kUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kRuntime;
  }
}

}  // namespace fairad::cli
