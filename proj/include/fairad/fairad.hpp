// End-to-end fair clustering: constrained test vectors -> algebraic
// affinity -> coarsening -> anchors on a coarse level -> anchored solves
// -> argmax labels.
#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "fairad/algebraic_distance.hpp"
#include "fairad/anchors.hpp"
#include "fairad/assignment.hpp"
#include "fairad/coarsening.hpp"
#include "fairad/common.hpp"
#include "fairad/fairness.hpp"
#include "fairad/graph.hpp"
#include "fairad/solver.hpp"

namespace fairad {

struct FairadConfig {
  RelaxationConfig relaxation;
  CoarseningConfig coarsening;
  AnchorConfig anchors;
  SolveConfig solve;

  /// Points every random sub-stream at one root seed.
  void set_seed(std::uint64_t seed) {
    relaxation.seed = seed;
    anchors.kmeans.seed = seed;
    anchors.eigen.seed = seed;
  }
  /// mu is shared by the relaxation and the anchored solve.
  void set_mu(double mu) {
    relaxation.mu = mu;
    solve.mu = mu;
  }
};

struct FairadDiagnostics {
  std::map<std::string, double> timings_ms;
  std::vector<double> fairness_residuals;
  std::vector<index_t> level_sizes;
  std::size_t selected_level = 0;
  std::size_t num_anchors = 0;
  std::vector<std::size_t> solver_iterations;
  std::vector<double> solver_residuals;
  double beta = 0.0;
  nlohmann::json hierarchy;

  nlohmann::json to_json() const {
    return {{"timings_ms", timings_ms},
            {"fairness_residuals", fairness_residuals},
            {"level_sizes", level_sizes},
            {"selected_level", selected_level},
            {"num_anchors", num_anchors},
            {"solver_iterations", solver_iterations},
            {"solver_residuals", solver_residuals},
            {"beta", beta},
            {"hierarchy", hierarchy}};
  }
};

struct FairadResult {
  ClusterAssignment assignment;
  FairadDiagnostics diagnostics;
  TestVectorSet test_vectors;
  AnchorSet anchors;
};

namespace detail {

template <typename Fn>
auto run_stage(const char* name, FairadDiagnostics& diag, Fn&& fn) {
  Stopwatch sw;
  try {
    if constexpr (std::is_void_v<decltype(fn())>) {
      fn();
      diag.timings_ms[name] = sw.elapsed_ms();
    } else {
      auto out = fn();
      diag.timings_ms[name] = sw.elapsed_ms();
      return out;
    }
  } catch (const StageError&) {
    throw;
  } catch (const ValidationError& e) {
    // bad input stays a validation error so callers can report it as such
    throw ValidationError(std::string(name) + ": " + e.what());
  } catch (const std::exception& e) {
    throw StageError(name, e.what());
  }
}

}  // namespace detail

/// Requires a connected graph (positive degrees), h >= 2 and k >= 2.
/// A relaxation beta <= 0 resolves to n / ln(n).
inline FairadResult run_fairad(const SparseGraph& g, const GroupPartition& p, index_t k,
                               FairadConfig cfg) {
  FairadResult res;
  auto& diag = res.diagnostics;
  Stopwatch total;
  cfg.anchors.k = k;
  detail::run_stage("validate", diag, [&] {
    if (p.size() != g.size()) throw ValidationError("group file does not match graph size");
    if (p.num_groups() < 2) throw ValidationError("at least two groups required");
    cfg.relaxation.validate();
    cfg.coarsening.validate();
    cfg.anchors.validate();
    if (g.size() < cfg.anchors.m)
      throw ValidationError("graph has " + std::to_string(g.size()) +
                            " nodes, fewer than m = " + std::to_string(cfg.anchors.m));
  });
  if (!(cfg.relaxation.beta > 0.0)) cfg.relaxation.beta = default_beta(g.size());
  diag.beta = cfg.relaxation.beta;

  const FairnessMatrix f = detail::run_stage("fairness_matrix", diag, [&] {
    return build_fairness_matrix(p);
  });

  res.test_vectors = detail::run_stage("test_vectors", diag, [&] {
    return compute_test_vectors(g, f, cfg.relaxation);
  });
  for (int r = 0; r < res.test_vectors.count(); ++r)
    diag.fairness_residuals.push_back(fairness_residual(f, res.test_vectors.column(r)));

  const SparseGraph w_alg = detail::run_stage("affinity", diag, [&] {
    return build_algebraic_affinity(g, res.test_vectors, cfg.relaxation.beta);
  });

  const CoarseHierarchy hierarchy = detail::run_stage("coarsening", diag, [&] {
    return build_hierarchy(w_alg, cfg.coarsening);
  });
  diag.level_sizes = hierarchy.level_sizes();
  diag.hierarchy = hierarchy_summary(hierarchy);

  res.anchors = detail::run_stage("anchors", diag, [&] {
    diag.selected_level = select_coarse_level(hierarchy, cfg.anchors.m);
    const auto labels = spectral_cluster_coarse(hierarchy.levels[diag.selected_level].graph,
                                                k, cfg.anchors);
    return build_anchor_constraints(diag.selected_level, hierarchy, labels, k);
  });
  diag.num_anchors = res.anchors.size();

  Eigen::MatrixXd indicators(g.size(), k);
  detail::run_stage("solve", diag, [&] {
    const AnchoredSystem sys(w_alg, res.anchors, cfg.solve.mu);
    std::vector<IndicatorSolution> sols(k);
    parallel_for(k, cfg.solve.jobs, [&](std::size_t i) {
      sols[i] = solve_indicator(sys, static_cast<index_t>(i), cfg.solve.tol, cfg.solve.max_iters);
    });
    for (index_t i = 0; i < k; ++i) {
      indicators.col(i) = Eigen::Map<const Eigen::VectorXd>(sols[i].v.data(), g.size());
      diag.solver_iterations.push_back(sols[i].iterations);
      diag.solver_residuals.push_back(sols[i].relative_residual);
    }
  });

  res.assignment = detail::run_stage("labels", diag, [&] {
    return assign_labels(std::move(indicators));
  });
  diag.timings_ms["total"] = total.elapsed_ms();
  return res;
}

}  // namespace fairad
