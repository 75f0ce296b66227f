// Greedy weighted-aggregation coarsening with volume-ordered traversal.
//
// Each level keeps a subset of the previous level's nodes that are only
// weakly tied to one another, interpolates the remaining nodes onto them
// and forms the Galerkin coarse affinity P^T W P.
#pragma once

#include <algorithm>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "fairad/common.hpp"
#include "fairad/graph.hpp"
#include "fairad/sparse.hpp"

namespace fairad {

struct CoarseningConfig {
  double alpha = 1e-4;
  int max_levels = 20;
  index_t min_coarse_size = 2;
  double drop_tolerance = 1e-14;

  void validate() const {
    if (!(alpha >= 0.0 && alpha < 1.0)) throw ValidationError("alpha must lie in [0, 1)");
    if (max_levels < 1) throw ValidationError("max_levels must be >= 1");
  }
};

struct CoarseLevel {
  SparseGraph graph;                  // W_l, zero diagonal
  std::vector<index_t> nodes;         // indices into the previous level
  std::vector<index_t> original_ids;  // the same nodes as ids of level 0
  CsrMatrix interpolation;            // P_l, |V^(l-1)| x |V^(l)|; empty on level 0
  std::vector<double> volumes;        // nu_l
  double weight_before_removal = 0.0; // 1^T (P^T W P) 1 before zeroing the diagonal

  index_t size() const { return graph.size(); }
};

struct CoarseHierarchy {
  std::vector<CoarseLevel> levels;

  std::size_t num_levels() const { return levels.size(); }
  std::vector<index_t> level_sizes() const {
    std::vector<index_t> s;
    for (const auto& l : levels) s.push_back(l.size());
    return s;
  }
};

/// Stable descending order of volume; equal volumes keep ascending id.
inline std::vector<index_t> volume_ordering(std::span<const double> volumes) {
  std::vector<index_t> order(volumes.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](index_t a, index_t b) { return volumes[a] > volumes[b]; });
  return order;
}

/// Greedy scan in `order`: the first node is taken; a later node is taken
/// when its heaviest edge to an already taken node is at most alpha times
/// its full row sum. Returns the taken nodes in selection order.
inline std::vector<index_t> coarsen_level(const SparseGraph& w, std::span<const index_t> order,
                                          double alpha) {
  if (order.size() != static_cast<std::size_t>(w.size()))
    throw ValidationError("coarsening order must be a permutation of the nodes");
  std::vector<char> taken(w.size(), 0);
  std::vector<index_t> coarse;
  const auto& d = w.degrees();
  for (std::size_t t = 0; t < order.size(); ++t) {
    const index_t u = order[t];
    bool select = t == 0;
    if (!select) {
      double heaviest = 0.0;
      auto c = w.neighbors(u);
      auto x = w.weights(u);
      for (std::size_t p = 0; p < c.size(); ++p)
        if (taken[c[p]]) heaviest = std::max(heaviest, x[p]);
      select = heaviest <= alpha * d[u];
    }
    if (select) {
      taken[u] = 1;
      coarse.push_back(u);
    }
  }
  return coarse;
}

/// P(i, J) = W(i, c_J) / sum over coarse c of W(i, c) for fine i, and the
/// unit row e_J when i is the coarse node c_J. Column J is coarse[J].
inline CsrMatrix interpolation_matrix(const SparseGraph& w, std::span<const index_t> coarse) {
  const index_t n = w.size();
  std::vector<index_t> pos(n, -1);
  for (std::size_t j = 0; j < coarse.size(); ++j) pos[coarse[j]] = static_cast<index_t>(j);
  std::vector<std::size_t> ptr(n + 1, 0);
  std::vector<index_t> col;
  std::vector<double> val;
  std::vector<std::pair<index_t, double>> row;
  for (index_t i = 0; i < n; ++i) {
    if (pos[i] >= 0) {
      col.push_back(pos[i]);
      val.push_back(1.0);
    } else {
      row.clear();
      double total = 0.0;
      auto c = w.neighbors(i);
      auto x = w.weights(i);
      for (std::size_t p = 0; p < c.size(); ++p) {
        if (pos[c[p]] >= 0) {
          row.emplace_back(pos[c[p]], x[p]);
          total += x[p];
        }
      }
      if (!(total > 0.0))
        throw StructuralError("interpolation: node " + std::to_string(i) +
                              " has no weight to the coarse set");
      std::sort(row.begin(), row.end());
      for (auto& [j, x] : row) {
        col.push_back(j);
        val.push_back(x / total);
      }
    }
    ptr[i + 1] = col.size();
  }
  return {n, static_cast<index_t>(coarse.size()), std::move(ptr), std::move(col),
          std::move(val)};
}

struct GalerkinResult {
  SparseGraph graph;
  double weight_before_removal = 0.0;
};

/// P^T W P, symmetrized, with its diagonal zeroed and entries below the
/// drop tolerance removed.
inline GalerkinResult galerkin_coarse_affinity(const SparseGraph& w, const CsrMatrix& p,
                                               double drop_tolerance = 1e-14) {
  if (p.rows() != w.size()) throw ValidationError("Galerkin product: shape mismatch");
  const CsrMatrix pt = p.transpose();
  const CsrMatrix c = multiply(pt, multiply(w.matrix(), p));
  const CsrMatrix ct = c.transpose();
  GalerkinResult out;
  out.weight_before_removal = c.sum();
  const index_t m = c.rows();
  std::vector<std::size_t> ptr(m + 1, 0);
  std::vector<index_t> col;
  std::vector<double> val;
  for (index_t i = 0; i < m; ++i) {
    // C and C^T share a sorted merge; averaging makes the result exactly
    // symmetric regardless of summation order.
    auto ac = c.row_cols(i);
    auto av = c.row_vals(i);
    auto bc = ct.row_cols(i);
    auto bv = ct.row_vals(i);
    std::size_t a = 0, b = 0;
    while (a < ac.size() || b < bc.size()) {
      index_t j;
      double x = 0.0;
      if (b == bc.size() || (a < ac.size() && ac[a] < bc[b])) {
        j = ac[a];
        x = 0.5 * av[a++];
      } else if (a == ac.size() || bc[b] < ac[a]) {
        j = bc[b];
        x = 0.5 * bv[b++];
      } else {
        j = ac[a];
        x = 0.5 * (av[a++] + bv[b++]);
      }
      if (j == i || !(x > drop_tolerance)) continue;
      col.push_back(j);
      val.push_back(x);
    }
    ptr[i + 1] = col.size();
  }
  out.graph = SparseGraph::from_csr(CsrMatrix(m, m, std::move(ptr), std::move(col), std::move(val)));
  return out;
}

/// Coarsens level by level until a level has fewer than min_coarse_size
/// nodes, a scan makes no progress (that level is discarded) or
/// max_levels coarse levels exist. Level 0 is the input itself.
inline CoarseHierarchy build_hierarchy(const SparseGraph& w_alg, const CoarseningConfig& cfg) {
  cfg.validate();
  CoarseHierarchy h;
  {
    CoarseLevel base;
    base.graph = w_alg;
    base.nodes.resize(w_alg.size());
    std::iota(base.nodes.begin(), base.nodes.end(), 0);
    base.original_ids = base.nodes;
    base.volumes.assign(w_alg.size(), 1.0);
    base.weight_before_removal = w_alg.total_weight();
    h.levels.push_back(std::move(base));
  }
  for (int l = 1; l <= cfg.max_levels; ++l) {
    const CoarseLevel& prev = h.levels.back();
    if (prev.size() < cfg.min_coarse_size) break;
    const auto order = volume_ordering(prev.volumes);
    auto coarse = coarsen_level(prev.graph, order, cfg.alpha);
    if (coarse.size() == static_cast<std::size_t>(prev.size())) break;
    CoarseLevel next;
    next.interpolation = interpolation_matrix(prev.graph, coarse);
    auto g = galerkin_coarse_affinity(prev.graph, next.interpolation, cfg.drop_tolerance);
    next.graph = std::move(g.graph);
    next.weight_before_removal = g.weight_before_removal;
    next.volumes = next.interpolation.left_multiply(prev.volumes);
    next.original_ids.reserve(coarse.size());
    for (index_t c : coarse) next.original_ids.push_back(prev.original_ids[c]);
    next.nodes = std::move(coarse);
    h.levels.push_back(std::move(next));
  }
  return h;
}

inline nlohmann::json hierarchy_summary(const CoarseHierarchy& h) {
  nlohmann::json levels = nlohmann::json::array();
  for (std::size_t l = 0; l < h.levels.size(); ++l) {
    const auto& lv = h.levels[l];
    levels.push_back({{"level", l},
                      {"nodes", lv.size()},
                      {"edges", lv.graph.num_edges()},
                      {"total_weight", lv.graph.total_weight()}});
  }
  return {{"levels", levels}};
}

}  // namespace fairad
