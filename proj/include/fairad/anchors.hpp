// Anchor selection: pick a coarse level, spectrally cluster it, and turn the
// labelled coarse nodes into one-hot constraints on the original graph.
#pragma once

#include <vector>

#include <Eigen/Dense>

#include "fairad/coarsening.hpp"
#include "fairad/common.hpp"
#include "fairad/eigensolver.hpp"
#include "fairad/graph.hpp"
#include "fairad/kmeans.hpp"

namespace fairad {

struct AnchorConfig {
  index_t m = 30;  // minimum number of representatives
  index_t k = 2;
  KMeansConfig kmeans;
  EigenConfig eigen;

  void validate() const {
    if (k < 2) throw ValidationError("k must be >= 2");
    if (m <= k) throw ValidationError("m must exceed k");
  }
};

/// Representatives r_t (original ids) with their cluster labels. B is the
/// m* x n one-hot selector with rows e_{r_t}; c_i marks the
/// representatives of cluster i.
struct AnchorSet {
  std::vector<index_t> rep_nodes;
  std::vector<index_t> rep_labels;
  index_t k = 0;
  index_t n = 0;

  std::size_t size() const { return rep_nodes.size(); }

  Eigen::MatrixXd selector() const {
    Eigen::MatrixXd b = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(size()), n);
    for (std::size_t t = 0; t < size(); ++t) b(static_cast<Eigen::Index>(t), rep_nodes[t]) = 1.0;
    return b;
  }

  std::vector<double> indicator(index_t cluster) const {
    std::vector<double> c(size(), 0.0);
    for (std::size_t t = 0; t < size(); ++t) c[t] = rep_labels[t] == cluster ? 1.0 : 0.0;
    return c;
  }
};

/// Scanning from the coarsest level towards level 0, the first level with
/// at least m nodes.
inline std::size_t select_coarse_level(std::span<const index_t> level_sizes, index_t m) {
  if (level_sizes.empty()) throw ValidationError("empty hierarchy");
  for (std::size_t l = level_sizes.size(); l-- > 0;)
    if (level_sizes[l] >= m) return l;
  throw ValidationError("graph has " + std::to_string(level_sizes[0]) +
                        " nodes, fewer than m = " + std::to_string(m) + "; use a smaller m");
}

inline std::size_t select_coarse_level(const CoarseHierarchy& h, index_t m) {
  const auto sizes = h.level_sizes();
  return select_coarse_level(sizes, m);
}

/// Labels the nodes of a coarse graph with the k-means clusters of the rows
/// of its k lowest normalized-Laplacian eigenvectors.
inline std::vector<index_t> spectral_cluster_coarse(const SparseGraph& coarse, index_t k,
                                                    const AnchorConfig& cfg) {
  if (coarse.size() < k) throw ValidationError("coarse graph has fewer nodes than clusters");
  const auto eig = smallest_eigenpairs(coarse, k, cfg.eigen);
  return kmeans(eig.vectors, k, cfg.kmeans).labels;
}

inline AnchorSet build_anchor_constraints(std::size_t level, const CoarseHierarchy& h,
                                          std::span<const index_t> labels, index_t k) {
  if (level >= h.num_levels()) throw StructuralError("anchor level out of range");
  const CoarseLevel& lv = h.levels[level];
  if (labels.size() != static_cast<std::size_t>(lv.size()))
    throw ValidationError("one label per coarse node required");
  // Walk the index chain explicitly rather than trusting cached ids.
  std::vector<index_t> ids(lv.size());
  std::iota(ids.begin(), ids.end(), 0);
  for (std::size_t l = level; l > 0; --l) {
    const auto& nodes = h.levels[l].nodes;
    for (auto& id : ids) {
      if (id < 0 || static_cast<std::size_t>(id) >= nodes.size())
        throw StructuralError("broken coarse index chain at level " + std::to_string(l));
      id = nodes[id];
    }
  }
  if (ids != lv.original_ids) throw StructuralError("coarse id map is inconsistent");
  AnchorSet a;
  a.k = k;
  a.n = h.levels[0].size();
  a.rep_nodes = std::move(ids);
  a.rep_labels.assign(labels.begin(), labels.end());
  std::vector<char> seen(k, 0);
  for (index_t l : a.rep_labels) {
    if (l < 0 || l >= k) throw ValidationError("anchor label out of range");
    seen[l] = 1;
  }
  for (index_t c = 0; c < k; ++c)
    if (!seen[c])
      throw ClusteringError("cluster " + std::to_string(c) + " has no representative");
  return a;
}

}  // namespace fairad
