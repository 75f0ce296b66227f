// Plain normalized-cut spectral clustering, the unfair reference method.
#pragma once

#include <vector>

#include "fairad/assignment.hpp"
#include "fairad/common.hpp"
#include "fairad/eigensolver.hpp"
#include "fairad/graph.hpp"
#include "fairad/kmeans.hpp"

namespace fairad {

struct SCConfig {
  index_t k = 2;
  EigenConfig eigen;
  KMeansConfig kmeans;

  void set_seed(std::uint64_t seed) {
    eigen.seed = seed;
    kmeans.seed = seed;
  }
};

/// k-means on the rows of the k lowest eigenvectors of L̄. The returned
/// assignment carries no soft indicators.
inline ClusterAssignment run_sc(const SparseGraph& g, const SCConfig& cfg) {
  if (cfg.k < 2) throw ValidationError("k must be >= 2");
  if (g.size() < cfg.k) throw ValidationError("graph has fewer nodes than clusters");
  const auto eig = smallest_eigenpairs(g, cfg.k, cfg.eigen);
  ClusterAssignment a;
  a.k = cfg.k;
  a.labels = kmeans(eig.vectors, cfg.k, cfg.kmeans).labels;
  return a;
}

/// (1/2) sum_l W(C_l, complement) / Vol(C_l)
inline double ncut_value(const SparseGraph& g, std::span<const index_t> labels, index_t k) {
  if (static_cast<index_t>(labels.size()) != g.size())
    throw ValidationError("label count does not match graph size");
  std::vector<double> cut(k, 0.0), vol(k, 0.0);
  for (index_t i = 0; i < g.size(); ++i) {
    const index_t li = labels[i];
    if (li < 0 || li >= k) throw ValidationError("cluster label out of range");
    vol[li] += g.degrees()[i];
    auto c = g.neighbors(i);
    auto w = g.weights(i);
    for (std::size_t p = 0; p < c.size(); ++p)
      if (labels[c[p]] != li) cut[li] += w[p];
  }
  double total = 0.0;
  for (index_t l = 0; l < k; ++l) {
    if (!(vol[l] > 0.0))
      throw ValidationError("cluster " + std::to_string(l) + " has zero volume");
    total += cut[l] / vol[l];
  }
  return 0.5 * total;
}

}  // namespace fairad
