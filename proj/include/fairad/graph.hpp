// Undirected weighted graphs: symmetric CSR storage, degrees, the
// normalized Laplacian operator and connected-component preprocessing.
#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <optional>
#include <queue>
#include <span>
#include <string>
#include <vector>

#include "fairad/common.hpp"
#include "fairad/sparse.hpp"

namespace fairad {

struct Edge {
  index_t u;
  index_t v;
  double w = 1.0;
};

/// Symmetric nonnegative affinity matrix with zero diagonal, plus its
/// degree vector. Immutable after construction.
class SparseGraph {
 public:
  SparseGraph() = default;

  /// Builds the graph on nodes [0, n). Each edge contributes to the
  /// unordered pair {u, v}; repeated pairs are summed. Self-loops are
  /// dropped and counted in `dropped_self_loops` when given.
  static SparseGraph from_edges(index_t n, std::span<const Edge> edges,
                                std::size_t* dropped_self_loops = nullptr) {
    std::size_t loops = 0;
    std::vector<std::size_t> count(n + 1, 0);
    for (const Edge& e : edges) {
      if (e.u < 0 || e.v < 0 || e.u >= n || e.v >= n)
        throw ValidationError("edge endpoint out of range");
      if (!(e.w >= 0.0) || !std::isfinite(e.w))
        throw ValidationError("edge weight must be finite and nonnegative");
      if (e.u == e.v) {
        ++loops;
        continue;
      }
      if (e.w == 0.0) continue;
      ++count[e.u + 1];
      ++count[e.v + 1];
    }
    for (index_t i = 0; i < n; ++i) count[i + 1] += count[i];
    std::vector<index_t> col(count[n]);
    std::vector<double> val(count[n]);
    std::vector<std::size_t> next(count.begin(), count.end() - 1);
    for (const Edge& e : edges) {
      if (e.u == e.v || e.w == 0.0) continue;
      col[next[e.u]] = e.v;
      val[next[e.u]++] = e.w;
      col[next[e.v]] = e.u;
      val[next[e.v]++] = e.w;
    }
    if (dropped_self_loops) *dropped_self_loops = loops;
    return compress(n, count, col, val);
  }

  /// Adopts a CSR matrix that is already symmetric with zero diagonal and
  /// strictly positive entries. Checked in debug builds only.
  static SparseGraph from_csr(CsrMatrix m) {
    assert(m.rows() == m.cols());
    SparseGraph g;
    g.adj_ = std::move(m);
    g.degrees_ = g.adj_.row_sums();
    return g;
  }

  index_t size() const { return adj_.rows(); }
  std::size_t nnz() const { return adj_.nnz(); }
  std::size_t num_edges() const { return adj_.nnz() / 2; }

  std::span<const index_t> neighbors(index_t i) const { return adj_.row_cols(i); }
  std::span<const double> weights(index_t i) const { return adj_.row_vals(i); }
  double weight(index_t i, index_t j) const { return adj_.at(i, j); }

  const std::vector<double>& degrees() const { return degrees_; }
  const CsrMatrix& matrix() const { return adj_; }

  double total_weight() const { return adj_.sum(); }

  /// y = W x
  void multiply(std::span<const double> x, std::span<double> y) const {
    adj_.multiply(x, y);
  }

  std::vector<Edge> edges() const {
    std::vector<Edge> out;
    out.reserve(num_edges());
    for (index_t i = 0; i < size(); ++i) {
      auto c = neighbors(i);
      auto w = weights(i);
      for (std::size_t p = 0; p < c.size(); ++p)
        if (c[p] > i) out.push_back({i, c[p], w[p]});
    }
    return out;
  }

  /// Same sparsity pattern, new weights (one per stored entry, in storage
  /// order). The caller keeps the values symmetric.
  SparseGraph reweighted(std::vector<double> values) const {
    return from_csr(CsrMatrix(size(), size(), adj_.row_ptr(), adj_.col_idx(),
                              std::move(values)));
  }

 private:
  // Sorts each row by column and merges duplicates by summation.
  static SparseGraph compress(index_t n, const std::vector<std::size_t>& ptr,
                              std::vector<index_t>& col, std::vector<double>& val) {
    std::vector<std::size_t> out_ptr(n + 1, 0);
    std::vector<index_t> out_col;
    std::vector<double> out_val;
    out_col.reserve(col.size());
    out_val.reserve(col.size());
    std::vector<std::pair<index_t, double>> row;
    for (index_t i = 0; i < n; ++i) {
      row.clear();
      for (std::size_t p = ptr[i]; p < ptr[i + 1]; ++p) row.emplace_back(col[p], val[p]);
      std::stable_sort(row.begin(), row.end(),
                       [](const auto& a, const auto& b) { return a.first < b.first; });
      for (std::size_t p = 0; p < row.size();) {
        const index_t j = row[p].first;
        double w = 0.0;
        for (; p < row.size() && row[p].first == j; ++p) w += row[p].second;
        out_col.push_back(j);
        out_val.push_back(w);
      }
      out_ptr[i + 1] = out_col.size();
    }
    return from_csr(CsrMatrix(n, n, std::move(out_ptr), std::move(out_col),
                              std::move(out_val)));
  }

  CsrMatrix adj_;
  std::vector<double> degrees_;
};

inline std::vector<double> degree_vector(const SparseGraph& g) { return g.degrees(); }

/// Operator view of D^{-1/2} (D - W) D^{-1/2}; never materialized.
class NormalizedLaplacian {
 public:
  explicit NormalizedLaplacian(const SparseGraph& g) : g_(&g), inv_sqrt_(g.size()) {
    const auto& d = g.degrees();
    for (index_t i = 0; i < g.size(); ++i) {
      if (!(d[i] > 0.0))
        throw NumericalError("normalized Laplacian: node " + std::to_string(i) +
                             " has zero degree");
      inv_sqrt_[i] = 1.0 / std::sqrt(d[i]);
    }
  }

  index_t size() const { return g_->size(); }
  const std::vector<double>& inv_sqrt_degrees() const { return inv_sqrt_; }

  /// y = L̄ x
  void apply(std::span<const double> x, std::span<double> y) const {
    const auto& m = g_->matrix();
    const auto& ptr = m.row_ptr();
    const auto& col = m.col_idx();
    const auto& val = m.values();
    for (index_t i = 0; i < size(); ++i) {
      double sum = 0.0;
      for (std::size_t p = ptr[i]; p < ptr[i + 1]; ++p)
        sum += val[p] * inv_sqrt_[col[p]] * x[col[p]];
      y[i] = x[i] - inv_sqrt_[i] * sum;
    }
  }

  std::vector<double> apply(std::span<const double> x) const {
    std::vector<double> y(size());
    apply(x, y);
    return y;
  }

 private:
  const SparseGraph* g_;
  std::vector<double> inv_sqrt_;
};

inline std::vector<double> normalized_laplacian_apply(const SparseGraph& g,
                                                      std::span<const double> x) {
  return NormalizedLaplacian(g).apply(x);
}

/// Induced subgraph plus the id maps between the original and kept nodes.
struct Subgraph {
  SparseGraph graph;
  std::vector<index_t> old_to_new;  // -1 for dropped nodes
  std::vector<index_t> new_to_old;

  /// Filters per-node metadata of the original graph onto the kept nodes.
  template <typename T>
  std::vector<T> filter(std::span<const T> rows) const {
    std::vector<T> out;
    out.reserve(new_to_old.size());
    for (index_t old : new_to_old) out.push_back(rows[old]);
    return out;
  }
  template <typename T>
  std::vector<T> filter(const std::vector<T>& rows) const {
    return filter(std::span<const T>(rows));
  }
};

/// Per-node component ids, numbered in order of each component's smallest
/// node id.
inline std::vector<index_t> connected_components(const SparseGraph& g,
                                                 index_t* num_components = nullptr) {
  std::vector<index_t> comp(g.size(), -1);
  index_t next = 0;
  std::vector<index_t> stack;
  for (index_t s = 0; s < g.size(); ++s) {
    if (comp[s] >= 0) continue;
    comp[s] = next;
    stack.push_back(s);
    while (!stack.empty()) {
      const index_t u = stack.back();
      stack.pop_back();
      for (index_t v : g.neighbors(u)) {
        if (comp[v] < 0) {
          comp[v] = next;
          stack.push_back(v);
        }
      }
    }
    ++next;
  }
  if (num_components) *num_components = next;
  return comp;
}

inline Subgraph induced_subgraph(const SparseGraph& g, std::span<const index_t> keep) {
  Subgraph sub;
  sub.old_to_new.assign(g.size(), -1);
  sub.new_to_old.assign(keep.begin(), keep.end());
  for (std::size_t i = 0; i < keep.size(); ++i)
    sub.old_to_new[keep[i]] = static_cast<index_t>(i);
  const auto n = static_cast<index_t>(keep.size());
  std::vector<std::size_t> ptr(n + 1, 0);
  std::vector<index_t> col;
  std::vector<double> val;
  for (index_t i = 0; i < n; ++i) {
    const index_t old = keep[i];
    auto c = g.neighbors(old);
    auto w = g.weights(old);
    std::vector<std::pair<index_t, double>> row;
    for (std::size_t p = 0; p < c.size(); ++p)
      if (sub.old_to_new[c[p]] >= 0) row.emplace_back(sub.old_to_new[c[p]], w[p]);
    std::sort(row.begin(), row.end());
    for (auto& [j, x] : row) {
      col.push_back(j);
      val.push_back(x);
    }
    ptr[i + 1] = col.size();
  }
  sub.graph = SparseGraph::from_csr(
      CsrMatrix(n, n, std::move(ptr), std::move(col), std::move(val)));
  return sub;
}

/// Largest connected component; ties go to the component holding the
/// smallest node id. A connected graph maps to itself with the identity.
inline Subgraph largest_connected_component(const SparseGraph& g) {
  if (g.size() == 0) return {};
  index_t ncomp = 0;
  auto comp = connected_components(g, &ncomp);
  std::vector<index_t> sizes(ncomp, 0);
  for (index_t c : comp) ++sizes[c];
  // Components are numbered by smallest member, so the first maximum wins.
  const auto best = static_cast<index_t>(
      std::max_element(sizes.begin(), sizes.end()) - sizes.begin());
  std::vector<index_t> keep;
  keep.reserve(sizes[best]);
  for (index_t i = 0; i < g.size(); ++i)
    if (comp[i] == best) keep.push_back(i);
  if (ncomp == 1) {
    Subgraph sub;
    sub.graph = g;
    sub.new_to_old = keep;
    sub.old_to_new = keep;
    return sub;
  }
  return induced_subgraph(g, keep);
}

}  // namespace fairad
