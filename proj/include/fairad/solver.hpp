// Anchored cut solve: one Uzawa step with zero initial multiplier turns the
// anchor-constrained relaxed cut into k SPD systems
//   (L̄_alg + mu B^T B) v_i = mu B^T c_i,
// solved here by Jacobi-preconditioned conjugate gradients.
#pragma once

#include <cmath>
#include <span>
#include <vector>

#include "fairad/anchors.hpp"
#include "fairad/assignment.hpp"
#include "fairad/common.hpp"
#include "fairad/graph.hpp"

namespace fairad {

struct SolveConfig {
  double mu = 1e9;
  double tol = 1e-8;
  std::size_t max_iters = 0;  // 0 = 10 n
  std::size_t jobs = 0;
};

/// A = L̄_alg + mu B^T B as an operator; B^T B is diagonal with mu at the
/// anchor positions.
class AnchoredSystem {
 public:
  AnchoredSystem(const SparseGraph& w_alg, const AnchorSet& anchors, double mu)
      : lap_(w_alg), anchors_(&anchors), mu_(mu), penalty_(w_alg.size(), 0.0) {
    if (anchors.size() == 0) throw ValidationError("anchored system needs at least one anchor");
    if (anchors.n != w_alg.size()) throw ValidationError("anchor set does not match graph size");
    if (!(mu > 0.0)) throw ValidationError("mu must be positive");
    for (index_t r : anchors.rep_nodes) penalty_[r] += mu;
  }

  index_t size() const { return lap_.size(); }
  double mu() const { return mu_; }
  index_t num_clusters() const { return anchors_->k; }

  void apply(std::span<const double> x, std::span<double> y) const {
    lap_.apply(x, y);
    for (index_t r : anchors_->rep_nodes) y[r] += mu_ * x[r];
  }

  /// Diagonal of A; L̄ has unit diagonal because W has none.
  std::vector<double> diagonal() const {
    std::vector<double> d(size(), 1.0);
    for (index_t i = 0; i < size(); ++i) d[i] += penalty_[i];
    return d;
  }

  /// mu B^T c_i
  std::vector<double> rhs(index_t cluster) const {
    std::vector<double> b(size(), 0.0);
    for (std::size_t t = 0; t < anchors_->size(); ++t)
      if (anchors_->rep_labels[t] == cluster) b[anchors_->rep_nodes[t]] += mu_;
    return b;
  }

 private:
  NormalizedLaplacian lap_;
  const AnchorSet* anchors_;
  double mu_;
  std::vector<double> penalty_;
};

struct IndicatorSolution {
  std::vector<double> v;
  std::size_t iterations = 0;
  double relative_residual = 0.0;  // ||A v - b|| / ||b||
};

/// Jacobi-preconditioned CG. Stops once both ||r|| <= tol ||b|| and
/// ||D^{-1} r|| <= tol ||D^{-1} b|| hold, D = diag(A). Anchor rows carry the
/// factor mu in r and b, so the first test alone lets interior rows stay
/// inaccurate; after scaling by D^{-1} every row counts at unit size.
inline IndicatorSolution solve_indicator(const AnchoredSystem& sys, index_t cluster,
                                         double tol = 1e-8, std::size_t max_iters = 0) {
  if (!(tol > 0.0)) throw ValidationError("solver tolerance must be positive");
  if (cluster < 0 || cluster >= sys.num_clusters()) throw ValidationError("cluster id out of range");
  const index_t n = sys.size();
  if (max_iters == 0) max_iters = 10 * static_cast<std::size_t>(n);
  const std::vector<double> b = sys.rhs(cluster);
  const std::vector<double> diag = sys.diagonal();

  IndicatorSolution sol;
  sol.v.assign(n, 0.0);
  const double b_norm = norm2(b);
  if (b_norm == 0.0) return sol;

  std::vector<double> r = b, z(n), p(n), q(n);
  for (index_t i = 0; i < n; ++i) z[i] = r[i] / diag[i];
  double rz = dot(r, z);
  const double bz_norm = norm2(z);
  p = z;
  double r_norm = b_norm;
  double z_norm = bz_norm;
  for (std::size_t it = 0; it < max_iters; ++it) {
    if (r_norm <= tol * b_norm && z_norm <= tol * bz_norm) break;
    sys.apply(p, q);
    const double pq = dot(p, q);
    if (!(pq > 0.0)) throw NumericalError("anchored system is not positive definite");
    const double alpha = rz / pq;
    for (index_t i = 0; i < n; ++i) {
      sol.v[i] += alpha * p[i];
      r[i] -= alpha * q[i];
      z[i] = r[i] / diag[i];
    }
    const double rz_next = dot(r, z);
    const double beta = rz_next / rz;
    rz = rz_next;
    for (index_t i = 0; i < n; ++i) p[i] = z[i] + beta * p[i];
    r_norm = norm2(r);
    z_norm = norm2(z);
    sol.iterations = it + 1;
  }
  // Report the residual of the returned iterate, not the recurrence.
  sys.apply(sol.v, q);
  for (index_t i = 0; i < n; ++i) q[i] -= b[i];
  sol.relative_residual = norm2(q) / b_norm;
  if (!(sol.relative_residual <= tol) || !(z_norm <= tol * bz_norm))
    throw SolverError("anchored solve for cluster " + std::to_string(cluster) +
                          " did not converge in " + std::to_string(max_iters) +
                          " iterations (relative residual " +
                          format_double(sol.relative_residual) + ")",
                      sol.relative_residual);
  return sol;
}

}  // namespace fairad
