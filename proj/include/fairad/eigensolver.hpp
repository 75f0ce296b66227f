// Smallest eigenpairs of a graph's normalized Laplacian.
//
// Small graphs use a dense symmetric decomposition. Larger ones run a
// thick-restart Lanczos iteration (full reorthogonalization) on the shifted
// operator 2I - L̄ = I + D^{-1/2} W D^{-1/2}, whose largest eigenvalues are
// the smallest of L̄.
#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include <Eigen/Dense>

#include "fairad/common.hpp"
#include "fairad/graph.hpp"

namespace fairad {

struct EigenResult {
  Eigen::VectorXd values;   // ascending
  Eigen::MatrixXd vectors;  // n x k, orthonormal columns
  std::vector<double> residuals;
  int restarts = 0;
};

struct EigenConfig {
  double tol = 1e-8;
  int max_restarts = 500;
  index_t dense_threshold = 500;  // dense decomposition at or below this size
  std::uint64_t seed = 0;
};

/// Dense n x n normalized Laplacian.
inline Eigen::MatrixXd dense_normalized_laplacian(const SparseGraph& g) {
  const NormalizedLaplacian lap(g);
  const index_t n = g.size();
  Eigen::MatrixXd l = Eigen::MatrixXd::Identity(n, n);
  const auto& s = lap.inv_sqrt_degrees();
  for (index_t i = 0; i < n; ++i) {
    auto c = g.neighbors(i);
    auto w = g.weights(i);
    for (std::size_t p = 0; p < c.size(); ++p) l(i, c[p]) -= s[i] * w[p] * s[c[p]];
  }
  return l;
}

namespace detail {

inline std::vector<double> eigen_residuals(const NormalizedLaplacian& lap,
                                           const Eigen::VectorXd& values,
                                           const Eigen::MatrixXd& vectors) {
  std::vector<double> res;
  Eigen::VectorXd y(vectors.rows());
  for (Eigen::Index j = 0; j < vectors.cols(); ++j) {
    lap.apply(std::span<const double>(vectors.col(j).data(), vectors.rows()),
              std::span<double>(y.data(), y.size()));
    res.push_back((y - values[j] * vectors.col(j)).norm());
  }
  return res;
}

inline EigenResult dense_smallest(const SparseGraph& g, index_t k) {
  const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(dense_normalized_laplacian(g));
  if (es.info() != Eigen::Success) throw NumericalError("dense eigensolver failed");
  EigenResult r;
  r.values = es.eigenvalues().head(k);
  r.vectors = es.eigenvectors().leftCols(k);
  r.residuals = eigen_residuals(NormalizedLaplacian(g), r.values, r.vectors);
  return r;
}

// Orthogonalizes w against the first `count` columns of v (two passes of
// classical Gram-Schmidt) and returns the accumulated coefficients.
inline Eigen::VectorXd orthogonalize(const Eigen::MatrixXd& v, Eigen::Index count,
                                     Eigen::VectorXd& w) {
  Eigen::VectorXd h = Eigen::VectorXd::Zero(count);
  for (int pass = 0; pass < 2; ++pass) {
    const Eigen::VectorXd c = v.leftCols(count).transpose() * w;
    w.noalias() -= v.leftCols(count) * c;
    h += c;
  }
  return h;
}

inline EigenResult lanczos_smallest(const SparseGraph& g, index_t k, const EigenConfig& cfg) {
  const NormalizedLaplacian lap(g);
  const index_t n = g.size();
  const auto ncv = static_cast<Eigen::Index>(std::min<index_t>(n, std::max(2 * k + 10, k + 30)));
  const auto& s = lap.inv_sqrt_degrees();
  const auto& m = g.matrix();

  // y = (2I - L̄) x = x + D^{-1/2} W D^{-1/2} x
  auto apply = [&](const double* x, double* y) {
    for (index_t i = 0; i < n; ++i) {
      double sum = 0.0;
      for (std::size_t p = m.row_ptr()[i]; p < m.row_ptr()[i + 1]; ++p)
        sum += m.values()[p] * s[m.col_idx()[p]] * x[m.col_idx()[p]];
      y[i] = x[i] + s[i] * sum;
    }
  };

  Rng rng(cfg.seed, "lanczos");
  auto random_vector = [&] {
    Eigen::VectorXd v(n);
    for (index_t i = 0; i < n; ++i) v[i] = rng.uniform() - 0.5;
    return v;
  };

  Eigen::MatrixXd v(n, ncv + 1);
  Eigen::MatrixXd h = Eigen::MatrixXd::Zero(ncv, ncv);
  {
    Eigen::VectorXd v0 = random_vector();
    v.col(0) = v0 / v0.norm();
  }
  Eigen::Index kept = 0;
  Eigen::VectorXd w(n);
  EigenResult result;

  for (int restart = 0; restart <= cfg.max_restarts; ++restart) {
    double beta = 0.0;
    for (Eigen::Index j = kept; j < ncv; ++j) {
      apply(v.col(j).data(), w.data());
      const Eigen::VectorXd coeff = orthogonalize(v, j + 1, w);
      for (Eigen::Index i = 0; i <= j; ++i) {
        // Entries coupling to kept Ritz vectors were fixed at restart.
        if (i < kept && j == kept) continue;
        h(i, j) = h(j, i) = coeff[i];
      }
      beta = w.norm();
      if (beta < 1e-12) {
        // Invariant subspace found; continue from a fresh direction.
        w = random_vector();
        orthogonalize(v, j + 1, w);
        v.col(j + 1) = w / w.norm();
        beta = 0.0;
      } else {
        v.col(j + 1) = w / beta;
      }
      if (j + 1 < ncv) h(j + 1, j) = h(j, j + 1) = beta;
    }

    const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(h);
    // Descending order of the shifted operator = ascending order of L̄.
    const Eigen::VectorXd theta = es.eigenvalues().reverse();
    const Eigen::MatrixXd sv = es.eigenvectors().rowwise().reverse();
    bool converged = true;
    for (index_t i = 0; i < k; ++i)
      if (std::abs(beta * sv(ncv - 1, i)) > cfg.tol) converged = false;

    if (converged || restart == cfg.max_restarts) {
      result.values = (2.0 - theta.head(k).array()).matrix();
      result.vectors = v.leftCols(ncv) * sv.leftCols(k);
      for (index_t i = 0; i < k; ++i) result.vectors.col(i).normalize();
      result.residuals = eigen_residuals(lap, result.values, result.vectors);
      result.restarts = restart;
      const bool ok = std::all_of(result.residuals.begin(), result.residuals.end(),
                                  [&](double r) { return r <= cfg.tol; });
      if (ok) return result;
      if (restart == cfg.max_restarts) {
        const double worst = *std::max_element(result.residuals.begin(), result.residuals.end());
        throw SolverError("Lanczos did not converge; worst residual " + format_double(worst),
                          worst);
      }
    }

    // Thick restart: keep the leading Ritz vectors plus the residual direction.
    kept = std::min<Eigen::Index>(k + (ncv - k) / 2, ncv - 1);
    Eigen::MatrixXd ritz = v.leftCols(ncv) * sv.leftCols(kept);
    const Eigen::VectorXd last = v.col(ncv);
    v.leftCols(kept) = ritz;
    v.col(kept) = last;
    h.setZero();
    for (Eigen::Index i = 0; i < kept; ++i) {
      h(i, i) = theta[i];
      h(kept, i) = h(i, kept) = beta * sv(ncv - 1, i);
    }
  }
  throw SolverError("Lanczos did not converge", 0.0);
}

}  // namespace detail

/// k eigenpairs of smallest eigenvalue of L̄, each with residual
/// ||L̄ v - lambda v|| <= cfg.tol.
inline EigenResult smallest_eigenpairs(const SparseGraph& g, index_t k,
                                       const EigenConfig& cfg = {}) {
  if (k < 1 || k > g.size()) throw ValidationError("eigenpair count out of range");
  if (g.size() <= cfg.dense_threshold || g.size() <= 2 * k + 10) return detail::dense_smallest(g, k);
  return detail::lanczos_smallest(g, k, cfg);
}

}  // namespace fairad
