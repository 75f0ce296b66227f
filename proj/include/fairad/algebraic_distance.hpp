// Fairness-constrained Jacobi relaxation of test vectors and the
// algebraic-distance affinity built from them.
//
// One relaxation step solves  D x = W x_prev  subject to  F^T x = 0  by a
// single augmented-Lagrangian Uzawa step with zero initial multiplier,
// i.e. x = (D + mu F F^T)^{-1} W x_prev. The inverse is applied through
// the Woodbury identity so only an (h-1) x (h-1) system is ever factored.
#pragma once

#include <cmath>
#include <limits>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "fairad/common.hpp"
#include "fairad/fairness.hpp"
#include "fairad/graph.hpp"

namespace fairad {

/// Rescaling of the test vectors. The constant vector is a fixed point of
/// the constrained step (F^T 1 = 0), so removing the mean and rescaling after
/// every step changes x^tau only by a shift and a scale. Doing it every step
/// keeps the digits that a final subtraction of the dominant constant
/// would cancel.
enum class TestVectorScaling {
  none,       // raw x^tau
  unit_norm,  // mean removed, then ||x||_2 = 1, at every step
};

struct RelaxationConfig {
  int num_vectors = 10;      // R
  int iterations = 10;       // tau
  double mu = 1e9;
  double beta = 0.0;         // <= 0 means n / ln(n), resolved per graph
  std::uint64_t seed = 0;
  std::size_t jobs = 0;      // 0 = hardware concurrency
  TestVectorScaling scaling = TestVectorScaling::unit_norm;

  void validate() const {
    if (num_vectors < 1) throw ValidationError("number of test vectors must be >= 1");
    if (iterations < 1) throw ValidationError("Jacobi iterations must be >= 1");
    if (!(mu > 0.0)) throw ValidationError("mu must be positive");
  }
};

/// beta = n / ln(n), the default distance scaling.
inline double default_beta(index_t n) {
  return n > 1 ? static_cast<double>(n) / std::log(static_cast<double>(n)) : 1.0;
}

/// Applies (D + mu F F^T)^{-1}. F^T D^{-1} F and its Cholesky factor are
/// computed once and shared read-only.
class WoodburyOperator {
 public:
  WoodburyOperator(std::span<const double> degrees, const FairnessMatrix& f, double mu)
      : inv_d_(degrees.size()), mu_(mu), f_(&f) {
    if (mu < 0.0) throw ValidationError("mu must be nonnegative");
    if (static_cast<index_t>(degrees.size()) != f.rows() && f.cols() > 0)
      throw ValidationError("degree vector and fairness matrix disagree on n");
    for (std::size_t i = 0; i < degrees.size(); ++i) {
      if (!(degrees[i] > 0.0))
        throw NumericalError("Woodbury: node " + std::to_string(i) + " has zero degree");
      inv_d_[i] = 1.0 / degrees[i];
    }
    const index_t c = f.cols();
    if (mu == 0.0 || c == 0) return;
    dinv_f_ = inv_d_.asDiagonal() * f.dense();
    Eigen::MatrixXd inner = f.dense().transpose() * dinv_f_;
    inner.diagonal().array() += 1.0 / mu;
    chol_.compute(inner);
    if (chol_.info() != Eigen::Success)
      throw NumericalError("Woodbury: inner (h-1)x(h-1) system is singular");
    active_ = true;
  }

  index_t size() const { return static_cast<index_t>(inv_d_.size()); }
  double mu() const { return mu_; }

  void apply(std::span<const double> b, std::span<double> out) const {
    const index_t n = size();
    for (index_t i = 0; i < n; ++i) out[i] = inv_d_[i] * b[i];
    if (!active_) return;
    Eigen::VectorXd t(f_->cols());
    f_->transpose_apply(out, std::span<double>(t.data(), t.size()));
    const Eigen::VectorXd z = chol_.solve(t);
    for (index_t s = 0; s < f_->cols(); ++s) {
      const double* col = dinv_f_.col(s).data();
      const double zs = z[s];
      for (index_t i = 0; i < n; ++i) out[i] -= col[i] * zs;
    }
  }

  std::vector<double> apply(std::span<const double> b) const {
    std::vector<double> out(b.size());
    apply(b, out);
    return out;
  }

 private:
  Eigen::VectorXd inv_d_;
  double mu_;
  const FairnessMatrix* f_;
  Eigen::MatrixXd dinv_f_;
  Eigen::LLT<Eigen::MatrixXd> chol_;
  bool active_ = false;
};

inline std::vector<double> woodbury_apply(std::span<const double> degrees,
                                          const FairnessMatrix& f, double mu,
                                          std::span<const double> b) {
  return WoodburyOperator(degrees, f, mu).apply(b);
}

/// One constrained Jacobi step: (D + mu F F^T)^{-1} W x.
inline std::vector<double> relax_step(const SparseGraph& g, const WoodburyOperator& op,
                                      std::span<const double> x) {
  std::vector<double> b(g.size());
  g.multiply(x, b);
  return op.apply(b);
}

/// x^0 with entries i.i.d. uniform on [-0.5, 0.5] from stream (seed, r).
inline std::vector<double> initial_test_vector(index_t n, std::uint64_t seed, int r) {
  Rng rng(seed, "testvec", static_cast<std::uint64_t>(r));
  std::vector<double> x(n);
  for (auto& v : x) v = rng.uniform() - 0.5;
  return x;
}

/// Removes the mean and scales to unit 2-norm. Neither step changes which
/// node pairs are close, and F^T 1 = 0 so the constraint residual is only
/// rescaled. A vector that is constant stays as the zero vector.
inline void normalize_test_vector(std::vector<double>& x) {
  if (x.empty()) return;
  double mean = 0.0;
  for (double v : x) mean += v;
  mean /= static_cast<double>(x.size());
  for (double& v : x) v -= mean;
  const double nrm = norm2(x);
  if (nrm > 0.0)
    for (double& v : x) v /= nrm;
}

inline std::vector<double> constrained_jacobi(
    const SparseGraph& g, const WoodburyOperator& op, std::span<const double> x0,
    int iterations, TestVectorScaling scaling = TestVectorScaling::none) {
  std::vector<double> x(x0.begin(), x0.end());
  std::vector<double> b(g.size());
  for (int t = 1; t <= iterations; ++t) {
    g.multiply(x, b);
    op.apply(b, x);
    for (double v : x)
      if (!std::isfinite(v))
        throw NumericalError("constrained Jacobi: non-finite value at iteration " +
                             std::to_string(t));
    if (scaling == TestVectorScaling::unit_norm) normalize_test_vector(x);
  }
  return x;
}

inline std::vector<double> constrained_jacobi(const SparseGraph& g, const FairnessMatrix& f,
                                              const RelaxationConfig& cfg, int r) {
  cfg.validate();
  WoodburyOperator op(g.degrees(), f, cfg.mu);
  return constrained_jacobi(g, op, initial_test_vector(g.size(), cfg.seed, r),
                            cfg.iterations, cfg.scaling);
}

/// R relaxed vectors, stored node-major so that all R values of one node
/// are contiguous.
class TestVectorSet {
 public:
  TestVectorSet() = default;
  TestVectorSet(index_t n, int r) : n_(n), r_(r), data_(static_cast<std::size_t>(n) * r) {}

  index_t size() const { return n_; }
  int count() const { return r_; }

  double operator()(int r, index_t i) const { return data_[static_cast<std::size_t>(i) * r_ + r]; }
  std::span<const double> node(index_t i) const {
    return {data_.data() + static_cast<std::size_t>(i) * r_, static_cast<std::size_t>(r_)};
  }

  std::vector<double> column(int r) const {
    std::vector<double> c(n_);
    for (index_t i = 0; i < n_; ++i) c[i] = (*this)(r, i);
    return c;
  }
  void set_column(int r, std::span<const double> x) {
    for (index_t i = 0; i < n_; ++i) data_[static_cast<std::size_t>(i) * r_ + r] = x[i];
  }

 private:
  index_t n_ = 0;
  int r_ = 0;
  std::vector<double> data_;
};

/// Runs the R constrained relaxations (independently; in parallel when
/// jobs allow). Each vector depends only on (seed, r).
inline TestVectorSet compute_test_vectors(const SparseGraph& g, const FairnessMatrix& f,
                                          const RelaxationConfig& cfg) {
  cfg.validate();
  const WoodburyOperator op(g.degrees(), f, cfg.mu);
  TestVectorSet tv(g.size(), cfg.num_vectors);
  std::vector<std::vector<double>> cols(cfg.num_vectors);
  parallel_for(cfg.num_vectors, cfg.jobs, [&](std::size_t r) {
    cols[r] = constrained_jacobi(g, op, initial_test_vector(g.size(), cfg.seed, static_cast<int>(r)),
                                 cfg.iterations, cfg.scaling);
  });
  for (int r = 0; r < cfg.num_vectors; ++r) tv.set_column(r, cols[r]);
  return tv;
}

/// s(i, j) = max_r |x_r[i] - x_r[j]|
inline double algebraic_distance(const TestVectorSet& tv, index_t i, index_t j) {
  auto a = tv.node(i);
  auto b = tv.node(j);
  double s = 0.0;
  for (int r = 0; r < tv.count(); ++r) s = std::max(s, std::abs(a[r] - b[r]));
  return s;
}

/// Re-weights every edge of g to exp(-beta * s(i, j)); non-edges stay
/// absent. Weights that underflow are held at the smallest normal double
/// so the sparsity pattern (and connectivity) is preserved.
inline SparseGraph build_algebraic_affinity(const SparseGraph& g, const TestVectorSet& tv,
                                            double beta) {
  if (!(beta > 0.0)) throw ValidationError("beta must be positive");
  if (tv.size() != g.size()) throw ValidationError("test vectors do not match graph size");
  const auto& m = g.matrix();
  std::vector<double> w(m.nnz());
  for (index_t i = 0; i < g.size(); ++i) {
    for (std::size_t p = m.row_ptr()[i]; p < m.row_ptr()[i + 1]; ++p) {
      const double s = algebraic_distance(tv, i, m.col_idx()[p]);
      w[p] = std::max(std::exp(-beta * s), std::numeric_limits<double>::min());
    }
  }
  return g.reweighted(std::move(w));
}

}  // namespace fairad
