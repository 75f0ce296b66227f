// General compressed-sparse-row matrix with the handful of kernels the
// coarsening pipeline needs: mat-vec, transpose and sparse-sparse product.
#pragma once

#include <cassert>
#include <cstddef>
#include <span>
#include <utility>
#include <vector>

#include "fairad/common.hpp"

namespace fairad {

class CsrMatrix {
 public:
  CsrMatrix() : row_ptr_(1, 0) {}

  CsrMatrix(index_t rows, index_t cols, std::vector<std::size_t> row_ptr,
            std::vector<index_t> col, std::vector<double> val)
      : rows_(rows),
        cols_(cols),
        row_ptr_(std::move(row_ptr)),
        col_(std::move(col)),
        val_(std::move(val)) {
    assert(row_ptr_.size() == static_cast<std::size_t>(rows_) + 1);
    assert(col_.size() == val_.size());
    assert(row_ptr_.back() == col_.size());
  }

  static CsrMatrix identity(index_t n) {
    std::vector<std::size_t> ptr(n + 1);
    std::vector<index_t> col(n);
    for (index_t i = 0; i < n; ++i) {
      ptr[i + 1] = i + 1;
      col[i] = i;
    }
    return {n, n, std::move(ptr), std::move(col), std::vector<double>(n, 1.0)};
  }

  index_t rows() const { return rows_; }
  index_t cols() const { return cols_; }
  std::size_t nnz() const { return col_.size(); }

  std::span<const index_t> row_cols(index_t i) const {
    return {col_.data() + row_ptr_[i], row_ptr_[i + 1] - row_ptr_[i]};
  }
  std::span<const double> row_vals(index_t i) const {
    return {val_.data() + row_ptr_[i], row_ptr_[i + 1] - row_ptr_[i]};
  }

  const std::vector<std::size_t>& row_ptr() const { return row_ptr_; }
  const std::vector<index_t>& col_idx() const { return col_; }
  const std::vector<double>& values() const { return val_; }

  /// Entry (i, j), zero when absent. Requires sorted column indices.
  double at(index_t i, index_t j) const {
    auto c = row_cols(i);
    auto it = std::lower_bound(c.begin(), c.end(), j);
    if (it == c.end() || *it != j) return 0.0;
    return val_[row_ptr_[i] + static_cast<std::size_t>(it - c.begin())];
  }

  /// y = A x
  void multiply(std::span<const double> x, std::span<double> y) const {
    assert(x.size() == static_cast<std::size_t>(cols_));
    assert(y.size() == static_cast<std::size_t>(rows_));
    for (index_t i = 0; i < rows_; ++i) {
      double sum = 0.0;
      for (std::size_t p = row_ptr_[i]; p < row_ptr_[i + 1]; ++p)
        sum += val_[p] * x[col_[p]];
      y[i] = sum;
    }
  }

  std::vector<double> row_sums() const {
    std::vector<double> s(rows_, 0.0);
    for (index_t i = 0; i < rows_; ++i)
      for (std::size_t p = row_ptr_[i]; p < row_ptr_[i + 1]; ++p) s[i] += val_[p];
    return s;
  }

  /// y = x^T A (row vector times matrix).
  std::vector<double> left_multiply(std::span<const double> x) const {
    std::vector<double> y(cols_, 0.0);
    for (index_t i = 0; i < rows_; ++i)
      for (std::size_t p = row_ptr_[i]; p < row_ptr_[i + 1]; ++p)
        y[col_[p]] += x[i] * val_[p];
    return y;
  }

  double sum() const {
    double s = 0.0;
    for (double v : val_) s += v;
    return s;
  }

  CsrMatrix transpose() const {
    std::vector<std::size_t> ptr(cols_ + 1, 0);
    for (index_t c : col_) ++ptr[c + 1];
    for (index_t j = 0; j < cols_; ++j) ptr[j + 1] += ptr[j];
    std::vector<index_t> col(nnz());
    std::vector<double> val(nnz());
    std::vector<std::size_t> next(ptr.begin(), ptr.end() - 1);
    // Rows are visited in order, so each output row comes out sorted.
    for (index_t i = 0; i < rows_; ++i) {
      for (std::size_t p = row_ptr_[i]; p < row_ptr_[i + 1]; ++p) {
        const std::size_t q = next[col_[p]]++;
        col[q] = i;
        val[q] = val_[p];
      }
    }
    return {cols_, rows_, std::move(ptr), std::move(col), std::move(val)};
  }

 private:
  index_t rows_ = 0;
  index_t cols_ = 0;
  std::vector<std::size_t> row_ptr_;
  std::vector<index_t> col_;
  std::vector<double> val_;
};

/// C = A B (Gustavson row-by-row with a dense accumulator). Output rows
/// are sorted; accumulation order per entry follows A's then B's storage
/// order, so the result is deterministic.
inline CsrMatrix multiply(const CsrMatrix& a, const CsrMatrix& b) {
  if (a.cols() != b.rows())
    throw ValidationError("sparse product: shape mismatch");
  const index_t n = a.rows();
  const index_t m = b.cols();
  std::vector<double> acc(m, 0.0);
  std::vector<char> used(m, 0);
  std::vector<index_t> touched;
  std::vector<std::size_t> ptr(n + 1, 0);
  std::vector<index_t> col;
  std::vector<double> val;
  for (index_t i = 0; i < n; ++i) {
    touched.clear();
    auto ac = a.row_cols(i);
    auto av = a.row_vals(i);
    for (std::size_t p = 0; p < ac.size(); ++p) {
      auto bc = b.row_cols(ac[p]);
      auto bv = b.row_vals(ac[p]);
      for (std::size_t q = 0; q < bc.size(); ++q) {
        const index_t j = bc[q];
        if (!used[j]) {
          used[j] = 1;
          touched.push_back(j);
        }
        acc[j] += av[p] * bv[q];
      }
    }
    std::sort(touched.begin(), touched.end());
    for (index_t j : touched) {
      col.push_back(j);
      val.push_back(acc[j]);
      acc[j] = 0.0;
      used[j] = 0;
    }
    ptr[i + 1] = col.size();
  }
  return {n, m, std::move(ptr), std::move(col), std::move(val)};
}

}  // namespace fairad
