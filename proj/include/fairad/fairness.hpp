// Protected-group partitions, the centered group-indicator matrix and the
// balance metrics computed from them.
#pragma once

#include <algorithm>
#include <map>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "fairad/common.hpp"

namespace fairad {

class GroupPartition {
 public:
  GroupPartition() = default;

  /// Dense group ids in [0, h); every id in range must be used.
  GroupPartition(std::vector<index_t> group_of, index_t h)
      : group_of_(std::move(group_of)), h_(h), sizes_(h, 0) {
    for (index_t g : group_of_) {
      if (g < 0 || g >= h_) throw ValidationError("group id out of range");
      ++sizes_[g];
    }
    for (index_t s = 0; s < h_; ++s)
      if (sizes_[s] == 0)
        throw ValidationError("group " + std::to_string(s) + " is empty");
  }

  /// Arbitrary integer group ids, re-indexed densely in ascending order.
  static GroupPartition from_raw(std::span<const long long> raw) {
    std::map<long long, index_t> ids;
    for (long long r : raw) ids.emplace(r, 0);
    index_t next = 0;
    for (auto& [r, id] : ids) id = next++;
    std::vector<index_t> g;
    g.reserve(raw.size());
    for (long long r : raw) g.push_back(ids[r]);
    return {std::move(g), next};
  }

  index_t size() const { return static_cast<index_t>(group_of_.size()); }
  index_t num_groups() const { return h_; }
  index_t group_of(index_t i) const { return group_of_[i]; }
  const std::vector<index_t>& groups() const { return group_of_; }
  const std::vector<index_t>& group_sizes() const { return sizes_; }

 private:
  std::vector<index_t> group_of_;
  index_t h_ = 0;
  std::vector<index_t> sizes_;
};

/// Dense n x (h-1) matrix with F(i,s) = [i in V_s] - |V_s|/n. The last
/// group is the omitted one.
class FairnessMatrix {
 public:
  FairnessMatrix() = default;
  explicit FairnessMatrix(Eigen::MatrixXd f) : f_(std::move(f)) {}

  index_t rows() const { return static_cast<index_t>(f_.rows()); }
  index_t cols() const { return static_cast<index_t>(f_.cols()); }
  const Eigen::MatrixXd& dense() const { return f_; }

  /// out = F^T x, summed in node order.
  void transpose_apply(std::span<const double> x, std::span<double> out) const {
    for (index_t s = 0; s < cols(); ++s) {
      const double* col = f_.col(s).data();
      double sum = 0.0;
      for (index_t i = 0; i < rows(); ++i) sum += col[i] * x[i];
      out[s] = sum;
    }
  }

 private:
  Eigen::MatrixXd f_;
};

inline FairnessMatrix build_fairness_matrix(const GroupPartition& p) {
  if (p.num_groups() < 2)
    throw ValidationError("fairness matrix needs at least two groups");
  const index_t n = p.size();
  Eigen::MatrixXd f(n, p.num_groups() - 1);
  for (index_t s = 0; s + 1 < p.num_groups(); ++s) {
    const double share = static_cast<double>(p.group_sizes()[s]) / n;
    for (index_t i = 0; i < n; ++i) f(i, s) = (p.group_of(i) == s ? 1.0 : 0.0) - share;
  }
  return FairnessMatrix(std::move(f));
}

/// ||F^T x|| / ||x||, with the denominator floored at 1e-300.
inline double fairness_residual(const FairnessMatrix& f, std::span<const double> x) {
  std::vector<double> ftx(f.cols());
  f.transpose_apply(x, ftx);
  double xx = 0.0;
  for (double v : x) xx += v * v;
  return norm2(ftx) / std::max(std::sqrt(xx), 1e-300);
}

/// Minimum over ordered group pairs of the within-cluster count ratio.
/// A group with no members in the cluster gives 0.
inline double balance_from_counts(std::span<const index_t> counts) {
  if (counts.size() < 2) return 1.0;
  const auto [lo, hi] = std::minmax_element(counts.begin(), counts.end());
  if (*lo == 0) return 0.0;
  return static_cast<double>(*lo) / static_cast<double>(*hi);
}

inline double balance(const GroupPartition& p, std::span<const index_t> cluster_members) {
  if (cluster_members.empty()) throw ValidationError("balance of an empty cluster");
  std::vector<index_t> counts(p.num_groups(), 0);
  for (index_t i : cluster_members) ++counts[p.group_of(i)];
  return balance_from_counts(counts);
}

struct BalanceSummary {
  double average = 0.0;
  std::vector<double> per_cluster;
  std::vector<index_t> empty_clusters;  // scored 0 in the average
};

inline BalanceSummary average_balance(const GroupPartition& p,
                                      std::span<const index_t> labels, index_t k) {
  if (static_cast<index_t>(labels.size()) != p.size())
    throw ValidationError("label count does not match partition size");
  std::vector<std::vector<index_t>> counts(k, std::vector<index_t>(p.num_groups(), 0));
  std::vector<index_t> sizes(k, 0);
  for (index_t i = 0; i < p.size(); ++i) {
    const index_t l = labels[i];
    if (l < 0 || l >= k) throw ValidationError("cluster label out of range");
    ++counts[l][p.group_of(i)];
    ++sizes[l];
  }
  BalanceSummary out;
  double sum = 0.0;
  for (index_t l = 0; l < k; ++l) {
    double b = 0.0;
    if (sizes[l] == 0)
      out.empty_clusters.push_back(l);
    else
      b = balance_from_counts(counts[l]);
    out.per_cluster.push_back(b);
    sum += b;
  }
  out.average = k > 0 ? sum / k : 0.0;
  return out;
}

}  // namespace fairad
