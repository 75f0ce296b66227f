#pragma once

#include <vector>

#include <Eigen/Dense>

#include "fairad/common.hpp"

namespace fairad {

/// Per-node cluster labels in [0, k). When soft indicators are present
/// (n x k), each label is the row argmax with ties to the lowest index.
struct ClusterAssignment {
  std::vector<index_t> labels;
  Eigen::MatrixXd indicators;
  index_t k = 0;

  index_t size() const { return static_cast<index_t>(labels.size()); }

  std::vector<index_t> cluster_sizes() const {
    std::vector<index_t> s(k, 0);
    for (index_t l : labels) ++s[l];
    return s;
  }

  bool degenerate() const {
    for (index_t s : cluster_sizes())
      if (s == 0) return true;
    return false;
  }
};

inline ClusterAssignment assign_labels(Eigen::MatrixXd indicators) {
  ClusterAssignment a;
  a.k = static_cast<index_t>(indicators.cols());
  a.labels.resize(indicators.rows());
  for (Eigen::Index j = 0; j < indicators.rows(); ++j) {
    index_t best = 0;
    for (Eigen::Index i = 1; i < indicators.cols(); ++i) {
      if (!std::isfinite(indicators(j, i))) throw NumericalError("non-finite indicator value");
      if (indicators(j, i) > indicators(j, best)) best = static_cast<index_t>(i);
    }
    if (a.k > 0 && !std::isfinite(indicators(j, 0))) throw NumericalError("non-finite indicator value");
    a.labels[j] = best;
  }
  a.indicators = std::move(indicators);
  return a;
}

}  // namespace fairad
