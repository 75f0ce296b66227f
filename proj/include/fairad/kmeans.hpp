// Lloyd k-means with k-means++ seeding and seeded restarts.
#pragma once

#include <limits>
#include <vector>

#include <Eigen/Dense>

#include "fairad/common.hpp"

namespace fairad {

struct KMeansConfig {
  int restarts = 10;
  int max_iters = 300;
  std::uint64_t seed = 0;
};

struct KMeansResult {
  std::vector<index_t> labels;
  Eigen::MatrixXd centroids;  // k x dim
  double inertia = 0.0;
  int restart = -1;  // index of the winning restart
};

namespace detail {

inline index_t nearest_centroid(const Eigen::MatrixXd& points, Eigen::Index i,
                                const Eigen::MatrixXd& centroids, double* dist = nullptr) {
  index_t best = 0;
  double best_d = std::numeric_limits<double>::infinity();
  for (Eigen::Index c = 0; c < centroids.rows(); ++c) {
    const double d = (points.row(i) - centroids.row(c)).squaredNorm();
    if (d < best_d) {  // strict: ties keep the lower index
      best_d = d;
      best = static_cast<index_t>(c);
    }
  }
  if (dist) *dist = best_d;
  return best;
}

inline Eigen::MatrixXd kmeanspp_seed(const Eigen::MatrixXd& points, index_t k, Rng& rng) {
  const Eigen::Index n = points.rows();
  Eigen::MatrixXd centroids(k, points.cols());
  centroids.row(0) = points.row(static_cast<Eigen::Index>(rng.below(n)));
  std::vector<double> d2(n);
  for (Eigen::Index i = 0; i < n; ++i) d2[i] = (points.row(i) - centroids.row(0)).squaredNorm();
  for (index_t c = 1; c < k; ++c) {
    double total = 0.0;
    for (double v : d2) total += v;
    Eigen::Index pick = 0;
    if (total > 0.0) {
      const double target = rng.uniform() * total;
      double acc = 0.0;
      pick = n - 1;
      for (Eigen::Index i = 0; i < n; ++i) {
        acc += d2[i];
        if (acc > target && d2[i] > 0.0) {
          pick = i;
          break;
        }
      }
    } else {
      pick = static_cast<Eigen::Index>(rng.below(n));
    }
    centroids.row(c) = points.row(pick);
    for (Eigen::Index i = 0; i < n; ++i)
      d2[i] = std::min(d2[i], (points.row(i) - centroids.row(c)).squaredNorm());
  }
  return centroids;
}

}  // namespace detail

/// Clusters the rows of `points`. Restarts that end with an empty cluster
/// are discarded; among the rest the lowest inertia wins (earliest restart
/// on ties). Throws ClusteringError when every restart is degenerate.
inline KMeansResult kmeans(const Eigen::MatrixXd& points, index_t k, const KMeansConfig& cfg) {
  const Eigen::Index n = points.rows();
  if (k < 1 || k > n) throw ValidationError("k-means: k must lie in [1, number of points]");
  KMeansResult best;
  best.inertia = std::numeric_limits<double>::infinity();
  for (int r = 0; r < std::max(1, cfg.restarts); ++r) {
    Rng rng(cfg.seed, "kmeans", static_cast<std::uint64_t>(r));
    Eigen::MatrixXd centroids = detail::kmeanspp_seed(points, k, rng);
    std::vector<index_t> labels(n, -1);
    bool degenerate = false;
    for (int it = 0; it < cfg.max_iters; ++it) {
      bool changed = false;
      for (Eigen::Index i = 0; i < n; ++i) {
        const index_t c = detail::nearest_centroid(points, i, centroids);
        if (c != labels[i]) {
          labels[i] = c;
          changed = true;
        }
      }
      Eigen::MatrixXd sums = Eigen::MatrixXd::Zero(k, points.cols());
      std::vector<index_t> counts(k, 0);
      for (Eigen::Index i = 0; i < n; ++i) {
        sums.row(labels[i]) += points.row(i);
        ++counts[labels[i]];
      }
      degenerate = false;
      for (index_t c = 0; c < k; ++c) {
        if (counts[c] == 0)
          degenerate = true;
        else
          centroids.row(c) = sums.row(c) / counts[c];
      }
      if (degenerate || !changed) break;
    }
    if (degenerate) continue;
    double inertia = 0.0;
    for (Eigen::Index i = 0; i < n; ++i)
      inertia += (points.row(i) - centroids.row(labels[i])).squaredNorm();
    if (inertia < best.inertia) {
      best.labels = std::move(labels);
      best.centroids = centroids;
      best.inertia = inertia;
      best.restart = r;
    }
  }
  if (best.restart < 0)
    throw ClusteringError("k-means left a cluster empty in every restart");
  return best;
}

}  // namespace fairad
