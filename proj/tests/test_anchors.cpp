#include <gtest/gtest.h>

#include <set>

#include "fairad/anchors.hpp"
#include "fairad/eigensolver.hpp"
#include "fairad/kmeans.hpp"
#include "test_util.hpp"

using namespace fairad;

namespace {

SparseGraph two_triangles(double bridge) {
  std::vector<Edge> e = {{0, 1, 1}, {1, 2, 1}, {0, 2, 1}, {3, 4, 1}, {4, 5, 1}, {3, 5, 1}};
  e.push_back({2, 3, bridge});
  return SparseGraph::from_edges(6, e);
}

}  // namespace

TEST(LevelSelection, FirstFromCoarsest) {
  EXPECT_EQ(select_coarse_level(std::vector<index_t>{1000, 200, 40, 12}, 30), 2u);
  EXPECT_EQ(select_coarse_level(std::vector<index_t>{50}, 30), 0u);
  EXPECT_THROW(select_coarse_level(std::vector<index_t>{20}, 30), ValidationError);
}

TEST(Eigensolver, LanczosMatchesDense) {
  for (std::uint64_t seed = 0; seed < 3; ++seed) {
    auto g = test_util::random_connected_graph(300, 0.03, seed);
    EigenConfig dense_cfg, lanczos_cfg;
    lanczos_cfg.dense_threshold = 0;
    lanczos_cfg.seed = seed;
    auto a = smallest_eigenpairs(g, 4, dense_cfg);
    auto b = smallest_eigenpairs(g, 4, lanczos_cfg);
    const Eigen::MatrixXd l = test_util::dense_normalized_laplacian(g);
    for (int j = 0; j < 4; ++j) {
      EXPECT_NEAR(a.values[j], b.values[j], 1e-8);
      const Eigen::VectorXd v = b.vectors.col(j);
      EXPECT_LE((l * v - b.values[j] * v).norm(), 1e-6);
      EXPECT_NEAR(v.norm(), 1.0, 1e-10);
    }
    EXPECT_NEAR(a.values[0], 0.0, 1e-10);
  }
}

TEST(KMeans, SeparatedPointsAndDeterminism) {
  Eigen::MatrixXd pts(6, 2);
  pts << 0, 0, 0.1, 0, 0, 0.1, 5, 5, 5.1, 5, 5, 5.1;
  KMeansConfig cfg;
  cfg.seed = 3;
  auto a = kmeans(pts, 2, cfg);
  auto b = kmeans(pts, 2, cfg);
  EXPECT_EQ(a.labels, b.labels);
  EXPECT_EQ(a.labels[0], a.labels[1]);
  EXPECT_EQ(a.labels[0], a.labels[2]);
  EXPECT_EQ(a.labels[3], a.labels[5]);
  EXPECT_NE(a.labels[0], a.labels[3]);
}

TEST(KMeans, AllDegenerateIsClusteringError) {
  Eigen::MatrixXd pts = Eigen::MatrixXd::Ones(5, 2);
  EXPECT_THROW(kmeans(pts, 2, {}), ClusteringError);
}

TEST(CoarseSpectral, TwoTrianglesSeparated) {
  auto labels = spectral_cluster_coarse(two_triangles(1e-6), 2, {});
  EXPECT_EQ(labels[0], labels[1]);
  EXPECT_EQ(labels[1], labels[2]);
  EXPECT_EQ(labels[3], labels[4]);
  EXPECT_EQ(labels[4], labels[5]);
  EXPECT_NE(labels[0], labels[3]);
}

TEST(CoarseSpectral, CompleteGraphUsesBothLabels) {
  std::vector<Edge> e;
  for (index_t i = 0; i < 8; ++i)
    for (index_t j = i + 1; j < 8; ++j) e.push_back({i, j, 1});
  AnchorConfig cfg;
  cfg.m = 8;
  auto labels = spectral_cluster_coarse(SparseGraph::from_edges(8, e), 2, cfg);
  std::set<index_t> used(labels.begin(), labels.end());
  EXPECT_EQ(used, (std::set<index_t>{0, 1}));
}

TEST(CoarseSpectral, TwoNodes) {
  std::vector<Edge> e = {{0, 1, 1}};
  auto labels = spectral_cluster_coarse(SparseGraph::from_edges(2, e), 2, {});
  EXPECT_NE(labels[0], labels[1]);
}

TEST(AnchorConstraints, LevelZeroIsIdentity) {
  auto g = two_triangles(1.0);
  auto h = build_hierarchy(g, {});
  std::vector<index_t> labels = {0, 0, 0, 1, 1, 1};
  auto a = build_anchor_constraints(0, h, labels, 2);
  EXPECT_EQ(a.rep_nodes, (std::vector<index_t>{0, 1, 2, 3, 4, 5}));
  EXPECT_EQ(a.rep_labels, labels);
}

TEST(AnchorConstraints, SelectorAndIndicators) {
  AnchorSet a;
  a.rep_nodes = {5, 9, 11};
  a.rep_labels = {0, 1, 0};
  a.k = 2;
  a.n = 12;
  EXPECT_EQ(a.indicator(0), (std::vector<double>{1, 0, 1}));
  EXPECT_EQ(a.indicator(1), (std::vector<double>{0, 1, 0}));
  const Eigen::MatrixXd b = a.selector();
  ASSERT_EQ(b.rows(), 3);
  ASSERT_EQ(b.cols(), 12);
  EXPECT_EQ(b(0, 5), 1.0);
  EXPECT_EQ(b(1, 9), 1.0);
  EXPECT_EQ(b(2, 11), 1.0);
  EXPECT_EQ(b.sum(), 3.0);
}

TEST(AnchorConstraints, IndicatorsPartitionRepresentatives) {
  auto g = test_util::random_connected_graph(200, 0.05, 9);
  CoarseningConfig cc;
  cc.alpha = 0.05;
  auto h = build_hierarchy(g, cc);
  const std::size_t level = select_coarse_level(h, 10);
  AnchorConfig cfg;
  cfg.m = 10;
  cfg.k = 3;
  auto labels = spectral_cluster_coarse(h.levels[level].graph, 3, cfg);
  auto a = build_anchor_constraints(level, h, labels, 3);
  EXPECT_EQ(a.rep_nodes, h.levels[level].original_ids);
  for (std::size_t t = 0; t < a.size(); ++t) {
    double s = 0.0;
    for (index_t c = 0; c < 3; ++c) s += a.indicator(c)[t];
    EXPECT_EQ(s, 1.0);
  }
}

TEST(AnchorConstraints, MissingClusterRejected) {
  auto h = build_hierarchy(two_triangles(1.0), {});
  std::vector<index_t> labels(6, 0);
  EXPECT_THROW(build_anchor_constraints(0, h, labels, 2), ClusteringError);
}

TEST(AnchorConfig, Validation) {
  AnchorConfig cfg;
  cfg.k = 1;
  EXPECT_THROW(cfg.validate(), ValidationError);
  cfg.k = 4;
  cfg.m = 4;
  EXPECT_THROW(cfg.validate(), ValidationError);
}
