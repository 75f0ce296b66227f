#include <gtest/gtest.h>

#include <cmath>

#include "fairad/algebraic_distance.hpp"
#include "test_util.hpp"

using namespace fairad;
using test_util::rel_diff;
using test_util::to_eigen;

namespace {

std::vector<double> random_vector(index_t n, std::uint64_t seed) {
  Rng rng(seed, "rhs");
  std::vector<double> b(n);
  for (auto& v : b) v = rng.uniform() - 0.5;
  return b;
}

// Exact solve of the saddle system [D F; F^T 0][x; l] = [W x_prev; 0].
Eigen::VectorXd kkt_step(const SparseGraph& g, const Eigen::MatrixXd& f, const Eigen::VectorXd& x) {
  const index_t n = g.size();
  const index_t c = static_cast<index_t>(f.cols());
  const Eigen::MatrixXd w = test_util::dense_adjacency(g);
  Eigen::MatrixXd k = Eigen::MatrixXd::Zero(n + c, n + c);
  k.topLeftCorner(n, n) = w.rowwise().sum().asDiagonal();
  k.topRightCorner(n, c) = f;
  k.bottomLeftCorner(c, n) = f.transpose();
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(n + c);
  rhs.head(n) = w * x;
  return k.fullPivLu().solve(rhs).head(n);
}

}  // namespace

TEST(Woodbury, MuZeroIsDiagonalSolve) {
  auto g = test_util::random_connected_graph(10, 0.3, 1);
  auto f = build_fairness_matrix(test_util::random_groups(10, 3, 1));
  auto b = random_vector(10, 2);
  auto x = woodbury_apply(g.degrees(), f, 0.0, b);
  for (index_t i = 0; i < 10; ++i) EXPECT_DOUBLE_EQ(x[i], b[i] / g.degrees()[i]);
}

TEST(Woodbury, NoConstraintsIsDiagonalSolve) {
  auto g = test_util::random_connected_graph(10, 0.3, 3);
  FairnessMatrix empty(Eigen::MatrixXd(10, 0));
  auto b = random_vector(10, 4);
  auto x = woodbury_apply(g.degrees(), empty, 1e9, b);
  for (index_t i = 0; i < 10; ++i) EXPECT_DOUBLE_EQ(x[i], b[i] / g.degrees()[i]);
}

TEST(Woodbury, MatchesDenseSolve) {
  for (std::uint64_t seed = 0; seed < 200; ++seed) {
    Rng rng(seed, "case");
    const index_t n = 5 + static_cast<index_t>(rng.below(40));
    const index_t h = 2 + static_cast<index_t>(rng.below(4));
    const double mu = std::pow(10.0, static_cast<double>(rng.below(10)));
    auto g = test_util::random_connected_graph(n, 0.3, seed);
    auto p = test_util::random_groups(n, std::min(h, n), seed);
    auto f = build_fairness_matrix(p);
    auto b = random_vector(n, seed);
    // long double keeps the reference accurate at mu = 1e9
    using MatL = Eigen::Matrix<long double, Eigen::Dynamic, Eigen::Dynamic>;
    const MatL fl = test_util::dense_fairness(p).cast<long double>();
    MatL a = static_cast<long double>(mu) * fl * fl.transpose();
    for (index_t i = 0; i < n; ++i) a(i, i) += g.degrees()[i];
    const Eigen::VectorXd ref =
        a.ldlt().solve(to_eigen(b).cast<long double>()).template cast<double>();
    EXPECT_LE(rel_diff(to_eigen(woodbury_apply(g.degrees(), f, mu, b)), ref), 1e-8)
        << "seed " << seed << " n " << n << " h " << h << " mu " << mu;
  }
}

TEST(Woodbury, ZeroDegreeRejected) {
  std::vector<Edge> e = {{0, 1, 1}};
  auto g = SparseGraph::from_edges(3, e);
  auto f = build_fairness_matrix(GroupPartition({0, 1, 0}, 2));
  EXPECT_THROW(WoodburyOperator(g.degrees(), f, 1.0), NumericalError);
}

TEST(ConstrainedJacobi, UnconstrainedTwoNode) {
  std::vector<Edge> e = {{0, 1, 1}};
  auto g = SparseGraph::from_edges(2, e);
  FairnessMatrix empty(Eigen::MatrixXd(2, 0));
  WoodburyOperator op(g.degrees(), empty, 1e9);
  auto x = constrained_jacobi(g, op, std::vector<double>{1, 0}, 1);
  EXPECT_DOUBLE_EQ(x[0], 0.0);
  EXPECT_DOUBLE_EQ(x[1], 1.0);
}

TEST(ConstrainedJacobi, ConstantIsFixedPoint) {
  auto g = test_util::random_connected_graph(15, 0.3, 8);
  FairnessMatrix empty(Eigen::MatrixXd(15, 0));
  WoodburyOperator op(g.degrees(), empty, 1e9);
  auto x = constrained_jacobi(g, op, std::vector<double>(15, 2.5), 7);
  for (double v : x) EXPECT_NEAR(v, 2.5, 1e-13);
}

TEST(ConstrainedJacobi, EachStepMatchesSaddleSolve) {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const index_t n = 8 + static_cast<index_t>(seed) * 4;
    auto g = test_util::random_connected_graph(n, 0.4, seed + 100);
    auto p = test_util::random_groups(n, 2 + static_cast<index_t>(seed % 3), seed);
    auto f = build_fairness_matrix(p);
    WoodburyOperator op(g.degrees(), f, 1e9);
    std::vector<double> x = initial_test_vector(n, seed, 0);
    for (int t = 1; t <= 3; ++t) {
      const Eigen::VectorXd ref = kkt_step(g, f.dense(), to_eigen(x));
      x = relax_step(g, op, x);
      EXPECT_LE(rel_diff(to_eigen(x), ref), 2e-4) << "seed " << seed << " step " << t;
    }
  }
}

TEST(ConstrainedJacobi, OutputsSatisfyConstraint) {
  for (index_t h : {2, 3, 5}) {
    auto g = test_util::random_connected_graph(120, 0.1, h);
    auto p = test_util::random_groups(120, h, h);
    auto f = build_fairness_matrix(p);
    RelaxationConfig cfg;
    cfg.seed = 3;
    auto tv = compute_test_vectors(g, f, cfg);
    for (int r = 0; r < tv.count(); ++r) EXPECT_LE(fairness_residual(f, tv.column(r)), 1e-5);
  }
}

TEST(ConstrainedJacobi, NormalizedOutput) {
  auto g = test_util::random_connected_graph(60, 0.2, 2);
  auto f = build_fairness_matrix(test_util::random_groups(60, 2, 2));
  RelaxationConfig cfg;
  auto tv = compute_test_vectors(g, f, cfg);
  for (int r = 0; r < tv.count(); ++r) {
    auto c = tv.column(r);
    double sum = 0.0;
    for (double v : c) sum += v;
    EXPECT_NEAR(sum, 0.0, 1e-12);
    EXPECT_NEAR(norm2(c), 1.0, 1e-12);
  }
}

TEST(ConstrainedJacobi, DeterministicAcrossJobCounts) {
  auto g = test_util::random_connected_graph(80, 0.2, 4);
  auto f = build_fairness_matrix(test_util::random_groups(80, 3, 4));
  RelaxationConfig one, many;
  one.seed = many.seed = 17;
  one.jobs = 1;
  many.jobs = 4;
  auto a = compute_test_vectors(g, f, one);
  auto b = compute_test_vectors(g, f, many);
  for (int r = 0; r < a.count(); ++r) EXPECT_EQ(a.column(r), b.column(r));
  many.seed = 18;
  EXPECT_NE(compute_test_vectors(g, f, many).column(0), a.column(0));
}

TEST(AlgebraicDistance, Basics) {
  TestVectorSet tv(3, 2);
  tv.set_column(0, std::vector<double>{0, 1, 0.3});
  tv.set_column(1, std::vector<double>{0, 0.25, -0.9});
  EXPECT_DOUBLE_EQ(algebraic_distance(tv, 0, 1), 1.0);
  EXPECT_DOUBLE_EQ(algebraic_distance(tv, 2, 2), 0.0);
  EXPECT_DOUBLE_EQ(algebraic_distance(tv, 0, 2), algebraic_distance(tv, 2, 0));
  EXPECT_DOUBLE_EQ(algebraic_distance(tv, 1, 2), 1.15);
}

TEST(Affinity, TriangleWeights) {
  std::vector<Edge> e = {{0, 1, 1}, {1, 2, 1}, {0, 2, 1}};
  auto g = SparseGraph::from_edges(3, e);
  TestVectorSet tv(3, 1);
  tv.set_column(0, std::vector<double>{0.0, 0.1, 0.3});
  auto w = build_algebraic_affinity(g, tv, 10.0);
  EXPECT_NEAR(w.weight(0, 1), std::exp(-1.0), 1e-14);
  EXPECT_NEAR(w.weight(1, 2), std::exp(-2.0), 1e-14);
  EXPECT_NEAR(w.weight(0, 2), std::exp(-3.0), 1e-14);
  EXPECT_EQ(w.weight(2, 0), w.weight(0, 2));
}

TEST(Affinity, ZeroDistanceAndSmallBeta) {
  std::vector<Edge> e = {{0, 1, 4}, {1, 2, 1}};
  auto g = SparseGraph::from_edges(3, e);
  TestVectorSet tv(3, 1);
  tv.set_column(0, std::vector<double>{0.5, 0.5, 3.0});
  auto w = build_algebraic_affinity(g, tv, 2.0);
  EXPECT_DOUBLE_EQ(w.weight(0, 1), 1.0);
  EXPECT_DOUBLE_EQ(w.weight(0, 2), 0.0);
  auto flat = build_algebraic_affinity(g, tv, 1e-300);
  EXPECT_DOUBLE_EQ(flat.weight(1, 2), 1.0);
  EXPECT_THROW(build_algebraic_affinity(g, tv, 0.0), ValidationError);
}

TEST(Affinity, UnderflowKeepsEdge) {
  std::vector<Edge> e = {{0, 1, 1}};
  auto g = SparseGraph::from_edges(2, e);
  TestVectorSet tv(2, 1);
  tv.set_column(0, std::vector<double>{0.0, 1.0});
  auto w = build_algebraic_affinity(g, tv, 1e6);
  EXPECT_GT(w.weight(0, 1), 0.0);
  EXPECT_EQ(w.num_edges(), 1u);
}
