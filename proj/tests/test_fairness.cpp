#include <gtest/gtest.h>

#include "fairad/fairness.hpp"
#include "test_util.hpp"

using namespace fairad;

TEST(FairnessMatrix, EqualSplit) {
  auto f = build_fairness_matrix(GroupPartition({0, 0, 1, 1}, 2));
  ASSERT_EQ(f.rows(), 4);
  ASSERT_EQ(f.cols(), 1);
  const double want[] = {0.5, 0.5, -0.5, -0.5};
  for (int i = 0; i < 4; ++i) EXPECT_DOUBLE_EQ(f.dense()(i, 0), want[i]);
}

TEST(FairnessMatrix, UnequalSplit) {
  auto f = build_fairness_matrix(GroupPartition({0, 0, 1}, 2));
  EXPECT_NEAR(f.dense()(0, 0), 1.0 / 3, 1e-15);
  EXPECT_NEAR(f.dense()(1, 0), 1.0 / 3, 1e-15);
  EXPECT_NEAR(f.dense()(2, 0), -2.0 / 3, 1e-15);
}

TEST(FairnessMatrix, ColumnsSumToZero) {
  for (index_t h : {2, 3, 5}) {
    auto p = test_util::random_groups(37, h, h);
    auto f = build_fairness_matrix(p);
    EXPECT_EQ(f.cols(), h - 1);
    for (index_t s = 0; s < f.cols(); ++s) EXPECT_NEAR(f.dense().col(s).sum(), 0.0, 1e-13);
    EXPECT_TRUE(f.dense().isApprox(test_util::dense_fairness(p)));
  }
}

TEST(FairnessMatrix, SingleGroupRejected) {
  EXPECT_THROW(build_fairness_matrix(GroupPartition({0, 0, 0}, 1)), ValidationError);
}

TEST(GroupPartition, EmptyGroupRejected) {
  EXPECT_THROW(GroupPartition({0, 0, 2}, 3), ValidationError);
  EXPECT_THROW(GroupPartition({0, 5}, 2), ValidationError);
}

TEST(GroupPartition, FromRawReindexes) {
  std::vector<long long> raw = {10, -3, 10, 7};
  auto p = GroupPartition::from_raw(raw);
  EXPECT_EQ(p.num_groups(), 3);
  EXPECT_EQ(p.groups(), (std::vector<index_t>{2, 0, 2, 1}));
}

TEST(Balance, HandCounts) {
  EXPECT_DOUBLE_EQ(balance_from_counts(std::vector<index_t>{5, 5}), 1.0);
  EXPECT_DOUBLE_EQ(balance_from_counts(std::vector<index_t>{3, 1}), 1.0 / 3);
  EXPECT_DOUBLE_EQ(balance_from_counts(std::vector<index_t>{2, 2, 0}), 0.0);
}

TEST(Balance, MeanOfTwoClusters) {
  // cluster 0: one of each group; cluster 1: counts (2, 1)
  GroupPartition p({0, 1, 0, 0, 1}, 2);
  std::vector<index_t> labels = {0, 0, 1, 1, 1};
  auto b = average_balance(p, labels, 2);
  EXPECT_DOUBLE_EQ(b.per_cluster[0], 1.0);
  EXPECT_DOUBLE_EQ(b.per_cluster[1], 0.5);
  EXPECT_DOUBLE_EQ(b.average, 0.75);
}

TEST(Balance, ProportionalEqualGroups) {
  GroupPartition p({0, 1, 0, 1, 0, 1}, 2);
  auto b = average_balance(p, std::vector<index_t>{0, 0, 1, 1, 2, 2}, 3);
  EXPECT_DOUBLE_EQ(b.average, 1.0);
}

TEST(Balance, ThreeClustersFourNinths) {
  // counts per cluster: (2,2), (1,3), (4,0)
  std::vector<index_t> groups, labels;
  auto add = [&](index_t cluster, index_t g0, index_t g1) {
    for (index_t i = 0; i < g0; ++i) groups.push_back(0), labels.push_back(cluster);
    for (index_t i = 0; i < g1; ++i) groups.push_back(1), labels.push_back(cluster);
  };
  add(0, 2, 2);
  add(1, 1, 3);
  add(2, 4, 0);
  auto b = average_balance(GroupPartition(groups, 2), labels, 3);
  EXPECT_DOUBLE_EQ(b.average, 4.0 / 9);
}

TEST(Balance, EmptyClusterScoredZero) {
  GroupPartition p({0, 1, 0, 1}, 2);
  auto b = average_balance(p, std::vector<index_t>{0, 0, 0, 0}, 2);
  EXPECT_DOUBLE_EQ(b.average, 0.5);
  EXPECT_EQ(b.empty_clusters, (std::vector<index_t>{1}));
  EXPECT_THROW(balance(p, std::vector<index_t>{}), ValidationError);
}

TEST(Residual, Examples) {
  auto f = build_fairness_matrix(GroupPartition({0, 0, 1, 1}, 2));
  EXPECT_DOUBLE_EQ(fairness_residual(f, std::vector<double>{3, 3, 3, 3}), 0.0);
  EXPECT_DOUBLE_EQ(fairness_residual(f, std::vector<double>{0.5, 0.5, -0.5, -0.5}), 1.0);
  EXPECT_DOUBLE_EQ(fairness_residual(f, std::vector<double>{0, 0, 0, 0}), 0.0);
}
