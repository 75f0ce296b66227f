#include <gtest/gtest.h>

#include <algorithm>
#include <numeric>

#include "fairad/metrics.hpp"
#include "fairad/msbm.hpp"
#include "test_util.hpp"

using namespace fairad;

namespace {

// (1/k) min over column permutations of ||V U - V*||_F, by enumeration.
double brute_error(const std::vector<index_t>& pred, const std::vector<index_t>& truth, index_t k) {
  std::vector<index_t> perm(k);
  std::iota(perm.begin(), perm.end(), 0);
  double best = 1e300;
  do {
    double sq = 0.0;
    for (std::size_t i = 0; i < pred.size(); ++i)
      for (index_t c = 0; c < k; ++c) {
        const double v = perm[pred[i]] == c ? 1.0 : 0.0;
        const double t = truth[i] == c ? 1.0 : 0.0;
        sq += (v - t) * (v - t);
      }
    best = std::min(best, std::sqrt(sq));
  } while (std::next_permutation(perm.begin(), perm.end()));
  return best / k;
}

std::vector<index_t> random_labels(std::size_t n, index_t k, Rng& rng) {
  std::vector<index_t> l(n);
  for (auto& x : l) x = static_cast<index_t>(rng.below(k));
  return l;
}

}  // namespace

TEST(ErrorRate, Examples) {
  std::vector<index_t> t = {0, 0, 1, 1, 2, 2};
  EXPECT_DOUBLE_EQ(error_rate(t, t, 3), 0.0);
  std::vector<index_t> permuted = {2, 2, 0, 0, 1, 1};
  EXPECT_DOUBLE_EQ(error_rate(permuted, t, 3), 0.0);
  EXPECT_NEAR(error_rate(std::vector<index_t>{0, 0, 1, 0}, std::vector<index_t>{0, 0, 1, 1}, 2),
              std::sqrt(2.0) / 2, 1e-15);
  EXPECT_THROW(error_rate(std::vector<index_t>{0, 3}, std::vector<index_t>{0, 1}, 2),
               ValidationError);
  EXPECT_THROW(error_rate(std::vector<index_t>{0}, std::vector<index_t>{0, 1}, 2), ValidationError);
}

TEST(ErrorRate, MatchesEnumeration) {
  Rng rng(0, "pairs");
  for (int trial = 0; trial < 100; ++trial) {
    const index_t k = 1 + static_cast<index_t>(rng.below(6));
    const std::size_t n = 1 + rng.below(60);
    auto truth = random_labels(n, k, rng);
    auto pred = truth;
    // corrupt a random share of the prediction, then relabel it
    for (auto& x : pred)
      if (rng.uniform() < 0.3) x = static_cast<index_t>(rng.below(k));
    std::vector<index_t> relabel(k);
    std::iota(relabel.begin(), relabel.end(), 0);
    std::shuffle(relabel.begin(), relabel.end(), rng);
    for (auto& x : pred) x = relabel[x];
    EXPECT_NEAR(error_rate(pred, truth, k), brute_error(pred, truth, k), 1e-12)
        << "trial " << trial << " k " << k;
  }
}

TEST(OptimalPermutation, DiagonalAndAntiDiagonal) {
  EXPECT_EQ(optimal_permutation({{5, 0}, {0, 5}}), (std::vector<index_t>{0, 1}));
  EXPECT_EQ(optimal_permutation({{0, 0, 4}, {0, 4, 0}, {4, 0, 0}}), (std::vector<index_t>{2, 1, 0}));
}

TEST(OptimalPermutation, MatchesEnumerationIncludingTies) {
  Rng rng(1, "confusion");
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<std::vector<double>> m(5, std::vector<double>(5));
    // small counts make ties common
    for (auto& row : m)
      for (double& x : row) x = static_cast<double>(rng.below(4));
    std::vector<index_t> perm(5), best_perm;
    std::iota(perm.begin(), perm.end(), 0);
    double best = -1.0;
    do {
      double s = 0.0;
      for (int l = 0; l < 5; ++l) s += m[l][perm[l]];
      if (s > best) {  // first hit in lexicographic order wins ties
        best = s;
        best_perm = perm;
      }
    } while (std::next_permutation(perm.begin(), perm.end()));
    EXPECT_EQ(optimal_permutation(m), best_perm) << "trial " << trial;
  }
}

TEST(Report, WithoutTruthOrGroups) {
  auto g = test_util::random_connected_graph(6, 0.5, 1);
  std::vector<index_t> labels = {0, 0, 0, 1, 1, 1};
  auto r = compile_report(labels, 2, g, nullptr, std::nullopt);
  EXPECT_FALSE(r.error_rate);
  EXPECT_FALSE(r.average_balance);
  EXPECT_TRUE(r.ncut);
  const auto j = r.to_json();
  EXPECT_TRUE(j.at("error_rate").is_null());
  EXPECT_TRUE(j.at("average_balance").is_null());
  EXPECT_EQ(j.at("cluster_sizes"), nlohmann::json({3, 3}));
}

TEST(Report, PlantedRunHasAllFields) {
  MsbmConfig mc;
  mc.n = 60;
  mc.h = 2;
  mc.k = 3;
  mc.seed = 2;
  auto inst = msbm_generate(mc);
  auto lcc = largest_connected_component(inst.graph);
  auto truth = lcc.filter(inst.truth);
  std::vector<long long> raw(inst.groups.groups().begin(), inst.groups.groups().end());
  auto groups = GroupPartition::from_raw(lcc.filter(raw));
  auto r = compile_report(truth, 3, lcc.graph, &groups, std::span<const index_t>(truth),
                          {{"total", 1.5}});
  ASSERT_TRUE(r.error_rate);
  EXPECT_GE(*r.error_rate, 0.0);
  ASSERT_TRUE(r.average_balance);
  EXPECT_EQ(r.per_cluster_balance.size(), 3u);
  for (const char* key : {"error_rate", "average_balance", "per_cluster_balance", "empty_clusters",
                          "ncut", "cluster_sizes", "timings_ms"})
    EXPECT_TRUE(r.to_json().contains(key)) << key;
}

TEST(Report, JsonRoundTrip) {
  MetricsReport r;
  r.error_rate = 0.125;
  r.average_balance = 0.1 + 0.2;
  r.per_cluster_balance = {0.3, 1.0 / 3};
  r.empty_clusters = {};
  r.ncut = 0.7;
  r.cluster_sizes = {5, 7};
  r.timings_ms = {{"solve", 12.25}};
  const std::string text = r.to_json().dump();
  EXPECT_EQ(MetricsReport::from_json(nlohmann::json::parse(text)), r);
  MetricsReport bare;
  bare.cluster_sizes = {1, 1};
  EXPECT_EQ(MetricsReport::from_json(nlohmann::json::parse(bare.to_json().dump())), bare);
}
