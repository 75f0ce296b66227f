// Permutation-minimized error rate against planted labels, optimal label
// matching, and the metrics report written next to every clustering run.
#pragma once

#include <cmath>
#include <limits>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "fairad/baseline.hpp"
#include "fairad/common.hpp"
#include "fairad/fairness.hpp"
#include "fairad/graph.hpp"

namespace fairad {

namespace detail {

// Hungarian algorithm (shortest augmenting paths with potentials) for a
// k x k minimum-cost assignment. Returns row -> column.
inline std::vector<index_t> hungarian_min(const std::vector<std::vector<double>>& cost) {
  const std::size_t k = cost.size();
  constexpr double inf = std::numeric_limits<double>::infinity();
  std::vector<double> u(k + 1, 0.0), v(k + 1, 0.0), minv(k + 1);
  std::vector<std::size_t> match(k + 1, 0), way(k + 1, 0);
  std::vector<char> used(k + 1);
  for (std::size_t i = 1; i <= k; ++i) {
    match[0] = i;
    std::size_t j0 = 0;
    std::fill(minv.begin(), minv.end(), inf);
    std::fill(used.begin(), used.end(), 0);
    do {
      used[j0] = 1;
      const std::size_t i0 = match[j0];
      double delta = inf;
      std::size_t j1 = 0;
      for (std::size_t j = 1; j <= k; ++j) {
        if (used[j]) continue;
        const double cur = cost[i0 - 1][j - 1] - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (std::size_t j = 0; j <= k; ++j) {
        if (used[j]) {
          u[match[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (match[j0] != 0);
    do {
      const std::size_t j1 = way[j0];
      match[j0] = match[j1];
      j0 = j1;
    } while (j0);
  }
  std::vector<index_t> row_to_col(k);
  for (std::size_t j = 1; j <= k; ++j) row_to_col[match[j] - 1] = static_cast<index_t>(j - 1);
  return row_to_col;
}

inline double assignment_value(const std::vector<std::vector<double>>& m,
                               const std::vector<index_t>& perm) {
  double s = 0.0;
  for (std::size_t l = 0; l < perm.size(); ++l) s += m[l][perm[l]];
  return s;
}

}  // namespace detail

/// Permutation pi maximizing sum_l confusion[l][pi(l)]. Among optimal
/// permutations the lexicographically smallest is returned.
inline std::vector<index_t> optimal_permutation(const std::vector<std::vector<double>>& confusion) {
  const std::size_t k = confusion.size();
  for (const auto& row : confusion)
    if (row.size() != k) throw ValidationError("confusion matrix must be square");
  if (k == 0) return {};
  double big = 0.0;
  for (const auto& row : confusion)
    for (double x : row) big = std::max(big, x);
  auto to_cost = [&](const std::vector<std::vector<double>>& m) {
    auto c = m;
    for (auto& row : c)
      for (double& x : row) x = big - x;
    return c;
  };
  const double best = detail::assignment_value(confusion, detail::hungarian_min(to_cost(confusion)));
  const double slack = 1e-9 * std::max(1.0, std::abs(best));

  // Fix rows in order, each to the smallest column that still admits an
  // optimal completion.
  std::vector<index_t> perm(k, -1);
  std::vector<char> col_used(k, 0);
  double fixed = 0.0;
  for (std::size_t l = 0; l < k; ++l) {
    for (std::size_t c = 0; c < k; ++c) {
      if (col_used[c]) continue;
      std::vector<std::size_t> rows, cols;
      for (std::size_t r = l + 1; r < k; ++r) rows.push_back(r);
      for (std::size_t cc = 0; cc < k; ++cc)
        if (!col_used[cc] && cc != c) cols.push_back(cc);
      double rest = 0.0;
      if (!rows.empty()) {
        std::vector<std::vector<double>> sub(rows.size(), std::vector<double>(cols.size()));
        for (std::size_t a = 0; a < rows.size(); ++a)
          for (std::size_t b = 0; b < cols.size(); ++b) sub[a][b] = confusion[rows[a]][cols[b]];
        rest = detail::assignment_value(sub, detail::hungarian_min(to_cost(sub)));
      }
      if (fixed + confusion[l][c] + rest >= best - slack) {
        perm[l] = static_cast<index_t>(c);
        col_used[c] = 1;
        fixed += confusion[l][c];
        break;
      }
    }
  }
  return perm;
}

/// confusion[l][m] = number of nodes predicted l with truth m.
inline std::vector<std::vector<double>> confusion_matrix(std::span<const index_t> pred,
                                                         std::span<const index_t> truth,
                                                         index_t k) {
  if (pred.size() != truth.size()) throw ValidationError("prediction and truth differ in length");
  std::vector<std::vector<double>> m(k, std::vector<double>(k, 0.0));
  for (std::size_t i = 0; i < pred.size(); ++i) {
    if (pred[i] < 0 || pred[i] >= k || truth[i] < 0 || truth[i] >= k)
      throw ValidationError("label out of range [0, k)");
    m[pred[i]][truth[i]] += 1.0;
  }
  return m;
}

/// (1/k) min over permutations U of ||V U - V*||_F on 0/1 indicator
/// matrices. Each node matched to the wrong column contributes 2 to the
/// squared norm, so the minimum is sqrt(2 (n - best overlap)).
inline double error_rate(std::span<const index_t> pred, std::span<const index_t> truth, index_t k) {
  if (k < 1) throw ValidationError("k must be >= 1");
  const auto conf = confusion_matrix(pred, truth, k);
  const auto perm = optimal_permutation(conf);
  const double overlap = detail::assignment_value(conf, perm);
  const double mismatched = static_cast<double>(pred.size()) - overlap;
  return std::sqrt(2.0 * std::max(0.0, mismatched)) / k;
}

struct MetricsReport {
  std::optional<double> error_rate;
  std::optional<double> average_balance;
  std::vector<double> per_cluster_balance;
  std::vector<index_t> empty_clusters;
  std::optional<double> ncut;
  std::vector<index_t> cluster_sizes;
  std::map<std::string, double> timings_ms;

  nlohmann::json to_json(bool include_timings = true) const {
    nlohmann::json j;
    j["error_rate"] = error_rate ? nlohmann::json(*error_rate) : nlohmann::json(nullptr);
    j["average_balance"] =
        average_balance ? nlohmann::json(*average_balance) : nlohmann::json(nullptr);
    j["per_cluster_balance"] = average_balance ? nlohmann::json(per_cluster_balance)
                                               : nlohmann::json(nullptr);
    j["empty_clusters"] = empty_clusters;
    j["ncut"] = ncut ? nlohmann::json(*ncut) : nlohmann::json(nullptr);
    j["cluster_sizes"] = cluster_sizes;
    if (include_timings) j["timings_ms"] = timings_ms;
    return j;
  }

  static MetricsReport from_json(const nlohmann::json& j) {
    MetricsReport r;
    if (!j.at("error_rate").is_null()) r.error_rate = j.at("error_rate").get<double>();
    if (!j.at("average_balance").is_null()) {
      r.average_balance = j.at("average_balance").get<double>();
      r.per_cluster_balance = j.at("per_cluster_balance").get<std::vector<double>>();
    }
    if (j.contains("empty_clusters"))
      r.empty_clusters = j.at("empty_clusters").get<std::vector<index_t>>();
    if (!j.at("ncut").is_null()) r.ncut = j.at("ncut").get<double>();
    r.cluster_sizes = j.at("cluster_sizes").get<std::vector<index_t>>();
    if (j.contains("timings_ms"))
      r.timings_ms = j.at("timings_ms").get<std::map<std::string, double>>();
    return r;
  }

  bool operator==(const MetricsReport&) const = default;
};

/// Balance fields need a partition; error_rate needs truth. The ncut is
/// left empty when some cluster has zero volume.
inline MetricsReport compile_report(std::span<const index_t> labels, index_t k,
                                    const SparseGraph& g, const GroupPartition* groups,
                                    std::optional<std::span<const index_t>> truth,
                                    std::map<std::string, double> timings = {}) {
  if (static_cast<index_t>(labels.size()) != g.size())
    throw ValidationError("labels do not match graph size");
  MetricsReport r;
  r.cluster_sizes.assign(k, 0);
  for (index_t l : labels) {
    if (l < 0 || l >= k) throw ValidationError("cluster label out of range");
    ++r.cluster_sizes[l];
  }
  if (truth) {
    if (truth->size() != labels.size()) throw ValidationError("truth does not match graph size");
    r.error_rate = error_rate(labels, *truth, k);
  }
  if (groups) {
    if (groups->size() != g.size()) throw ValidationError("groups do not match graph size");
    auto b = average_balance(*groups, labels, k);
    r.average_balance = b.average;
    r.per_cluster_balance = std::move(b.per_cluster);
    r.empty_clusters = std::move(b.empty_clusters);
  } else {
    for (index_t l = 0; l < k; ++l)
      if (r.cluster_sizes[l] == 0) r.empty_clusters.push_back(l);
  }
  try {
    r.ncut = ncut_value(g, labels, k);
  } catch (const ValidationError&) {
    r.ncut.reset();
  }
  r.timings_ms = std::move(timings);
  return r;
}

}  // namespace fairad
