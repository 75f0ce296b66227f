// Modified stochastic block model: h protected groups crossed with k fair
// ground-truth clusters; edge probability depends on whether the endpoints
// share a group and/or a cluster.
#pragma once

#include <array>
#include <cmath>
#include <filesystem>
#include <optional>
#include <vector>

#include "fairad/common.hpp"
#include "fairad/fairness.hpp"
#include "fairad/graph.hpp"
#include "fairad/io.hpp"

namespace fairad {

struct MsbmConfig {
  index_t n = 0;
  index_t h = 2;
  index_t k = 2;
  // Unset probabilities follow 10t, 7t, 4t, t with t = (ln n / n)^{2/3},
  // clamped to 1.
  std::optional<double> a, b, c, d;
  std::uint64_t seed = 0;

  static double scale(index_t n) {
    const double nn = static_cast<double>(n);
    return std::pow(std::log(nn) / nn, 2.0 / 3.0);
  }

  /// {a, b, c, d} after defaults and clamping.
  std::array<double, 4> probabilities() const {
    const double t = n > 1 ? scale(n) : 1.0;
    return {a.value_or(std::min(1.0, 10 * t)), b.value_or(std::min(1.0, 7 * t)),
            c.value_or(std::min(1.0, 4 * t)), d.value_or(std::min(1.0, t))};
  }

  void validate() const {
    if (h < 1 || k < 1) throw ValidationError("h and k must be >= 1");
    if (n < h * k) throw ValidationError("n must be at least h * k");
    for (double q : probabilities())
      if (!(q >= 0.0 && q <= 1.0)) throw ValidationError("edge probabilities must lie in [0, 1]");
  }
};

struct MsbmInstance {
  SparseGraph graph;
  GroupPartition groups;
  std::vector<index_t> truth;
};

/// Node t belongs to cluster t mod k and group floor(t / k) mod h, so every
/// (group, cluster) cell count is within one of n / (hk). Each unordered
/// pair is an edge independently with its case probability; pairs within a
/// block are visited by geometric skipping.
inline MsbmInstance msbm_generate(const MsbmConfig& cfg) {
  cfg.validate();
  const auto [pa, pb, pc, pd] = cfg.probabilities();
  const index_t n = cfg.n;
  const index_t cells = cfg.h * cfg.k;
  std::vector<index_t> truth(n), group(n);
  std::vector<std::vector<index_t>> members(cells);
  for (index_t t = 0; t < n; ++t) {
    truth[t] = t % cfg.k;
    group[t] = (t / cfg.k) % cfg.h;
    members[group[t] * cfg.k + truth[t]].push_back(t);
  }

  Rng rng(cfg.seed, "msbm");
  std::vector<Edge> edges;
  // Advances `pos` past a Geometric(q) number of failures.
  auto skip = [&](double q) -> double {
    if (q >= 1.0) return 0.0;
    return std::floor(std::log(rng.uniform_open_low()) / std::log1p(-q));
  };
  for (index_t x = 0; x < cells; ++x) {
    for (index_t y = x; y < cells; ++y) {
      const bool same_group = x / cfg.k == y / cfg.k;
      const bool same_cluster = x % cfg.k == y % cfg.k;
      const double q = same_group ? (same_cluster ? pa : pb) : (same_cluster ? pc : pd);
      if (q <= 0.0) continue;
      const auto& mx = members[x];
      const auto& my = members[y];
      // Pairs are enumerated row-major: (i, j) with j > i inside a block,
      // all of mx x my across blocks.
      const double rows = static_cast<double>(mx.size());
      const double cols = static_cast<double>(my.size());
      const double total = x == y ? rows * (rows - 1) / 2 : rows * cols;
      double pos = skip(q);
      while (pos < total) {
        const auto idx = static_cast<std::uint64_t>(pos);
        index_t u, v;
        if (x == y) {
          // Invert the triangular index: row i holds (rows - 1 - i) pairs.
          const auto m = static_cast<std::uint64_t>(mx.size());
          auto i = static_cast<std::uint64_t>(
              std::floor(((2.0 * m - 1) - std::sqrt((2.0 * m - 1) * (2.0 * m - 1) - 8.0 * idx)) / 2));
          auto start = [&](std::uint64_t r) { return r * (2 * m - r - 1) / 2; };
          while (i > 0 && start(i) > idx) --i;
          while (start(i + 1) <= idx) ++i;
          const std::uint64_t j = i + 1 + (idx - start(i));
          u = mx[i];
          v = mx[j];
        } else {
          u = mx[idx / my.size()];
          v = my[idx % my.size()];
        }
        edges.push_back({u, v, 1.0});
        pos += 1.0 + skip(q);
      }
    }
  }
  MsbmInstance inst;
  inst.graph = SparseGraph::from_edges(n, edges);
  inst.groups = GroupPartition(std::move(group), cfg.h);
  inst.truth = std::move(truth);
  return inst;
}

/// edges.tsv, groups.txt and truth.txt under `dir` (created if missing).
inline void write_instance(const MsbmInstance& inst, const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw IoError("cannot create " + dir.string() + ": " + ec.message());
  save_edge_list(inst.graph, dir / "edges.tsv", false);
  save_node_labels(std::span<const index_t>(inst.groups.groups()), dir / "groups.txt");
  save_node_labels(std::span<const index_t>(inst.truth), dir / "truth.txt");
}

inline MsbmInstance load_instance(const std::filesystem::path& dir) {
  MsbmInstance inst;
  inst.graph = load_edge_list(dir / "edges.tsv").graph;
  const auto groups = load_node_labels(dir / "groups.txt");
  inst.groups = GroupPartition::from_raw(groups);
  for (long long t : load_node_labels(dir / "truth.txt")) inst.truth.push_back(static_cast<index_t>(t));
  if (inst.groups.size() != inst.graph.size() ||
      static_cast<index_t>(inst.truth.size()) != inst.graph.size())
    throw ValidationError("instance files disagree on node count");
  return inst;
}

}  // namespace fairad
