// Text formats: edge lists, per-node label files and id maps.
//
// Edge list: one "u v" or "u v w" row per edge, '#' starts a comment. A
// leading "# nodes: N" comment fixes the node count so trailing isolated
// nodes survive a save/load round trip.
#pragma once

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <span>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "fairad/common.hpp"
#include "fairad/graph.hpp"

namespace fairad {

struct EdgeListFile {
  SparseGraph graph;
  std::size_t self_loops_dropped = 0;
};

namespace detail {

inline std::vector<std::string_view> split_fields(std::string_view line, char delimiter) {
  std::vector<std::string_view> out;
  const bool whitespace = delimiter == ' ' || delimiter == '\t';
  std::size_t i = 0;
  if (whitespace) {
    while (i < line.size()) {
      while (i < line.size() && std::isspace(static_cast<unsigned char>(line[i]))) ++i;
      const std::size_t start = i;
      while (i < line.size() && !std::isspace(static_cast<unsigned char>(line[i]))) ++i;
      if (i > start) out.push_back(line.substr(start, i - start));
    }
    return out;
  }
  while (true) {
    const std::size_t pos = line.find(delimiter, i);
    auto field = line.substr(i, pos == std::string_view::npos ? line.npos : pos - i);
    while (!field.empty() && std::isspace(static_cast<unsigned char>(field.front())))
      field.remove_prefix(1);
    while (!field.empty() && std::isspace(static_cast<unsigned char>(field.back())))
      field.remove_suffix(1);
    out.push_back(field);
    if (pos == std::string_view::npos) break;
    i = pos + 1;
  }
  return out;
}

inline bool parse_int(std::string_view s, long long& out) {
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc() && p == s.data() + s.size();
}

inline bool parse_double(std::string_view s, double& out) {
  std::string tmp(s);
  char* end = nullptr;
  out = std::strtod(tmp.c_str(), &end);
  return !tmp.empty() && end == tmp.c_str() + tmp.size();
}

inline std::string_view strip(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

inline std::ifstream open_input(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  return in;
}

inline std::ofstream open_output(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  return out;
}

}  // namespace detail

/// Reads an edge list. Rows whose delimiter is ' ' or '\t' are split on any
/// run of whitespace; other delimiters split exactly.
inline EdgeListFile load_edge_list(const std::filesystem::path& path, char delimiter = ' ') {
  auto in = detail::open_input(path);
  std::vector<Edge> edges;
  long long max_id = -1;
  long long declared_nodes = -1;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    auto text = detail::strip(line);
    if (text.empty()) continue;
    if (text.front() == '#') {
      auto body = detail::strip(text.substr(1));
      constexpr std::string_view key = "nodes:";
      long long n = 0;
      if (body.substr(0, key.size()) == key &&
          detail::parse_int(detail::strip(body.substr(key.size())), n) && n >= 0)
        declared_nodes = n;
      continue;
    }
    auto fields = detail::split_fields(text, delimiter);
    if (fields.size() != 2 && fields.size() != 3)
      throw ParseError("expected 'u v' or 'u v w'", lineno);
    long long u = 0, v = 0;
    if (!detail::parse_int(fields[0], u) || !detail::parse_int(fields[1], v))
      throw ParseError("node ids must be integers", lineno);
    if (u < 0 || v < 0) throw ParseError("node ids must be >= 0", lineno);
    if (u > INT32_MAX - 1 || v > INT32_MAX - 1) throw ParseError("node id too large", lineno);
    double w = 1.0;
    if (fields.size() == 3) {
      if (!detail::parse_double(fields[2], w)) throw ParseError("bad weight", lineno);
      if (!(w > 0.0) || !std::isfinite(w))
        throw ValidationError("weight must be positive and finite (line " +
                              std::to_string(lineno) + ")");
    }
    max_id = std::max({max_id, u, v});
    edges.push_back({static_cast<index_t>(u), static_cast<index_t>(v), w});
  }
  const auto n = static_cast<index_t>(std::max(max_id + 1, declared_nodes));
  EdgeListFile out;
  out.graph = SparseGraph::from_edges(n, edges, &out.self_loops_dropped);
  return out;
}

inline void save_edge_list(const SparseGraph& g, const std::filesystem::path& path,
                           bool write_weights = true) {
  auto out = detail::open_output(path);
  out << "# nodes: " << g.size() << '\n';
  for (const Edge& e : g.edges()) {
    out << e.u << '\t' << e.v;
    if (write_weights) out << '\t' << format_double(e.w);
    out << '\n';
  }
  if (!out) throw IoError("write failed: " + path.string());
}

/// Per-node integer labels: either one value per line (line i is node i)
/// or "node,label" rows. A non-numeric first row is taken as a header.
inline std::vector<long long> load_node_labels(const std::filesystem::path& path) {
  auto in = detail::open_input(path);
  std::vector<long long> plain;
  std::map<long long, long long> keyed;
  std::string line;
  std::size_t lineno = 0;
  bool first = true;
  int mode = 0;  // 1 = plain, 2 = keyed
  while (std::getline(in, line)) {
    ++lineno;
    auto text = detail::strip(line);
    if (text.empty() || text.front() == '#') continue;
    auto fields = detail::split_fields(text, text.find(',') != text.npos ? ',' : ' ');
    const int row_mode = fields.size() == 1 ? 1 : fields.size() == 2 ? 2 : 0;
    long long a = 0, b = 0;
    const bool numeric = row_mode == 1   ? detail::parse_int(fields[0], a)
                         : row_mode == 2 ? detail::parse_int(fields[0], a) &&
                                               detail::parse_int(fields[1], b)
                                         : false;
    if (!numeric) {
      if (first) {
        first = false;
        continue;
      }
      throw ParseError("expected 'label' or 'node,label'", lineno);
    }
    first = false;
    if (mode == 0) mode = row_mode;
    if (row_mode != mode) throw ParseError("mixed label file layouts", lineno);
    if (mode == 1) {
      plain.push_back(a);
    } else {
      if (a < 0) throw ParseError("node ids must be >= 0", lineno);
      if (!keyed.emplace(a, b).second) throw ParseError("duplicate node id", lineno);
    }
  }
  if (mode != 2) return plain;
  std::vector<long long> out(keyed.size());
  long long expect = 0;
  for (auto& [node, label] : keyed) {
    if (node != expect)
      throw ValidationError("label file is missing node " + std::to_string(expect));
    out[node] = label;
    ++expect;
  }
  return out;
}

template <typename T>
void save_node_labels(std::span<const T> labels, const std::filesystem::path& path) {
  auto out = detail::open_output(path);
  for (const T& l : labels) out << l << '\n';
  if (!out) throw IoError("write failed: " + path.string());
}

/// CSV "old_id,new_id" for every kept node.
inline void save_id_map(std::span<const index_t> new_to_old, const std::filesystem::path& path) {
  auto out = detail::open_output(path);
  out << "old_id,new_id\n";
  for (std::size_t i = 0; i < new_to_old.size(); ++i) out << new_to_old[i] << ',' << i << '\n';
  if (!out) throw IoError("write failed: " + path.string());
}

/// CSV "node_id,cluster" using original node ids.
inline void save_cluster_labels(std::span<const index_t> labels,
                                std::span<const index_t> new_to_old,
                                const std::filesystem::path& path) {
  auto out = detail::open_output(path);
  out << "node_id,cluster\n";
  for (std::size_t i = 0; i < labels.size(); ++i)
    out << (new_to_old.empty() ? static_cast<index_t>(i) : new_to_old[i]) << ','
        << labels[i] << '\n';
  if (!out) throw IoError("write failed: " + path.string());
}

}  // namespace fairad
