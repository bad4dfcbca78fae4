#pragma once

#include <chernoff_sbm/error.hpp>

#include <algorithm>
#include <cstdint>
#include <istream>
#include <ostream>
#include <span>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

namespace chernoff_sbm {

/// Undirected simple graph in compressed adjacency form: symmetric 0/1
/// adjacency with zero diagonal. Neighbor lists are sorted.
class Graph {
 public:
  Graph() = default;

  /// Each undirected edge must appear once, in either orientation.
  static Graph from_edges(std::size_t n, std::span<const std::pair<std::int64_t, std::int64_t>> edges) {
    std::vector<std::size_t> degree(n, 0);
    for (const auto& [i, j] : edges) {
      if (i < 0 || j < 0 || static_cast<std::size_t>(i) >= n || static_cast<std::size_t>(j) >= n) {
        throw Error(Errc::InvalidInput, "edge (" + std::to_string(i) + "," + std::to_string(j) +
                                            ") out of range for n = " + std::to_string(n));
      }
      if (i == j) throw Error(Errc::InvalidInput, "self-loop at node " + std::to_string(i));
      ++degree[static_cast<std::size_t>(i)];
      ++degree[static_cast<std::size_t>(j)];
    }
    Graph g;
    g.offsets_.assign(n + 1, 0);
    for (std::size_t i = 0; i < n; ++i) g.offsets_[i + 1] = g.offsets_[i] + degree[i];
    g.neighbors_.resize(g.offsets_[n]);
    std::vector<std::size_t> fill(g.offsets_.begin(), g.offsets_.end() - 1);
    for (const auto& [i, j] : edges) {
      g.neighbors_[fill[static_cast<std::size_t>(i)]++] = static_cast<std::uint32_t>(j);
      g.neighbors_[fill[static_cast<std::size_t>(j)]++] = static_cast<std::uint32_t>(i);
    }
    for (std::size_t i = 0; i < n; ++i) {
      auto first = g.neighbors_.begin() + static_cast<std::ptrdiff_t>(g.offsets_[i]);
      auto last = g.neighbors_.begin() + static_cast<std::ptrdiff_t>(g.offsets_[i + 1]);
      std::sort(first, last);
      if (std::adjacent_find(first, last) != last) {
        throw Error(Errc::InvalidInput, "duplicate edge at node " + std::to_string(i));
      }
    }
    return g;
  }

  /// Builds from a dense row-major 0/1 matrix, rejecting asymmetry, loops and
  /// non-binary entries.
  static Graph from_dense(std::size_t n, std::span<const int> entries) {
    if (entries.size() != n * n) throw Error(Errc::InvalidInput, "dense matrix is not n x n");
    std::vector<std::pair<std::int64_t, std::int64_t>> edges;
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < n; ++j) {
        const int a = entries[i * n + j];
        if (a != 0 && a != 1) throw Error(Errc::InvalidInput, "adjacency entries must be 0 or 1");
        if (a != entries[j * n + i]) {
          throw Error(Errc::InvalidInput, "adjacency is not symmetric at (" + std::to_string(i) +
                                              "," + std::to_string(j) + ")");
        }
        if (i == j && a != 0) throw Error(Errc::InvalidInput, "non-zero diagonal");
        if (j < i && a == 1) {
          edges.emplace_back(static_cast<std::int64_t>(i), static_cast<std::int64_t>(j));
        }
      }
    }
    return from_edges(n, edges);
  }

  std::size_t size() const { return offsets_.empty() ? 0 : offsets_.size() - 1; }
  std::size_t edge_count() const { return neighbors_.size() / 2; }

  std::span<const std::uint32_t> neighbors(std::size_t i) const {
    return {neighbors_.data() + offsets_[i], offsets_[i + 1] - offsets_[i]};
  }

  std::size_t degree(std::size_t i) const { return offsets_[i + 1] - offsets_[i]; }

  bool has_edge(std::size_t i, std::size_t j) const {
    const auto nb = neighbors(i);
    return std::binary_search(nb.begin(), nb.end(), static_cast<std::uint32_t>(j));
  }

  /// Subgraph induced by `nodes`; node nodes[k] becomes k.
  Graph induced(std::span<const std::size_t> nodes) const {
    std::vector<std::int64_t> position(size(), -1);
    for (std::size_t k = 0; k < nodes.size(); ++k) position[nodes[k]] = static_cast<std::int64_t>(k);
    std::vector<std::pair<std::int64_t, std::int64_t>> edges;
    for (std::size_t k = 0; k < nodes.size(); ++k) {
      for (auto v : neighbors(nodes[k])) {
        const auto pv = position[v];
        if (pv > static_cast<std::int64_t>(k)) edges.emplace_back(static_cast<std::int64_t>(k), pv);
      }
    }
    return from_edges(nodes.size(), edges);
  }

  /// Copy with every edge touching a `removed` node deleted.
  Graph without_nodes(const std::vector<bool>& removed) const {
    std::vector<std::pair<std::int64_t, std::int64_t>> edges;
    for (std::size_t i = 0; i < size(); ++i) {
      if (removed[i]) continue;
      for (auto v : neighbors(i)) {
        if (v > i && !removed[v]) {
          edges.emplace_back(static_cast<std::int64_t>(i), static_cast<std::int64_t>(v));
        }
      }
    }
    return from_edges(size(), edges);
  }

  std::vector<std::pair<std::int64_t, std::int64_t>> edges() const {
    std::vector<std::pair<std::int64_t, std::int64_t>> out;
    out.reserve(edge_count());
    for (std::size_t i = 0; i < size(); ++i) {
      for (auto v : neighbors(i)) {
        if (v > i) out.emplace_back(static_cast<std::int64_t>(i), static_cast<std::int64_t>(v));
      }
    }
    return out;
  }

  bool operator==(const Graph&) const = default;

 private:
  std::vector<std::size_t> offsets_{0};
  std::vector<std::uint32_t> neighbors_;
};

/// Edge-list file: header `n K`, then one `i j` line (0-based) per
/// undirected edge.
struct EdgeListFile {
  Graph graph;
  std::size_t communities = 0;
};

namespace detail {

inline bool next_content_line(std::istream& in, std::string& line, std::size_t& line_no) {
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const auto first = line.find_first_not_of(" \t");
    if (first == std::string::npos || line[first] == '#') continue;
    return true;
  }
  return false;
}

}  // namespace detail

inline EdgeListFile read_edge_list(std::istream& in) {
  std::string line;
  std::size_t line_no = 0;
  if (!detail::next_content_line(in, line, line_no)) {
    throw Error(Errc::InvalidInput, "edge list is empty; expected header `n K`");
  }
  std::int64_t n = 0;
  std::int64_t k = 0;
  {
    std::istringstream header(line);
    std::string rest;
    if (!(header >> n >> k) || (header >> rest) || n <= 0 || k <= 0) {
      throw Error(Errc::InvalidInput, "bad header `" + line + "`; expected `n K`");
    }
  }
  std::vector<std::pair<std::int64_t, std::int64_t>> edges;
  while (detail::next_content_line(in, line, line_no)) {
    std::istringstream row(line);
    std::int64_t i = 0;
    std::int64_t j = 0;
    std::string rest;
    if (!(row >> i >> j) || (row >> rest)) {
      throw Error(Errc::InvalidInput, "line " + std::to_string(line_no) + ": expected `i j`");
    }
    edges.emplace_back(i, j);
  }
  return {Graph::from_edges(static_cast<std::size_t>(n), edges), static_cast<std::size_t>(k)};
}

inline void write_edge_list(std::ostream& out, const Graph& graph, std::size_t communities) {
  out << graph.size() << ' ' << communities << '\n';
  for (const auto& [i, j] : graph.edges()) out << i << ' ' << j << '\n';
}

/// Dense 0/1 matrix: whitespace-separated rows, one row per line.
inline Graph read_dense_adjacency(std::istream& in) {
  std::string line;
  std::size_t line_no = 0;
  std::vector<int> entries;
  std::size_t width = 0;
  std::size_t rows = 0;
  while (detail::next_content_line(in, line, line_no)) {
    std::istringstream row(line);
    std::size_t count = 0;
    int a = 0;
    while (row >> a) {
      entries.push_back(a);
      ++count;
    }
    if (!row.eof()) throw Error(Errc::InvalidInput, "line " + std::to_string(line_no) + ": bad entry");
    if (rows == 0) width = count;
    if (count != width) throw Error(Errc::InvalidInput, "ragged dense adjacency matrix");
    ++rows;
  }
  if (rows != width) throw Error(Errc::InvalidInput, "dense adjacency matrix is not square");
  return Graph::from_dense(rows, entries);
}

inline std::vector<int> read_labels(std::istream& in) {
  std::vector<int> labels;
  std::string line;
  std::size_t line_no = 0;
  while (detail::next_content_line(in, line, line_no)) {
    std::istringstream row(line);
    int label = 0;
    std::string rest;
    if (!(row >> label) || (row >> rest) || label < 0) {
      throw Error(Errc::InvalidInput, "line " + std::to_string(line_no) + ": expected a label >= 0");
    }
    labels.push_back(label);
  }
  return labels;
}

inline void write_labels(std::ostream& out, std::span<const int> labels) {
  for (int z : labels) out << z << '\n';
}

}  // namespace chernoff_sbm
