#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <fstream>
#include <istream>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "rng.hpp"

namespace rrw {

using NodeId = std::uint32_t;

struct Neighbor {
  NodeId node;
  double weight;
};

class GraphError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ParseError : public GraphError {
 public:
  ParseError(std::size_t line, const std::string& what)
      : GraphError("line " + std::to_string(line) + ": " + what), line_(line) {}
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

/// Immutable weighted undirected simple graph, connected by construction.
/// Neighbour lists are sorted by node id.
class Graph {
 public:
  struct Edge {
    NodeId u;
    NodeId v;
    double weight = 1.0;
  };

  Graph() = default;

  /// Builds from an undirected edge list. Rejects self-loops, duplicates,
  /// non-positive weights and disconnected results.
  Graph(std::size_t node_count, const std::vector<Edge>& edges,
        std::vector<std::string> labels = {})
      : adjacency_(node_count), labels_(std::move(labels)) {
    if (node_count == 0) throw GraphError("graph must have at least one node");
    for (const auto& e : edges) {
      if (e.u >= node_count || e.v >= node_count)
        throw GraphError("edge endpoint out of range");
      if (e.u == e.v) throw GraphError("self-loop at node " + label(e.u));
      if (!(e.weight > 0.0))
        throw GraphError("non-positive weight on edge " + label(e.u) + "-" + label(e.v));
      adjacency_[e.u].push_back({e.v, e.weight});
      adjacency_[e.v].push_back({e.u, e.weight});
    }
    for (NodeId u = 0; u < node_count; ++u) {
      auto& row = adjacency_[u];
      std::sort(row.begin(), row.end(),
                [](const Neighbor& a, const Neighbor& b) { return a.node < b.node; });
      for (std::size_t k = 1; k < row.size(); ++k)
        if (row[k].node == row[k - 1].node)
          throw GraphError("duplicate edge " + label(u) + "-" + label(row[k].node));
    }
    weighted_degree_.resize(node_count);
    for (NodeId u = 0; u < node_count; ++u) {
      double s = 0.0;
      for (const auto& nb : adjacency_[u]) s += nb.weight;
      weighted_degree_[u] = s;
      edge_count_ += adjacency_[u].size();
    }
    edge_count_ /= 2;
    if (!is_connected()) throw GraphError("graph is not connected");
  }

  std::size_t node_count() const noexcept { return adjacency_.size(); }
  std::size_t edge_count() const noexcept { return edge_count_; }

  const std::vector<Neighbor>& neighbors(NodeId u) const { return adjacency_[u]; }
  std::size_t degree(NodeId u) const { return adjacency_[u].size(); }
  double weighted_degree(NodeId u) const { return weighted_degree_[u]; }

  std::size_t min_degree() const {
    std::size_t d = adjacency_.empty() ? 0 : degree(0);
    for (NodeId u = 0; u < node_count(); ++u) d = std::min(d, degree(u));
    return d;
  }
  std::size_t max_degree() const {
    std::size_t d = 0;
    for (NodeId u = 0; u < node_count(); ++u) d = std::max(d, degree(u));
    return d;
  }

  /// Position of v in u's neighbour list, or degree(u) when absent.
  std::size_t neighbor_index(NodeId u, NodeId v) const {
    const auto& row = adjacency_[u];
    auto it = std::lower_bound(row.begin(), row.end(), v,
                               [](const Neighbor& a, NodeId x) { return a.node < x; });
    if (it == row.end() || it->node != v) return row.size();
    return static_cast<std::size_t>(it - row.begin());
  }

  bool has_edge(NodeId u, NodeId v) const { return neighbor_index(u, v) < degree(u); }

  double weight(NodeId u, NodeId v) const {
    auto k = neighbor_index(u, v);
    return k < degree(u) ? adjacency_[u][k].weight : 0.0;
  }

  std::string label(NodeId u) const {
    return u < labels_.size() ? labels_[u] : std::to_string(u);
  }
  const std::vector<std::string>& labels() const noexcept { return labels_; }

  /// Node id for a label, or node_count() if unknown.
  NodeId find_label(std::string_view s) const {
    if (labels_.empty()) {
      std::size_t v = 0;
      try {
        v = std::stoul(std::string(s));
      } catch (const std::exception&) {
        return static_cast<NodeId>(node_count());
      }
      return static_cast<NodeId>(std::min(v, node_count()));
    }
    for (NodeId u = 0; u < labels_.size(); ++u)
      if (labels_[u] == s) return u;
    return static_cast<NodeId>(node_count());
  }

 private:
  bool is_connected() const {
    std::vector<char> seen(node_count(), 0);
    std::vector<NodeId> stack{0};
    seen[0] = 1;
    std::size_t reached = 1;
    while (!stack.empty()) {
      NodeId u = stack.back();
      stack.pop_back();
      for (const auto& nb : adjacency_[u])
        if (!seen[nb.node]) {
          seen[nb.node] = 1;
          ++reached;
          stack.push_back(nb.node);
        }
    }
    return reached == node_count();
  }

  std::vector<std::vector<Neighbor>> adjacency_;
  std::vector<double> weighted_degree_;
  std::vector<std::string> labels_;
  std::size_t edge_count_ = 0;
};

// ---------------------------------------------------------------------------
// Edge-list ingestion

/// Parses "u v" / "u v w" lines; '#' starts a comment. Labels are mapped to
/// dense ids in order of first appearance.
inline Graph load_edge_list(std::istream& in) {
  std::unordered_map<std::string, NodeId> ids;
  std::vector<std::string> labels;
  std::vector<Graph::Edge> edges;
  auto intern = [&](const std::string& s) {
    auto [it, inserted] = ids.emplace(s, static_cast<NodeId>(labels.size()));
    if (inserted) labels.push_back(s);
    return it->second;
  };

  std::string line;
  std::size_t lineno = 0;
  std::map<std::pair<NodeId, NodeId>, std::size_t> seen;
  while (std::getline(in, line)) {
    ++lineno;
    if (auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
    std::istringstream fields(line);
    std::vector<std::string> tok;
    for (std::string t; fields >> t;) tok.push_back(t);
    if (tok.empty()) continue;
    if (tok.size() != 2 && tok.size() != 3)
      throw ParseError(lineno, "expected 'u v' or 'u v w'");
    double w = 1.0;
    if (tok.size() == 3) {
      std::size_t used = 0;
      try {
        w = std::stod(tok[2], &used);
      } catch (const std::exception&) {
        throw ParseError(lineno, "bad weight '" + tok[2] + "'");
      }
      if (used != tok[2].size()) throw ParseError(lineno, "bad weight '" + tok[2] + "'");
      if (!(w > 0.0)) throw ParseError(lineno, "weight must be positive");
    }
    if (tok[0] == tok[1]) throw ParseError(lineno, "self-loop at '" + tok[0] + "'");
    NodeId u = intern(tok[0]);
    NodeId v = intern(tok[1]);
    auto [lo, hi] = std::minmax(u, v);
    if (auto [it, fresh] = seen.emplace(std::pair{lo, hi}, lineno); !fresh)
      throw ParseError(lineno, "duplicate edge '" + tok[0] + " " + tok[1] + "' (first on line " +
                                   std::to_string(it->second) + ")");
    edges.push_back({u, v, w});
  }
  if (labels.empty()) throw GraphError("edge list is empty");
  const std::size_t n = labels.size();
  return Graph(n, edges, std::move(labels));
}

inline Graph load_edge_list_text(std::string_view text) {
  std::istringstream in{std::string(text)};
  return load_edge_list(in);
}

inline Graph load_edge_list_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw GraphError("cannot open edge list '" + path + "'");
  return load_edge_list(in);
}

// ---------------------------------------------------------------------------
// Node attributes ("node v1 v2 ...", fixed dimension per file)

struct NodeAttributes {
  std::size_t dimension = 0;
  std::vector<std::vector<double>> values;  // indexed by NodeId
};

inline NodeAttributes load_node_attributes(std::istream& in, const Graph& g) {
  NodeAttributes out;
  out.values.assign(g.node_count(), {});
  std::vector<char> present(g.node_count(), 0);
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
    std::istringstream fields(line);
    std::string node;
    if (!(fields >> node)) continue;
    std::vector<double> v;
    for (std::string t; fields >> t;) {
      try {
        v.push_back(std::stod(t));
      } catch (const std::exception&) {
        throw ParseError(lineno, "bad attribute value '" + t + "'");
      }
    }
    if (v.empty()) throw ParseError(lineno, "node has no attribute values");
    if (out.dimension == 0) out.dimension = v.size();
    if (v.size() != out.dimension) throw ParseError(lineno, "attribute dimension mismatch");
    NodeId id = g.find_label(node);
    if (id >= g.node_count()) throw ParseError(lineno, "unknown node '" + node + "'");
    if (present[id]) throw ParseError(lineno, "duplicate attributes for '" + node + "'");
    present[id] = 1;
    out.values[id] = std::move(v);
  }
  for (NodeId u = 0; u < g.node_count(); ++u)
    if (!present[u]) throw GraphError("missing attributes for node " + g.label(u));
  return out;
}

inline NodeAttributes load_node_attributes_file(const std::string& path, const Graph& g) {
  std::ifstream in(path);
  if (!in) throw GraphError("cannot open attribute file '" + path + "'");
  return load_node_attributes(in, g);
}

// ---------------------------------------------------------------------------
// Generators. All edge weights are 1; randomness comes only from `seed`.

inline constexpr int kMaxGeneratorAttempts = 1000;

namespace detail {

inline bool connected(std::size_t n, const std::vector<Graph::Edge>& edges) {
  std::vector<std::vector<NodeId>> adj(n);
  for (const auto& e : edges) {
    adj[e.u].push_back(e.v);
    adj[e.v].push_back(e.u);
  }
  std::vector<char> seen(n, 0);
  std::vector<NodeId> stack{0};
  seen[0] = 1;
  std::size_t reached = 1;
  while (!stack.empty()) {
    NodeId u = stack.back();
    stack.pop_back();
    for (NodeId v : adj[u])
      if (!seen[v]) {
        seen[v] = 1;
        ++reached;
        stack.push_back(v);
      }
  }
  return reached == n;
}

}  // namespace detail

inline Graph gen_erdos_renyi(std::size_t n, double p_edge, std::uint64_t seed) {
  if (n < 1) throw std::invalid_argument("erdos-renyi: n must be positive");
  if (!(p_edge >= 0.0 && p_edge <= 1.0))
    throw std::invalid_argument("erdos-renyi: edge probability must lie in [0,1]");
  for (int attempt = 0; attempt < kMaxGeneratorAttempts; ++attempt) {
    Engine rng(mix_key(seed, static_cast<std::uint64_t>(attempt)));
    std::vector<Graph::Edge> edges;
    for (NodeId u = 0; u < n; ++u)
      for (NodeId v = u + 1; v < n; ++v)
        if (uniform01(rng) < p_edge) edges.push_back({u, v, 1.0});
    if (detail::connected(n, edges)) return Graph(n, edges);
  }
  throw GraphError("erdos-renyi: no connected sample within attempt limit");
}

/// Complete binary tree with levels 0..depth (2^(depth+1) - 1 nodes).
inline Graph gen_binary_tree(std::size_t depth) {
  if (depth > 20) throw std::invalid_argument("binary tree: depth too large");
  std::size_t n = (std::size_t{1} << (depth + 1)) - 1;
  std::vector<Graph::Edge> edges;
  for (NodeId v = 1; v < n; ++v) edges.push_back({(v - 1) / 2, v, 1.0});
  return Graph(n, edges);
}

/// Random d-regular graph by the configuration model, rejecting samples with
/// loops, multi-edges or more than one component.
inline Graph gen_d_regular(std::size_t n, std::size_t d, std::uint64_t seed) {
  if ((n * d) % 2 != 0) throw std::invalid_argument("d-regular: n*d must be even");
  if (d >= n) throw std::invalid_argument("d-regular: need d < n");
  if (d == 0 && n > 1) throw std::invalid_argument("d-regular: d = 0 is disconnected");
  for (int attempt = 0; attempt < kMaxGeneratorAttempts; ++attempt) {
    Engine rng(mix_key(seed, static_cast<std::uint64_t>(attempt)));
    std::vector<NodeId> stubs;
    stubs.reserve(n * d);
    for (NodeId u = 0; u < n; ++u)
      for (std::size_t k = 0; k < d; ++k) stubs.push_back(u);
    for (std::size_t k = stubs.size(); k > 1; --k)
      std::swap(stubs[k - 1], stubs[uniform_index(rng, k)]);
    std::vector<Graph::Edge> edges;
    std::vector<std::pair<NodeId, NodeId>> keys;
    bool simple = true;
    for (std::size_t k = 0; k + 1 < stubs.size(); k += 2) {
      NodeId a = stubs[k], b = stubs[k + 1];
      if (a == b) {
        simple = false;
        break;
      }
      keys.emplace_back(std::min(a, b), std::max(a, b));
      edges.push_back({a, b, 1.0});
    }
    if (!simple) continue;
    std::sort(keys.begin(), keys.end());
    if (std::adjacent_find(keys.begin(), keys.end()) != keys.end()) continue;
    if (!detail::connected(n, edges)) continue;
    return Graph(n, edges);
  }
  throw GraphError("d-regular: no simple connected sample within attempt limit");
}

/// rows x cols lattice; node (r, c) has id r * cols + c.
inline Graph gen_grid_2d(std::size_t rows, std::size_t cols) {
  if (rows == 0 || cols == 0) throw std::invalid_argument("grid: empty dimension");
  std::vector<Graph::Edge> edges;
  for (std::size_t r = 0; r < rows; ++r)
    for (std::size_t c = 0; c < cols; ++c) {
      auto u = static_cast<NodeId>(r * cols + c);
      if (c + 1 < cols) edges.push_back({u, u + 1, 1.0});
      if (r + 1 < rows) edges.push_back({u, static_cast<NodeId>(u + cols), 1.0});
    }
  return Graph(rows * cols, edges);
}

// Small named graphs used throughout the tests and the CLI.

inline Graph path_graph(std::size_t n) {
  std::vector<Graph::Edge> edges;
  for (NodeId v = 1; v < n; ++v) edges.push_back({v - 1, v, 1.0});
  return Graph(n, edges);
}

inline Graph cycle_graph(std::size_t n) {
  if (n < 3) throw std::invalid_argument("cycle: need n >= 3");
  std::vector<Graph::Edge> edges;
  for (NodeId v = 0; v < n; ++v) edges.push_back({v, static_cast<NodeId>((v + 1) % n), 1.0});
  return Graph(n, edges);
}

inline Graph complete_graph(std::size_t n) {
  std::vector<Graph::Edge> edges;
  for (NodeId u = 0; u < n; ++u)
    for (NodeId v = u + 1; v < n; ++v) edges.push_back({u, v, 1.0});
  return Graph(n, edges);
}

/// Star with node 0 at the centre and `leaves` leaves.
inline Graph star_graph(std::size_t leaves) {
  std::vector<Graph::Edge> edges;
  for (NodeId v = 1; v <= leaves; ++v) edges.push_back({0, v, 1.0});
  return Graph(leaves + 1, edges);
}

}  // namespace rrw
