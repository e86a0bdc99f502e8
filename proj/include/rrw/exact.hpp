#pragma once

// Exact (non-Monte-Carlo) reference quantities on desk-scale graphs.

#include <Eigen/Dense>

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <deque>
#include <stdexcept>
#include <vector>

#include "graph.hpp"

namespace rrw {

using DenseMatrix = Eigen::MatrixXd;
using DenseVector = Eigen::VectorXd;

inline constexpr std::size_t kMaxExactNodes = 5000;

inline void require_exact_size(const Graph& g) {
  if (g.node_count() > kMaxExactNodes)
    throw std::length_error("exact computation limited to " + std::to_string(kMaxExactNodes) +
                            " nodes");
}

/// Simple-random-walk transition matrix: P_ij = 1/d_i on edges.
inline DenseMatrix transition_matrix(const Graph& g) {
  require_exact_size(g);
  const auto n = static_cast<Eigen::Index>(g.node_count());
  DenseMatrix p = DenseMatrix::Zero(n, n);
  for (NodeId u = 0; u < g.node_count(); ++u) {
    const double inv = 1.0 / static_cast<double>(g.degree(u));
    for (const auto& nb : g.neighbors(u)) p(u, nb.node) = inv;
  }
  return p;
}

/// W_ij = a_ij / sqrt(d~_i d~_j).
inline DenseMatrix normalized_adjacency(const Graph& g) {
  require_exact_size(g);
  const auto n = static_cast<Eigen::Index>(g.node_count());
  DenseMatrix w = DenseMatrix::Zero(n, n);
  for (NodeId u = 0; u < g.node_count(); ++u)
    for (const auto& nb : g.neighbors(u))
      w(u, nb.node) = nb.weight / std::sqrt(g.weighted_degree(u) * g.weighted_degree(nb.node));
  return w;
}

/// sigma^2 / (1 + sigma^2): the factor absorbed into W by the estimators.
inline double kernel_shrinkage(double sigma) {
  const double s2 = sigma * sigma;
  return s2 / (1.0 + s2);
}

/// (I + sigma^2 L~)^-d_power with L~ = I - W, evaluated as
/// (1 + sigma^2)^-d_power (I - cW)^-d_power through repeated LU solves.
inline DenseMatrix exact_kernel_lap(const Graph& g, double sigma, unsigned d_power) {
  if (!(sigma > 0.0)) throw std::invalid_argument("sigma must be positive");
  if (d_power == 0) throw std::invalid_argument("d_power must be at least 1");
  require_exact_size(g);
  const auto n = static_cast<Eigen::Index>(g.node_count());
  const double c = kernel_shrinkage(sigma);
  const DenseMatrix a = DenseMatrix::Identity(n, n) - c * normalized_adjacency(g);
  Eigen::PartialPivLU<DenseMatrix> lu(a);
  DenseMatrix k = DenseMatrix::Identity(n, n);
  for (unsigned r = 0; r < d_power; ++r) k = lu.solve(k);
  k *= std::pow(1.0 + sigma * sigma, -static_cast<double>(d_power));
  return k;
}

/// (I - W')^-2 for an arbitrary weight matrix W' with spectral radius < 1.
inline DenseMatrix inverse_squared(const DenseMatrix& w) {
  const auto n = w.rows();
  Eigen::PartialPivLU<DenseMatrix> lu(DenseMatrix::Identity(n, n) - w);
  return lu.solve(lu.solve(DenseMatrix::Identity(n, n)));
}

struct PageRankSolution {
  DenseVector pi;
  std::size_t iterations = 0;
  double residual = 0.0;
};

/// Stationary vector of (1-p)P + (p/N)E by power iteration, stopping once
/// ||pi^T P~ - pi^T||_inf < tol.
inline PageRankSolution exact_pagerank_solve(const Graph& g, double p_teleport,
                                             double tol = 1e-13,
                                             std::size_t max_iterations = 100000) {
  if (!(p_teleport > 0.0 && p_teleport < 1.0))
    throw std::invalid_argument("teleport probability must lie in (0,1)");
  require_exact_size(g);
  const std::size_t n = g.node_count();
  const double base = p_teleport / static_cast<double>(n);
  auto apply = [&](const DenseVector& x) {
    DenseVector y = DenseVector::Constant(static_cast<Eigen::Index>(n), base * x.sum());
    for (NodeId u = 0; u < n; ++u) {
      const double share = (1.0 - p_teleport) * x(u) / static_cast<double>(g.degree(u));
      for (const auto& nb : g.neighbors(u)) y(nb.node) += share;
    }
    return y;
  };
  PageRankSolution out;
  out.pi = DenseVector::Constant(static_cast<Eigen::Index>(n), 1.0 / static_cast<double>(n));
  for (std::size_t it = 1; it <= max_iterations; ++it) {
    DenseVector next = apply(out.pi);
    next /= next.sum();
    out.residual = (apply(next) - next).cwiseAbs().maxCoeff();
    out.pi = std::move(next);
    out.iterations = it;
    if (out.residual < tol) return out;
  }
  throw std::runtime_error("pagerank power iteration did not converge");
}

inline DenseVector exact_pagerank(const Graph& g, double p_teleport) {
  return exact_pagerank_solve(g, p_teleport).pi;
}

// ---------------------------------------------------------------------------
// Shortest paths

struct PathMultiplicity {
  std::size_t length = 0;
  std::uint64_t multiplicity = 1;

  friend bool operator==(const PathMultiplicity&, const PathMultiplicity&) = default;
};

/// BFS distances and shortest-path counts from `source` to every node.
inline std::vector<PathMultiplicity> shortest_paths_from(const Graph& g, NodeId source) {
  constexpr auto unseen = static_cast<std::size_t>(-1);
  std::vector<PathMultiplicity> out(g.node_count(), {unseen, 0});
  out[source] = {0, 1};
  std::deque<NodeId> queue{source};
  while (!queue.empty()) {
    NodeId u = queue.front();
    queue.pop_front();
    for (const auto& nb : g.neighbors(u)) {
      auto& t = out[nb.node];
      if (t.length == unseen) {
        t.length = out[u].length + 1;
        queue.push_back(nb.node);
      }
      if (t.length == out[u].length + 1) t.multiplicity += out[u].multiplicity;
    }
  }
  return out;
}

inline PathMultiplicity shortest_path_multiplicity(const Graph& g, NodeId i, NodeId j) {
  if (i >= g.node_count() || j >= g.node_count())
    throw std::out_of_range("node out of range");
  return shortest_paths_from(g, i)[j];
}

struct TopologicalCondition {
  bool holds = false;
  double lhs = 0.0;
  double rhs = 0.0;
};

/// Leading-order sufficient condition for the kernel-variance reduction
/// between i and j at small equal edge weights:
///   M(l_ij)^2 >= d_i d_j / ((d_i-1)(d_j-1)) *
///       sum_{i'!=i'' in N(i), j'!=j'' in N(j), l_i'j' = l_i''j'' = l_ij - 2} M M.
/// A node of degree 1 contributes an empty sum (rhs = 0).
inline TopologicalCondition check_topological_condition(const Graph& g, NodeId i, NodeId j) {
  const auto from_i = shortest_paths_from(g, i);
  const std::size_t l = from_i.at(j).length;
  if (l < 2) throw std::invalid_argument("topological condition needs l_ij >= 2");
  TopologicalCondition out;
  const double m = static_cast<double>(from_i[j].multiplicity);
  out.lhs = m * m;

  const auto& ni = g.neighbors(i);
  const auto& nj = g.neighbors(j);
  const double di = static_cast<double>(ni.size());
  const double dj = static_cast<double>(nj.size());
  // M(l_{i'j'}) restricted to pairs at distance l - 2, else 0.
  std::vector<std::vector<double>> close(ni.size(), std::vector<double>(nj.size(), 0.0));
  for (std::size_t a = 0; a < ni.size(); ++a) {
    const auto from_a = shortest_paths_from(g, ni[a].node);
    for (std::size_t b = 0; b < nj.size(); ++b)
      if (from_a[nj[b].node].length == l - 2)
        close[a][b] = static_cast<double>(from_a[nj[b].node].multiplicity);
  }
  double sum = 0.0;
  for (std::size_t a1 = 0; a1 < ni.size(); ++a1)
    for (std::size_t a2 = 0; a2 < ni.size(); ++a2) {
      if (a1 == a2) continue;
      for (std::size_t b1 = 0; b1 < nj.size(); ++b1) {
        if (close[a1][b1] == 0.0) continue;
        for (std::size_t b2 = 0; b2 < nj.size(); ++b2)
          if (b1 != b2) sum += close[a1][b1] * close[a2][b2];
      }
    }
  out.rhs = sum == 0.0 ? 0.0 : di * dj / ((di - 1.0) * (dj - 1.0)) * sum;
  out.holds = out.lhs >= out.rhs;
  return out;
}

// ---------------------------------------------------------------------------
// Graphlets

struct GraphletConcentration {
  double c_tri = 0.0;
  std::uint64_t triangles = 0;
  std::uint64_t wedges = 0;
};

/// Triangle share among connected induced 3-node subgraphs.
inline GraphletConcentration exact_graphlet_concentration(const Graph& g) {
  GraphletConcentration out;
  std::uint64_t triads = 0;
  for (NodeId u = 0; u < g.node_count(); ++u) {
    const auto& nu = g.neighbors(u);
    const std::uint64_t d = nu.size();
    triads += d * (d - 1) / 2;
    for (const auto& a : nu) {
      if (a.node <= u) continue;
      for (const auto& b : g.neighbors(a.node))
        if (b.node > a.node && g.has_edge(u, b.node)) ++out.triangles;
    }
  }
  out.wedges = triads - 3 * out.triangles;
  if (out.triangles + out.wedges == 0)
    throw std::domain_error("graph has no connected 3-node subgraph");
  out.c_tri = static_cast<double>(out.triangles) /
              static_cast<double>(out.triangles + out.wedges);
  return out;
}

}  // namespace rrw
