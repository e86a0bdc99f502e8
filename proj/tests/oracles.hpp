#pragma once

// Reference computations used only by the tests. Each one takes a different
// route from the library code it checks.

#include <Eigen/Dense>

#include <cmath>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "rrw/graph.hpp"

namespace rrw::testing {

using Mat = Eigen::MatrixXd;
using Vec = Eigen::VectorXd;

struct NamedGraph {
  std::string name;
  Graph graph;
};

/// Small graphs shared across suites.
inline std::vector<NamedGraph> corpus() {
  return {{"P3", path_graph(3)},     {"P5", path_graph(5)},     {"C4", cycle_graph(4)},
          {"K3", complete_graph(3)}, {"K4", complete_graph(4)}, {"star4", star_graph(3)}};
}

inline Mat adjacency(const Graph& g) {
  const auto n = static_cast<Eigen::Index>(g.node_count());
  Mat a = Mat::Zero(n, n);
  for (NodeId u = 0; u < g.node_count(); ++u)
    for (const auto& nb : g.neighbors(u)) a(u, nb.node) = 1.0;
  return a;
}

/// Solves (I - (1-p) P^T) pi = (p/N) 1 directly.
inline Vec pagerank_linear_solve(const Graph& g, double p) {
  const auto n = static_cast<Eigen::Index>(g.node_count());
  Mat a = adjacency(g);
  for (Eigen::Index r = 0; r < n; ++r) a.row(r) /= a.row(r).sum();
  const Mat lhs = Mat::Identity(n, n) - (1.0 - p) * a.transpose();
  return lhs.fullPivLu().solve(Vec::Constant(n, p / static_cast<double>(n)));
}

/// sum_{k <= terms} (k+1) c^k W^k, the series of (I - cW)^-2.
inline Mat neumann_inverse_squared(const Mat& w, double c, int terms) {
  const auto n = w.rows();
  Mat sum = Mat::Zero(n, n), power = Mat::Identity(n, n);
  for (int k = 0; k <= terms; ++k) {
    sum += static_cast<double>(k + 1) * power;
    power = c * power * w;
  }
  return sum;
}

/// Counts of (triangles, open wedges) by scanning every node triple.
inline std::pair<std::uint64_t, std::uint64_t> brute_force_triads(const Graph& g) {
  std::uint64_t tri = 0, wed = 0;
  const NodeId n = static_cast<NodeId>(g.node_count());
  for (NodeId a = 0; a < n; ++a)
    for (NodeId b = a + 1; b < n; ++b)
      for (NodeId c = b + 1; c < n; ++c) {
        const int e = g.has_edge(a, b) + g.has_edge(b, c) + g.has_edge(a, c);
        tri += e == 3;
        wed += e == 2;
      }
  return {tri, wed};
}

/// Number of shortest i-j paths as the first nonzero entry of A^l.
inline std::pair<std::size_t, double> walk_count_multiplicity(const Graph& g, NodeId i, NodeId j) {
  const Mat a = adjacency(g);
  Mat power = Mat::Identity(a.rows(), a.cols());
  for (std::size_t l = 0; l <= g.node_count(); ++l) {
    if (power(i, j) > 0.0) return {l, power(i, j)};
    power = power * a;
  }
  return {0, 0.0};
}

/// Var([Phi Phi^T]_ij) for features built with weights `w` (W'), m walkers
/// per node, termination p, from the exact second moments of phi:
///   E[phi_x phi_y] = e G^T + G e^T - e e^T + (m-1)/m Q
///                    + (1/m)(H_ix G_xy + H_iy G_yx - delta_xy H_ix)
/// with G = (I - W)^-1, H = V (I - V)^-1, V_uv = W_uv^2 d_u / (1-p) and
/// Q = a a^T (iid) or d/(d-1) sum_{i' != i''} W_ii' W_ii'' G_i' G_i''^T
/// (repulsion at the first step, m <= d_i).
inline Mat feature_second_moment(const Graph& g, const Mat& w, NodeId i, std::size_t m, double p,
                                 bool transient) {
  const auto n = w.rows();
  const Mat id = Mat::Identity(n, n);
  const Mat gmat = (id - w).inverse();
  Mat v = Mat::Zero(n, n);
  for (Eigen::Index u = 0; u < n; ++u)
    for (Eigen::Index x = 0; x < n; ++x)
      v(u, x) = w(u, x) * w(u, x) * static_cast<double>(g.degree(static_cast<NodeId>(u))) /
                (1.0 - p);
  const Mat h = v * (id - v).inverse();
  const Vec gi = gmat.row(i).transpose();
  Vec e = Vec::Zero(n);
  e(i) = 1.0;
  Mat q;
  if (!transient) {
    const Vec a = gi - e;
    q = a * a.transpose();
  } else {
    q = Mat::Zero(n, n);
    const double d = static_cast<double>(g.degree(i));
    for (const auto& s : g.neighbors(i))
      for (const auto& t : g.neighbors(i))
        if (s.node != t.node)
          q += w(i, s.node) * w(i, t.node) * gmat.row(s.node).transpose() * gmat.row(t.node);
    q *= d / (d - 1.0);
  }
  const double md = static_cast<double>(m);
  Mat s = e * gi.transpose() + gi * e.transpose() - e * e.transpose() + (md - 1.0) / md * q;
  for (Eigen::Index x = 0; x < n; ++x)
    for (Eigen::Index y = 0; y < n; ++y)
      s(x, y) += (h(i, x) * gmat(x, y) + h(i, y) * gmat(y, x) - (x == y ? h(i, x) : 0.0)) / md;
  return s;
}

inline double kernel_entry_variance(const Graph& g, const Mat& w, NodeId i, NodeId j,
                                    std::size_t m, double p, bool transient) {
  const Mat si = feature_second_moment(g, w, i, m, p, transient);
  const Mat sj = feature_second_moment(g, w, j, m, p, transient);
  const Mat gmat = (Mat::Identity(w.rows(), w.cols()) - w).inverse();
  const double mean = (gmat * gmat)(i, j);
  return si.cwiseProduct(sj).sum() - mean * mean;
}

}  // namespace rrw::testing
