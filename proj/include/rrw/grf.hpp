#pragma once

// Graph random features for the 2-regularised Laplacian kernel.
//
// Every node launches its own coupled ensemble. A walker carries a running
// load, starting at 1 on its start node and multiplied by W'_uv d_u / (1-p)
// on each step u -> v; the load is deposited on every node it visits. The
// feature phi(i) is the deposit total divided by m, and phi(i)^T phi(j)
// estimates [(I - W')^-2]_ij.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <random>
#include <stdexcept>
#include <utility>
#include <vector>

#include "exact.hpp"
#include "graph.hpp"
#include "rng.hpp"
#include "walk.hpp"

namespace rrw {

/// Edge weights W'_uv laid out like Graph::neighbors(u).
struct EdgeWeights {
  std::vector<std::vector<double>> rows;

  double at(NodeId u, std::size_t k) const { return rows[u][k]; }

  DenseMatrix dense(const Graph& g) const {
    const auto n = static_cast<Eigen::Index>(g.node_count());
    DenseMatrix w = DenseMatrix::Zero(n, n);
    for (NodeId u = 0; u < g.node_count(); ++u)
      for (std::size_t k = 0; k < g.degree(u); ++k) w(u, g.neighbors(u)[k].node) = rows[u][k];
    return w;
  }
};

/// scale * a_uv / sqrt(d~_u d~_v); with scale = c this is W' = cW.
inline EdgeWeights normalized_weights(const Graph& g, double scale) {
  EdgeWeights out;
  out.rows.resize(g.node_count());
  for (NodeId u = 0; u < g.node_count(); ++u)
    for (const auto& nb : g.neighbors(u))
      out.rows[u].push_back(scale * nb.weight /
                            std::sqrt(g.weighted_degree(u) * g.weighted_degree(nb.node)));
  return out;
}

/// w on every edge, ignoring the stored edge weights.
inline EdgeWeights uniform_weights(const Graph& g, double w) {
  EdgeWeights out;
  out.rows.resize(g.node_count());
  for (NodeId u = 0; u < g.node_count(); ++u) out.rows[u].assign(g.degree(u), w);
  return out;
}

/// Sparse feature vector, sorted by node.
struct GrfVector {
  NodeId owner = 0;
  std::vector<std::pair<NodeId, double>> loads;

  double operator[](NodeId x) const {
    auto it = std::lower_bound(loads.begin(), loads.end(), x,
                               [](const auto& e, NodeId v) { return e.first < v; });
    return it != loads.end() && it->first == x ? it->second : 0.0;
  }

  double dot(const GrfVector& other) const {
    double s = 0.0;
    auto a = loads.begin();
    auto b = other.loads.begin();
    while (a != loads.end() && b != other.loads.end()) {
      if (a->first < b->first) {
        ++a;
      } else if (b->first < a->first) {
        ++b;
      } else {
        s += a->second * b->second;
        ++a;
        ++b;
      }
    }
    return s;
  }
};

/// Adds the loads of one walk (not yet divided by m) into `acc`.
template <typename Accumulate>
void deposit_walk_loads(const Graph& g, const EdgeWeights& w, double p_term,
                        const WalkRecord& walk, Accumulate&& acc) {
  double load = 1.0;
  acc(walk.nodes[0], load);
  for (std::size_t s = 1; s < walk.nodes.size(); ++s) {
    const NodeId u = walk.nodes[s - 1];
    const std::size_t k = g.neighbor_index(u, walk.nodes[s]);
    load *= w.at(u, k) * static_cast<double>(g.degree(u)) / (1.0 - p_term);
    acc(walk.nodes[s], load);
  }
}

/// Dense feature phi(node) computed from an already simulated ensemble.
inline DenseVector feature_from_walks(const Graph& g, const EdgeWeights& w, double p_term,
                                      const std::vector<WalkRecord>& walks) {
  DenseVector phi = DenseVector::Zero(static_cast<Eigen::Index>(g.node_count()));
  for (const auto& walk : walks)
    deposit_walk_loads(g, w, p_term, walk, [&](NodeId x, double v) { phi(x) += v; });
  phi /= static_cast<double>(walks.size());
  return phi;
}

inline GrfVector grf_vector(const Graph& g, NodeId node, const EdgeWeights& w,
                            const EnsembleConfig& config, RngStream& rng) {
  if (!(config.p_term > 0.0)) throw std::invalid_argument("graph random features need p_term > 0");
  const auto walks = simulate_ensemble(g, node, config, rng);
  const DenseVector phi = feature_from_walks(g, w, config.p_term, walks);
  GrfVector out;
  out.owner = node;
  for (NodeId x = 0; x < g.node_count(); ++x)
    if (phi(x) != 0.0) out.loads.emplace_back(x, phi(x));
  return out;
}

/// Rows phi(i) for every node, one independent ensemble per node drawn from
/// substream(config.seed, trial, i).
inline DenseMatrix feature_matrix(const Graph& g, const EdgeWeights& w,
                                  const EnsembleConfig& config, std::uint64_t trial) {
  require_exact_size(g);
  if (!(config.p_term > 0.0)) throw std::invalid_argument("graph random features need p_term > 0");
  const auto n = static_cast<Eigen::Index>(g.node_count());
  DenseMatrix phi(n, n);
  for (NodeId i = 0; i < g.node_count(); ++i) {
    RngStream rng = substream(config.seed, trial, i);
    phi.row(i) = feature_from_walks(g, w, config.p_term, simulate_ensemble(g, i, config, rng))
                     .transpose();
  }
  return phi;
}

/// Phi Phi^T: the estimate of (I - W')^-2.
inline DenseMatrix estimate_inverse_squared(const Graph& g, const EdgeWeights& w,
                                            const EnsembleConfig& config, std::uint64_t trial) {
  const DenseMatrix phi = feature_matrix(g, w, config, trial);
  return phi * phi.transpose();
}

/// Estimate of (I + sigma^2 L~)^-2.
inline DenseMatrix estimate_gram(const Graph& g, double sigma, const EnsembleConfig& config,
                                 std::uint64_t trial = 0) {
  if (!(sigma > 0.0)) throw std::invalid_argument("sigma must be positive");
  const EdgeWeights w = normalized_weights(g, kernel_shrinkage(sigma));
  const double s2 = 1.0 + sigma * sigma;
  return estimate_inverse_squared(g, w, config, trial) / (s2 * s2);
}

inline double frobenius_error(const DenseMatrix& exact, const DenseMatrix& estimate) {
  if (exact.rows() != estimate.rows() || exact.cols() != estimate.cols())
    throw std::invalid_argument("matrix dimensions differ");
  const double norm = exact.norm();
  if (norm == 0.0) throw std::domain_error("exact matrix has zero norm");
  return (exact - estimate).norm() / norm;
}

// ---------------------------------------------------------------------------
// Closed-form variance difference, iid minus transient repelling

struct VarianceDiffReport {
  NodeId i = 0;
  NodeId j = 0;
  double delta = 0.0;
  double term_a = 0.0;
  double term_b = 0.0;
};

/// Closed-form Var_iid - Var_tr of [Phi Phi^T]_ij for edge weights W
/// (symmetric, supported on the edges of g), valid for m <= d_i, d_j and
/// independent termination.
inline VarianceDiffReport variance_difference_closed_form(const Graph& g, const DenseMatrix& w,
                                                          NodeId i, NodeId j, std::size_t m,
                                                          double p_term) {
  require_exact_size(g);
  if (i == j) throw std::invalid_argument("closed form needs i != j");
  const std::size_t di = g.degree(i), dj = g.degree(j);
  if (di < 2 || dj < 2) throw std::invalid_argument("closed form needs d_i, d_j >= 2");
  if (m < 1) throw std::invalid_argument("need at least one walker");
  if (!(p_term > 0.0 && p_term < 1.0)) throw std::invalid_argument("p_term must lie in (0,1)");

  const auto n = w.rows();
  const DenseMatrix g2 = inverse_squared(w);  // (I - W)^-2
  const DenseMatrix wg2 = w * g2;              // W (I - W)^-2

  // H_ix: sum over walks i -> x of positive length of w~^2 / p.
  DenseMatrix v(n, n);
  for (Eigen::Index u = 0; u < n; ++u)
    for (Eigen::Index x = 0; x < n; ++x)
      v(u, x) = w(u, x) * w(u, x) * static_cast<double>(g.degree(static_cast<NodeId>(u))) /
                (1.0 - p_term);
  const double rho = v.eigenvalues().cwiseAbs().maxCoeff();
  if (!(rho < 1.0)) throw std::domain_error("second-moment series diverges (rho(V) >= 1)");
  const DenseMatrix h =
      v * Eigen::PartialPivLU<DenseMatrix>(DenseMatrix::Identity(n, n) - v).inverse();

  auto spread = [&](const DenseMatrix& mat, Eigen::Index x, NodeId c) {
    double sq = 0.0, lin = 0.0;
    for (const auto& nb : g.neighbors(c)) {
      const double t = w(c, nb.node) * mat(x, nb.node);
      sq += t * t;
      lin += t;
    }
    return sq - lin * lin / static_cast<double>(g.degree(c));
  };
  auto b_minus_c = [&](Eigen::Index x, NodeId c) { return spread(g2, x, c) - spread(wg2, x, c); };

  const double md = static_cast<double>(m);
  const double ki = static_cast<double>(di) / static_cast<double>(di - 1);
  const double kj = static_cast<double>(dj) / static_cast<double>(dj - 1);
  const double f2 = (md - 1.0) * (md - 1.0) / (md * md);

  const double w2g2 = (w * wg2)(i, j);
  double cross = 0.0;
  for (const auto& a1 : g.neighbors(i))
    for (const auto& a2 : g.neighbors(i)) {
      if (a1.node == a2.node) continue;
      for (const auto& b1 : g.neighbors(j))
        for (const auto& b2 : g.neighbors(j)) {
          if (b1.node == b2.node) continue;
          cross += w(i, a1.node) * w(j, b1.node) * w(i, a2.node) * w(j, b2.node) *
                   g2(a1.node, b1.node) * g2(a2.node, b2.node);
        }
    }

  VarianceDiffReport out;
  out.i = i;
  out.j = j;
  out.term_a = f2 * w2g2 * w2g2 - ki * kj * f2 * cross;

  double sum_i = 0.0, sum_j = 0.0;
  for (Eigen::Index x = 0; x < n; ++x) {
    sum_i += h(i, x) * b_minus_c(x, j);
    sum_j += h(j, x) * b_minus_c(x, i);
  }
  out.term_b = (md - 1.0) / (md * md) * (kj * sum_i + ki * sum_j) +
               (md - 1.0) / md * (kj * b_minus_c(i, j) + ki * b_minus_c(j, i));
  out.delta = out.term_a + out.term_b;
  return out;
}

inline VarianceDiffReport variance_difference_closed_form(const Graph& g, double w, NodeId i,
                                                          NodeId j, std::size_t m,
                                                          double p_term) {
  return variance_difference_closed_form(g, uniform_weights(g, w).dense(g), i, j, m, p_term);
}

// ---------------------------------------------------------------------------
// Kernel regression

/// Angular error charged to a node whose prediction is the zero vector.
inline constexpr double kZeroPredictionError = 2.0;

/// Mean of 1 - cos(v_hat(i), v(i)) over test nodes, with predictions
/// v_hat(i) = sum over train j of K(i,j) v(j).
inline double angular_error(const DenseMatrix& kernel, const NodeAttributes& attributes,
                            const std::vector<NodeId>& train, const std::vector<NodeId>& test) {
  if (test.empty()) throw std::invalid_argument("no test nodes");
  double total = 0.0;
  for (NodeId i : test) {
    std::vector<double> pred(attributes.dimension, 0.0);
    for (NodeId j : train)
      for (std::size_t k = 0; k < attributes.dimension; ++k)
        pred[k] += kernel(i, j) * attributes.values[j][k];
    double dot = 0.0, np = 0.0, nt = 0.0;
    for (std::size_t k = 0; k < attributes.dimension; ++k) {
      dot += pred[k] * attributes.values[i][k];
      np += pred[k] * pred[k];
      nt += attributes.values[i][k] * attributes.values[i][k];
    }
    if (nt == 0.0) throw std::domain_error("attribute vector of node " + std::to_string(i) +
                                           " is zero");
    total += np == 0.0 ? kZeroPredictionError : 1.0 - dot / std::sqrt(np * nt);
  }
  return total / static_cast<double>(test.size());
}

/// Uniform random split with round(test_fraction * N) test nodes (at least
/// one of each kind).
inline std::pair<std::vector<NodeId>, std::vector<NodeId>> train_test_split(std::size_t n,
                                                                            double test_fraction,
                                                                            Engine& rng) {
  if (!(test_fraction > 0.0 && test_fraction < 1.0))
    throw std::invalid_argument("test_fraction must lie in (0,1)");
  if (n < 2) throw std::invalid_argument("need at least two nodes to split");
  std::vector<NodeId> ids(n);
  for (NodeId v = 0; v < n; ++v) ids[v] = v;
  for (std::size_t k = n; k > 1; --k) std::swap(ids[k - 1], ids[uniform_index(rng, k)]);
  auto n_test = static_cast<std::size_t>(std::llround(test_fraction * static_cast<double>(n)));
  n_test = std::clamp<std::size_t>(n_test, 1, n - 1);
  std::vector<NodeId> test(ids.begin(), ids.begin() + static_cast<std::ptrdiff_t>(n_test));
  std::vector<NodeId> train(ids.begin() + static_cast<std::ptrdiff_t>(n_test), ids.end());
  std::sort(test.begin(), test.end());
  std::sort(train.begin(), train.end());
  return {std::move(train), std::move(test)};
}

inline constexpr std::uint64_t kSplitPurpose = 0x5E1;

/// Holds out a random test set (drawn from the trial's auxiliary engine),
/// estimates the Gram matrix and returns the mean angular error.
inline double kernel_regression_experiment(const Graph& g, const NodeAttributes& attributes,
                                           double test_fraction, double sigma,
                                           const EnsembleConfig& config, std::uint64_t trial) {
  if (attributes.values.size() != g.node_count())
    throw std::invalid_argument("attributes do not match graph");
  Engine split_rng = auxiliary_engine(config.seed, trial, kSplitPurpose);
  const auto [train, test] = train_test_split(g.node_count(), test_fraction, split_rng);
  return angular_error(estimate_gram(g, sigma, config, trial), attributes, train, test);
}

/// Gaussian vectors smoothed by the exact kernel: a stand-in for mesh
/// normals when no attribute file is available.
inline NodeAttributes synthetic_smooth_attributes(const Graph& g, std::size_t dimension,
                                                  double sigma, std::uint64_t seed) {
  if (dimension == 0) throw std::invalid_argument("attribute dimension must be positive");
  Engine rng(mix_key(seed, 0xA77));
  std::normal_distribution<double> normal;
  const auto n = static_cast<Eigen::Index>(g.node_count());
  DenseMatrix raw(n, static_cast<Eigen::Index>(dimension));
  for (Eigen::Index r = 0; r < raw.rows(); ++r)
    for (Eigen::Index c = 0; c < raw.cols(); ++c) raw(r, c) = normal(rng);
  const DenseMatrix smooth = exact_kernel_lap(g, sigma, 2) * raw;
  NodeAttributes out;
  out.dimension = dimension;
  out.values.resize(g.node_count());
  for (Eigen::Index r = 0; r < n; ++r)
    for (Eigen::Index c = 0; c < smooth.cols(); ++c)
      out.values[static_cast<std::size_t>(r)].push_back(smooth(r, c));
  return out;
}

}  // namespace rrw
