#pragma once

// Monte Carlo PageRank and step-by-step linear walk functionals.

#include <Eigen/Dense>

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <limits>
#include <span>
#include <stdexcept>
#include <vector>

#include "exact.hpp"
#include "graph.hpp"
#include "rng.hpp"
#include "stats.hpp"
#include "walk.hpp"

namespace rrw {

/// How ensembles are launched for the PageRank estimator.
///  per_start_node: one coupled ensemble of m walkers per node; walkers from
///                  different start nodes are independent.
///  global:         all N*m walkers form a single ensemble (walker k starts at
///                  node k / m), so any co-located walkers repel.
enum class LaunchMode { per_start_node, global };

inline constexpr std::uint64_t kGlobalEnsembleItem = 0xFFFFFFFFFFFFULL;

struct PageRankEstimate {
  DenseVector values;
  std::size_t walks = 0;
  std::size_t truncated = 0;
};

/// pi_hat_j = (terminations at j) / (N m). Truncated walks count as
/// terminating at their last node.
inline PageRankEstimate estimate_pagerank(const Graph& g, const EnsembleConfig& config,
                                          std::uint64_t trial,
                                          LaunchMode mode = LaunchMode::per_start_node) {
  if (!(config.p_term > 0.0)) throw std::invalid_argument("pagerank needs p_term > 0");
  config.validate();
  const std::size_t n = g.node_count();
  const std::size_t m = config.walkers;
  PageRankEstimate out;
  out.values = DenseVector::Zero(static_cast<Eigen::Index>(n));
  auto tally = [&](const std::vector<WalkRecord>& walks) {
    for (const auto& w : walks) {
      out.values(w.last()) += 1.0;
      out.truncated += w.truncated ? 1 : 0;
      ++out.walks;
    }
  };
  if (mode == LaunchMode::per_start_node) {
    for (NodeId s = 0; s < n; ++s) {
      RngStream rng = substream(config.seed, trial, s);
      tally(simulate_ensemble(g, s, config, rng));
    }
  } else {
    std::vector<NodeId> starts(n * m);
    for (std::size_t k = 0; k < starts.size(); ++k) starts[k] = static_cast<NodeId>(k / m);
    RngStream rng = substream(config.seed, trial, kGlobalEnsembleItem);
    tally(simulate_ensemble(g, std::span<const NodeId>(starts), config, rng));
  }
  out.values /= static_cast<double>(n * m);
  return out;
}

inline double pagerank_error(const DenseVector& exact, const DenseVector& estimate) {
  if (exact.size() != estimate.size()) throw std::invalid_argument("vector lengths differ");
  return (exact - estimate).norm();
}

inline double pagerank_squared_error(const DenseVector& exact, const DenseVector& estimate) {
  const double e = pagerank_error(exact, estimate);
  return e * e;
}

// ---------------------------------------------------------------------------
// Step-by-step linear functionals
//   y(w) = sum_i f(v_i, i) prod_{j<=i} g(v_{j-1}, v_j, j)

struct StepFunctionSpec {
  /// f(node, step, ends_here): ends_here is true at the walk's final node.
  std::function<double(NodeId, std::size_t, bool)> f;
  std::function<double(NodeId, NodeId, std::size_t)> g;
  std::size_t horizon = 0;
};

inline double evaluate_step_by_step(const StepFunctionSpec& spec, const WalkRecord& walk) {
  const std::size_t len = walk.length();
  if (len > spec.horizon) throw std::invalid_argument("walk longer than the spec horizon");
  double product = 1.0;
  double y = spec.f(walk.nodes[0], 0, len == 0);
  for (std::size_t i = 1; i <= len; ++i) {
    product *= spec.g(walk.nodes[i - 1], walk.nodes[i], i);
    y += spec.f(walk.nodes[i], i, i == len) * product;
  }
  return y;
}

/// PageRank contribution as a step-by-step function: 1 when the walk ends at k.
inline StepFunctionSpec pagerank_component_spec(NodeId k, std::size_t horizon) {
  return {[k](NodeId v, std::size_t, bool ends) { return v == k && ends ? 1.0 : 0.0; },
          [](NodeId, NodeId, std::size_t) { return 1.0; }, horizon};
}

struct TransientHarnessResult {
  PairedComparison variance;  // a = transient repelling, b = iid
  double predicted_gap = std::numeric_limits<double>::quiet_NaN();  // Var_iid - Var_tr
  double predicted_gap_stderr = 0.0;
  std::vector<double> conditional_means;  // E[h | v_1 = a] over neighbours of start
  bool gap_predicted() const { return !std::isnan(predicted_gap); }
  /// var_tr <= var_iid at 3 standard errors.
  bool holds() const { return variance.not_above(3.0); }
  /// The observed gap is within 3 standard errors of zero.
  bool inconclusive() const { return std::abs(variance.diff) <= 3.0 * variance.stderr_; }
};

/// Compares Var(Y), Y = sum over m walkers of y(walk), between iid and
/// transient repelling ensembles from `start` with independent termination.
/// Both schemes share each trial's random stream. When m <= d_start the
/// first-step identity
///   Var_iid - Var_tr = m(m-1)(1-p)^2 Var_a(E[h | v_1 = a]) / (d_start - 1)
/// is evaluated with E[h | v_1 = a] estimated from `sub_trials` single walks
/// per neighbour a.
inline TransientHarnessResult theorem3_harness(const Graph& g, NodeId start, const StepFunctionSpec& spec,
                                       std::size_t m, double p_term, std::size_t trials,
                                       std::uint64_t seed, std::size_t sub_trials = 0) {
  if (m < 2) throw std::invalid_argument("harness needs m >= 2");
  if (trials < 2) throw std::invalid_argument("harness needs at least two trials");
  EnsembleConfig cfg;
  cfg.walkers = m;
  cfg.p_term = p_term;
  cfg.max_steps = spec.horizon;
  cfg.seed = seed;
  std::vector<double> y_iid(trials), y_tr(trials);
  for (std::size_t t = 0; t < trials; ++t) {
    for (Coupling c : {Coupling::iid, Coupling::transient_repelling}) {
      cfg.coupling = c;
      RngStream rng = substream(seed, t, start);
      double y = 0.0;
      for (const auto& w : simulate_ensemble(g, start, cfg, rng)) y += evaluate_step_by_step(spec, w);
      (c == Coupling::iid ? y_iid : y_tr)[t] = y;
    }
  }
  TransientHarnessResult out;
  out.variance = compare_variances(y_tr, y_iid);

  const std::size_t d0 = g.degree(start);
  if (sub_trials >= 2 && m <= d0 && d0 >= 2 && spec.horizon >= 1) {
    // h(walk) for a walk that survived step 0 and moved to a.
    EnsembleConfig one = cfg;
    one.walkers = 1;
    one.coupling = Coupling::iid;
    one.max_steps = spec.horizon - 1;
    const double f0 = spec.f(start, 0, false);
    std::vector<double> means, ses;
    for (const auto& nb : g.neighbors(start)) {
      std::vector<double> h(sub_trials);
      for (std::size_t t = 0; t < sub_trials; ++t) {
        RngStream rng = substream(mix_key(seed, 0x7E3), t, nb.node);
        WalkRecord w;
        if (one.max_steps == 0) {
          w.nodes = {nb.node};
          w.truncated = true;
        } else {
          w = simulate_ensemble(g, nb.node, one, rng).front();
        }
        w.nodes.insert(w.nodes.begin(), start);
        h[t] = evaluate_step_by_step(spec, w) - f0;
      }
      const Summary s = summarize(h);
      means.push_back(s.mean);
      ses.push_back(s.stderr_);
    }
    const double d = static_cast<double>(d0);
    double mu = 0.0;
    for (double e : means) mu += e / d;
    double var = 0.0, var_se2 = 0.0;
    for (std::size_t k = 0; k < means.size(); ++k) {
      var += (means[k] - mu) * (means[k] - mu) / d;
      const double grad = 2.0 * (means[k] - mu) / d;
      var_se2 += grad * grad * ses[k] * ses[k];
    }
    const double scale = static_cast<double>(m * (m - 1)) * (1.0 - p_term) * (1.0 - p_term) /
                         (d - 1.0);
    out.conditional_means = std::move(means);
    out.predicted_gap = scale * var;
    out.predicted_gap_stderr = scale * std::sqrt(var_se2);
  }
  return out;
}

}  // namespace rrw
