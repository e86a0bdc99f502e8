#pragma once

// Exact enumeration of coupled walker ensembles on tiny graphs.
//
// The process is expanded round by round: termination outcomes for the live
// walkers, then the joint move of the survivors. Block permutations and
// injective neighbour assignments are summed analytically, so every leaf of
// the expansion is a distinct joint outcome.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <map>
#include <numeric>
#include <stdexcept>
#include <tuple>
#include <utility>
#include <vector>

#include "exact.hpp"
#include "graph.hpp"
#include "pagerank.hpp"
#include "walk.hpp"

namespace rrw {

inline constexpr double kDefaultStateBudget = 1e7;

class BudgetError : public std::length_error {
 public:
  using std::length_error::length_error;
};

struct EnsembleScheme {
  Coupling coupling = Coupling::iid;
  Termination termination = Termination::independent;
};

// ---------------------------------------------------------------------------
// One round of the process

struct TerminationBranch {
  std::vector<char> stop;
  double probability;
};

/// Every termination outcome of one round with its probability.
inline std::vector<TerminationBranch> termination_branches(const std::vector<char>& alive,
                                                           Termination scheme, double p) {
  const std::size_t m = alive.size();
  // Each unit is one walker or one live antithetic pair.
  struct Unit {
    std::vector<std::pair<std::vector<std::size_t>, double>> outcomes;  // stopping walkers
  };
  std::vector<Unit> units;
  auto single = [&](std::size_t k) {
    units.push_back({{{{k}, p}, {{}, 1.0 - p}}});
  };
  if (scheme == Termination::independent) {
    for (std::size_t k = 0; k < m; ++k)
      if (alive[k]) single(k);
  } else {
    for (std::size_t a = 0; a < m; a += 2) {
      const std::size_t b = a + 1;
      if (b < m && alive[a] && alive[b]) {
        const double both = std::max(0.0, 2.0 * p - 1.0);
        units.push_back({{{{a, b}, both},
                          {{a}, p - both},
                          {{b}, p - both},
                          {{}, 1.0 - 2.0 * p + both}}});
      } else {
        if (alive[a]) single(a);
        if (b < m && alive[b]) single(b);
      }
    }
  }
  std::vector<TerminationBranch> out{{std::vector<char>(m, 0), 1.0}};
  for (const auto& unit : units) {
    std::vector<TerminationBranch> next;
    for (const auto& br : out)
      for (const auto& [who, q] : unit.outcomes) {
        if (q <= 0.0) continue;
        TerminationBranch nb = br;
        for (std::size_t k : who) nb.stop[k] = 1;
        nb.probability *= q;
        next.push_back(std::move(nb));
      }
    out = std::move(next);
  }
  return out;
}

/// Joint law of neighbour indices for n walkers leaving a node of degree d.
inline std::map<std::vector<std::size_t>, double> group_move_law(std::size_t n, std::size_t d,
                                                                 bool coupled) {
  std::map<std::vector<std::size_t>, double> law;
  if (!coupled || n == 1 || d == 1) {
    std::vector<std::size_t> pick(n, 0);
    const double q = std::pow(1.0 / static_cast<double>(d), static_cast<double>(n));
    while (true) {
      law[pick] += q;
      std::size_t k = 0;
      while (k < n && ++pick[k] == d) pick[k++] = 0;
      if (k == n) break;
    }
    return law;
  }
  if (n > 8) throw BudgetError("coupled group too large to enumerate");
  // Uniform permutation of the group, consecutive blocks of size d, uniform
  // injection per block.
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  double perms = 1.0;
  for (std::size_t k = 2; k <= n; ++k) perms *= static_cast<double>(k);
  const bool single_block = n <= d;  // one block: the permutation is irrelevant
  do {
    std::vector<std::vector<std::size_t>> blocks;
    for (std::size_t s = 0; s < n; s += d)
      blocks.emplace_back(order.begin() + static_cast<std::ptrdiff_t>(s),
                          order.begin() + static_cast<std::ptrdiff_t>(std::min(n, s + d)));
    std::vector<std::pair<std::vector<std::size_t>, double>> partial{
        {std::vector<std::size_t>(n, 0), single_block ? 1.0 : 1.0 / perms}};
    for (const auto& block : blocks) {
      std::vector<std::pair<std::vector<std::size_t>, double>> next;
      const std::size_t b = block.size();
      double falling = 1.0;
      for (std::size_t k = 0; k < b; ++k) falling *= static_cast<double>(d - k);
      std::vector<std::size_t> inj(b);
      std::function<void(std::size_t, std::vector<char>&)> rec = [&](std::size_t k,
                                                                      std::vector<char>& used) {
        if (k == b) {
          for (const auto& [pick, q] : partial) {
            auto np = pick;
            for (std::size_t t = 0; t < b; ++t) np[block[t]] = inj[t];
            next.emplace_back(std::move(np), q / falling);
          }
          return;
        }
        for (std::size_t c = 0; c < d; ++c) {
          if (used[c]) continue;
          used[c] = 1;
          inj[k] = c;
          rec(k + 1, used);
          used[c] = 0;
        }
      };
      std::vector<char> used(d, 0);
      rec(0, used);
      partial = std::move(next);
    }
    for (auto& [pick, q] : partial) law[pick] += q;
  } while (!single_block && std::next_permutation(order.begin(), order.end()));
  return law;
}

struct MoveBranch {
  std::vector<NodeId> positions;
  double probability;
};

/// Every joint move of the live walkers (dead walkers keep their position).
inline std::vector<MoveBranch> move_branches(const Graph& g, const std::vector<NodeId>& positions,
                                             const std::vector<char>& alive, bool coupled) {
  std::map<NodeId, std::vector<std::size_t>> groups;
  for (std::size_t k = 0; k < positions.size(); ++k)
    if (alive[k]) groups[positions[k]].push_back(k);
  std::vector<MoveBranch> out{{positions, 1.0}};
  for (const auto& [v, members] : groups) {
    const auto& nbrs = g.neighbors(v);
    const auto law = group_move_law(members.size(), nbrs.size(), coupled);
    std::vector<MoveBranch> next;
    next.reserve(out.size() * law.size());
    for (const auto& br : out)
      for (const auto& [pick, q] : law) {
        MoveBranch nb = br;
        for (std::size_t t = 0; t < members.size(); ++t) nb.positions[members[t]] = nbrs[pick[t]].node;
        nb.probability *= q;
        next.push_back(std::move(nb));
      }
    out = std::move(next);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Full-history enumeration

struct WalkPath {
  std::vector<NodeId> nodes;
  bool terminated = false;  // false: still alive at the horizon

  friend bool operator<(const WalkPath& a, const WalkPath& b) {
    return std::tie(a.terminated, a.nodes) < std::tie(b.terminated, b.nodes);
  }
  friend bool operator==(const WalkPath&, const WalkPath&) = default;
};

struct JointOutcome {
  std::vector<WalkPath> paths;
  double probability = 0.0;
};

struct JointWalkDistribution {
  std::size_t horizon = 0;
  std::vector<JointOutcome> entries;

  double total_probability() const {
    double s = 0.0;
    for (const auto& e : entries) s += e.probability;
    return s;
  }
};

/// Rough count of leaves: (2 * sum_{l <= T} d_max^l)^m.
inline double enumeration_size_bound(const Graph& g, std::size_t m, std::size_t horizon) {
  const double d = static_cast<double>(g.max_degree());
  double per_walker = 0.0, pw = 1.0;
  for (std::size_t l = 0; l <= horizon; ++l, pw *= d) per_walker += pw;
  return std::pow(2.0 * per_walker, static_cast<double>(m));
}

/// Visits every joint outcome after `horizon` rounds with its probability.
inline void for_each_joint_outcome(const Graph& g, const std::vector<NodeId>& starts,
                                   EnsembleScheme scheme, double p_term, std::size_t horizon,
                                   const std::function<void(const std::vector<WalkPath>&, double)>& visit,
                                   double budget = kDefaultStateBudget) {
  if (enumeration_size_bound(g, starts.size(), horizon) > budget)
    throw BudgetError("joint enumeration exceeds the state budget");
  std::vector<WalkPath> paths(starts.size());
  for (std::size_t k = 0; k < starts.size(); ++k) paths[k].nodes = {starts[k]};

  std::function<void(std::size_t, double)> expand = [&](std::size_t step, double prob) {
    std::vector<char> alive(paths.size());
    bool any = false;
    for (std::size_t k = 0; k < paths.size(); ++k) any |= (alive[k] = !paths[k].terminated);
    if (!any || step == horizon) {
      visit(paths, prob);
      return;
    }
    for (const auto& tb : termination_branches(alive, scheme.termination, p_term)) {
      std::vector<char> moving(paths.size());
      for (std::size_t k = 0; k < paths.size(); ++k) {
        moving[k] = alive[k] && !tb.stop[k];
        if (alive[k] && tb.stop[k]) paths[k].terminated = true;
      }
      if (std::none_of(moving.begin(), moving.end(), [](char c) { return c != 0; })) {
        visit(paths, prob * tb.probability);
      } else {
        std::vector<NodeId> pos(paths.size());
        for (std::size_t k = 0; k < paths.size(); ++k) pos[k] = paths[k].nodes.back();
        for (const auto& mb :
             move_branches(g, pos, moving, coupling_active(scheme.coupling, step))) {
          for (std::size_t k = 0; k < paths.size(); ++k)
            if (moving[k]) paths[k].nodes.push_back(mb.positions[k]);
          expand(step + 1, prob * tb.probability * mb.probability);
          for (std::size_t k = 0; k < paths.size(); ++k)
            if (moving[k]) paths[k].nodes.pop_back();
        }
      }
      for (std::size_t k = 0; k < paths.size(); ++k)
        if (alive[k] && tb.stop[k]) paths[k].terminated = false;
    }
  };
  expand(0, 1.0);
}

inline JointWalkDistribution enumerate_joint_walks(const Graph& g, NodeId start,
                                                   EnsembleScheme scheme, std::size_t m,
                                                   double p_term, std::size_t horizon,
                                                   double budget = kDefaultStateBudget) {
  if (start >= g.node_count()) throw std::out_of_range("start node out of range");
  JointWalkDistribution out;
  out.horizon = horizon;
  for_each_joint_outcome(
      g, std::vector<NodeId>(m, start), scheme, p_term, horizon,
      [&](const std::vector<WalkPath>& paths, double q) { out.entries.push_back({paths, q}); },
      budget);
  return out;
}

/// Law of walker k alone.
inline std::map<WalkPath, double> marginal(const JointWalkDistribution& dist, std::size_t k) {
  std::map<WalkPath, double> out;
  for (const auto& e : dist.entries) out[e.paths.at(k)] += e.probability;
  return out;
}

/// Single simple random walk law, built directly from per-step factors.
inline std::map<WalkPath, double> simple_walk_law(const Graph& g, NodeId start, double p_term,
                                                  std::size_t horizon) {
  std::map<WalkPath, double> out;
  WalkPath path{{start}, false};
  std::function<void(double)> rec = [&](double q) {
    if (path.nodes.size() - 1 == horizon) {
      out[path] += q;
      return;
    }
    if (p_term > 0.0) {
      path.terminated = true;
      out[path] += q * p_term;
      path.terminated = false;
    }
    const auto& nbrs = g.neighbors(path.nodes.back());
    for (const auto& nb : nbrs) {
      path.nodes.push_back(nb.node);
      rec(q * (1.0 - p_term) / static_cast<double>(nbrs.size()));
      path.nodes.pop_back();
    }
  };
  rec(1.0);
  return out;
}

// ---------------------------------------------------------------------------
// Correlation terms E[N(w_x) N(w_y)]

/// Whether `prefix` is an initial segment of the path's node sequence.
inline bool traverses(const WalkPath& path, const std::vector<NodeId>& prefix) {
  return path.nodes.size() >= prefix.size() &&
         std::equal(prefix.begin(), prefix.end(), path.nodes.begin());
}

/// E[N(w_x) N(w_y)], N counting the walkers whose walk begins with the given
/// node sequence.
inline double correlation_term(const JointWalkDistribution& dist, const std::vector<NodeId>& walk_x,
                               const std::vector<NodeId>& walk_y) {
  if (walk_x.size() - 1 > dist.horizon || walk_y.size() - 1 > dist.horizon)
    throw std::invalid_argument("walk longer than the enumeration horizon");
  double s = 0.0;
  for (const auto& e : dist.entries) {
    double nx = 0.0, ny = 0.0;
    for (const auto& p : e.paths) {
      nx += traverses(p, walk_x) ? 1.0 : 0.0;
      ny += traverses(p, walk_y) ? 1.0 : 0.0;
    }
    s += e.probability * nx * ny;
  }
  return s;
}

enum class WalkPairClass { zero_length, same, subwalk, diverge_at_start, diverge_later };

inline WalkPairClass classify_walk_pair(const std::vector<NodeId>& x, const std::vector<NodeId>& y) {
  if (x.empty() || y.empty() || x.front() != y.front())
    throw std::invalid_argument("walks must share their start node");
  if (x.size() == 1 || y.size() == 1) return WalkPairClass::zero_length;
  if (x == y) return WalkPairClass::same;
  const std::size_t common = std::min(x.size(), y.size());
  std::size_t k = 0;
  while (k < common && x[k] == y[k]) ++k;
  if (k == common) return WalkPairClass::subwalk;
  return k == 1 ? WalkPairClass::diverge_at_start : WalkPairClass::diverge_later;
}

/// Tabulated closed form of E[N(w_x) N(w_y)] for iid or transient repelling
/// walkers with independent termination, with c^len replaced by the product
/// of (1-p)/d_v over traversed steps. Needs m <= every degree on the walks
/// for the transient repelling rows.
inline double correlation_closed_form(const Graph& g, const std::vector<NodeId>& x,
                                      const std::vector<NodeId>& y, Coupling coupling,
                                      std::size_t m, double p_term) {
  if (coupling == Coupling::repelling)
    throw std::invalid_argument("closed form covers iid and transient repelling only");
  auto c = [&](const std::vector<NodeId>& w) {
    double q = 1.0;
    for (std::size_t s = 1; s < w.size(); ++s)
      q *= (1.0 - p_term) / static_cast<double>(g.degree(w[s - 1]));
    return q;
  };
  const double md = static_cast<double>(m);
  const double cx = c(x), cy = c(y);
  const bool tr = coupling == Coupling::transient_repelling;
  const double longer = x.size() >= y.size() ? cx : cy;
  switch (classify_walk_pair(x, y)) {
    case WalkPairClass::zero_length: return md * md * longer;
    case WalkPairClass::same: return tr ? md * cx : md * cx + md * (md - 1.0) * cx * cx;
    case WalkPairClass::subwalk: return tr ? md * longer : md * longer + md * (md - 1.0) * cx * cy;
    case WalkPairClass::diverge_at_start: {
      const double d = static_cast<double>(g.degree(x.front()));
      return (tr ? d / (d - 1.0) : 1.0) * md * (md - 1.0) * cx * cy;
    }
    case WalkPairClass::diverge_later: return tr ? 0.0 : md * (md - 1.0) * cx * cy;
  }
  return 0.0;
}

// ---------------------------------------------------------------------------
// Two-walker joint transition matrix and mutual information

/// Q over ordered node pairs (row index i1 * N + i2). iid: P (x) P.
/// Repelling: co-located walkers at a node of degree d > 1 never share a
/// neighbour, Q = P P [1 + delta_{i1 i2}((d/(d-1))(1 - delta_{j1 j2}) - 1)].
inline DenseMatrix joint_transition_matrix(const Graph& g, Coupling coupling) {
  require_exact_size(g);
  const std::size_t n = g.node_count();
  if (n * n > kMaxExactNodes) throw std::length_error("joint transition matrix too large");
  const DenseMatrix p = transition_matrix(g);
  const auto nn = static_cast<Eigen::Index>(n * n);
  DenseMatrix q = DenseMatrix::Zero(nn, nn);
  const bool repel = coupling != Coupling::iid;
  for (std::size_t i1 = 0; i1 < n; ++i1)
    for (std::size_t i2 = 0; i2 < n; ++i2)
      for (std::size_t j1 = 0; j1 < n; ++j1)
        for (std::size_t j2 = 0; j2 < n; ++j2) {
          double v = p(i1, j1) * p(i2, j2);
          const double d = static_cast<double>(g.degree(static_cast<NodeId>(i1)));
          if (repel && i1 == i2 && d > 1.0) v *= j1 == j2 ? 0.0 : d / (d - 1.0);
          q(i1 * n + i2, j1 * n + j2) = v;
        }
  return q;
}

/// I(v1; v2) for two walkers leaving `node` together, in nats.
inline double one_step_mutual_information(const Graph& g, NodeId node, Coupling coupling) {
  const std::size_t d = g.degree(node);
  if (d < 2) return 0.0;
  const auto law = group_move_law(2, d, coupling != Coupling::iid);
  std::vector<double> m1(d, 0.0), m2(d, 0.0);
  for (const auto& [pick, q] : law) {
    m1[pick[0]] += q;
    m2[pick[1]] += q;
  }
  double mi = 0.0;
  for (const auto& [pick, q] : law)
    if (q > 0.0) mi += q * std::log(q / (m1[pick[0]] * m2[pick[1]]));
  return mi;
}

// ---------------------------------------------------------------------------
// Markov-state propagation: (positions, alive) without history

/// Distribution of each walker's final node (terminated, or alive after
/// `horizon` rounds) for an ensemble launched from `starts`.
inline std::vector<DenseVector> final_node_distribution(const Graph& g,
                                                        const std::vector<NodeId>& starts,
                                                        EnsembleScheme scheme, double p_term,
                                                        std::size_t horizon) {
  const std::size_t m = starts.size();
  const auto n = static_cast<Eigen::Index>(g.node_count());
  std::vector<DenseVector> out(m, DenseVector::Zero(n));
  using State = std::pair<std::vector<NodeId>, std::vector<char>>;
  std::map<State, double> states{{{starts, std::vector<char>(m, 1)}, 1.0}};
  for (std::size_t step = 0; step < horizon && !states.empty(); ++step) {
    std::map<State, double> next;
    for (const auto& [state, prob] : states) {
      const auto& [pos, alive] = state;
      for (const auto& tb : termination_branches(alive, scheme.termination, p_term)) {
        std::vector<char> moving(m);
        for (std::size_t k = 0; k < m; ++k) {
          moving[k] = alive[k] && !tb.stop[k];
          if (alive[k] && tb.stop[k]) out[k](pos[k]) += prob * tb.probability;
        }
        if (std::none_of(moving.begin(), moving.end(), [](char c) { return c != 0; })) continue;
        for (const auto& mb : move_branches(g, pos, moving, coupling_active(scheme.coupling, step)))
          next[{mb.positions, moving}] += prob * tb.probability * mb.probability;
      }
    }
    states = std::move(next);
  }
  for (const auto& [state, prob] : states)
    for (std::size_t k = 0; k < m; ++k)
      if (state.second[k]) out[k](state.first[k]) += prob;
  return out;
}

/// E[pi_hat] for per-start-node ensembles of m walkers.
inline DenseVector expected_pagerank_estimate(const Graph& g, EnsembleScheme scheme,
                                              std::size_t m, double p_term, std::size_t horizon) {
  const auto n = static_cast<Eigen::Index>(g.node_count());
  DenseVector out = DenseVector::Zero(n);
  for (NodeId s = 0; s < g.node_count(); ++s)
    for (const auto& d : final_node_distribution(g, std::vector<NodeId>(m, s), scheme, p_term,
                                                 horizon))
      out += d;
  return out / static_cast<double>(g.node_count() * m);
}

// ---------------------------------------------------------------------------
// Exact feature moments

struct FeatureMoments {
  DenseVector mean;    // E[phi(i)]
  DenseMatrix second;  // E[phi(i) phi(i)^T]
};

/// Moments of phi(start) with edge weights `w` (dense, W'), under the exact
/// joint law over `horizon` rounds.
inline FeatureMoments exact_feature_moments(const Graph& g, const DenseMatrix& w, NodeId start,
                                            EnsembleScheme scheme, std::size_t m, double p_term,
                                            std::size_t horizon,
                                            double budget = kDefaultStateBudget) {
  const auto n = static_cast<Eigen::Index>(g.node_count());
  FeatureMoments out{DenseVector::Zero(n), DenseMatrix::Zero(n, n)};
  DenseVector phi(n);
  for_each_joint_outcome(
      g, std::vector<NodeId>(m, start), scheme, p_term, horizon,
      [&](const std::vector<WalkPath>& paths, double q) {
        phi.setZero();
        for (const auto& path : paths) {
          double load = 1.0;
          phi(path.nodes[0]) += load;
          for (std::size_t s = 1; s < path.nodes.size(); ++s) {
            const NodeId u = path.nodes[s - 1], v = path.nodes[s];
            load *= w(u, v) * static_cast<double>(g.degree(u)) / (1.0 - p_term);
            phi(v) += load;
          }
        }
        phi /= static_cast<double>(m);
        out.mean += q * phi;
        out.second += q * phi * phi.transpose();
      },
      budget);
  return out;
}

/// sum_{l <= horizon} W^l.
inline DenseMatrix truncated_resolvent(const DenseMatrix& w, std::size_t horizon) {
  const auto n = w.rows();
  DenseMatrix sum = DenseMatrix::Identity(n, n), power = DenseMatrix::Identity(n, n);
  for (std::size_t l = 1; l <= horizon; ++l) {
    power = power * w;
    sum += power;
  }
  return sum;
}

// ---------------------------------------------------------------------------
// Step-by-step functionals: exact variance of the ensemble sum

struct ExactTransientGap {
  double var_iid = 0.0;
  double var_tr = 0.0;
  double predicted_gap = 0.0;  // m(m-1)(1-p)^2 Var_a(E[h | v_1 = a]) / (d - 1)
  std::vector<double> conditional_means;
};

inline double exact_sum_variance(const Graph& g, NodeId start, const StepFunctionSpec& spec,
                                 EnsembleScheme scheme, std::size_t m, double p_term,
                                 double budget = kDefaultStateBudget) {
  double s1 = 0.0, s2 = 0.0;
  for_each_joint_outcome(
      g, std::vector<NodeId>(m, start), scheme, p_term, spec.horizon,
      [&](const std::vector<WalkPath>& paths, double q) {
        double y = 0.0;
        for (const auto& path : paths) {
          WalkRecord w{path.nodes, !path.terminated};
          y += evaluate_step_by_step(spec, w);
        }
        s1 += q * y;
        s2 += q * y * y;
      },
      budget);
  return s2 - s1 * s1;
}

/// Exact variances under iid and transient repelling ensembles (independent
/// termination) and the first-step prediction of their gap, m <= d_start.
inline ExactTransientGap exact_transient_gap(const Graph& g, NodeId start, const StepFunctionSpec& spec,
                                    std::size_t m, double p_term,
                                    double budget = kDefaultStateBudget) {
  const std::size_t d0 = g.degree(start);
  if (m > d0 || d0 < 2) throw std::invalid_argument("exact identity needs 2 <= d_start, m <= d_start");
  if (spec.horizon < 1) throw std::invalid_argument("horizon must be at least 1");
  ExactTransientGap out;
  out.var_iid = exact_sum_variance(g, start, spec, {Coupling::iid, Termination::independent}, m,
                                   p_term, budget);
  out.var_tr = exact_sum_variance(g, start, spec,
                                  {Coupling::transient_repelling, Termination::independent}, m,
                                  p_term, budget);
  const double f0 = spec.f(start, 0, false);
  for (const auto& nb : g.neighbors(start)) {
    double e = 0.0;
    for (const auto& [path, q] : simple_walk_law(g, nb.node, p_term, spec.horizon - 1)) {
      WalkRecord w;
      w.nodes = path.nodes;
      w.nodes.insert(w.nodes.begin(), start);
      e += q * (evaluate_step_by_step(spec, w) - f0);
    }
    out.conditional_means.push_back(e);
  }
  const double d = static_cast<double>(d0);
  double mu = 0.0;
  for (double e : out.conditional_means) mu += e / d;
  double var = 0.0;
  for (double e : out.conditional_means) var += (e - mu) * (e - mu) / d;
  out.predicted_gap = static_cast<double>(m * (m - 1)) * (1.0 - p_term) * (1.0 - p_term) * var /
                      (d - 1.0);
  return out;
}

}  // namespace rrw
