#pragma once

// Synchronous simulation of coupled walker ensembles.
//
// Each timestep first samples terminations for the live walkers, then moves
// the survivors. Under repelling coupling the walkers sharing a node are
// randomly permuted, cut into blocks of size d (plus one remainder block),
// and every block is sent to distinct neighbours chosen uniformly without
// replacement. Each walker's marginal law is the simple random walk in every
// scheme; only the joint law changes.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "graph.hpp"
#include "rng.hpp"

namespace rrw {

enum class Coupling { iid, repelling, transient_repelling };
enum class Termination { independent, antithetic_pairs };

inline std::string_view to_string(Coupling c) {
  switch (c) {
    case Coupling::iid: return "iid";
    case Coupling::repelling: return "repelling";
    case Coupling::transient_repelling: return "transient_repelling";
  }
  return "?";
}

inline std::string_view to_string(Termination t) {
  return t == Termination::independent ? "independent" : "antithetic_pairs";
}

/// Whether co-located walkers repel when leaving their nodes at `step`.
constexpr bool coupling_active(Coupling c, std::size_t step) noexcept {
  return c == Coupling::repelling || (c == Coupling::transient_repelling && step == 0);
}

/// Step cap whose truncation probability (1-p)^cap is below 1e-12.
inline std::size_t default_max_steps(double p_term) {
  if (!(p_term > 0.0 && p_term < 1.0)) throw std::invalid_argument("p_term must lie in (0,1)");
  return static_cast<std::size_t>(std::ceil(std::log(1e-12) / std::log1p(-p_term))) + 1;
}

struct EnsembleConfig {
  std::size_t walkers = 1;
  /// Per-step termination probability. Zero selects the fixed-budget mode in
  /// which every walker takes exactly max_steps steps.
  double p_term = 0.5;
  Coupling coupling = Coupling::iid;
  Termination termination = Termination::independent;
  std::size_t max_steps = 0;  // 0: default_max_steps(p_term)
  std::uint64_t seed = 0;

  std::size_t step_cap() const { return max_steps != 0 ? max_steps : default_max_steps(p_term); }

  void validate() const {
    if (walkers == 0) throw std::invalid_argument("ensemble needs at least one walker");
    if (!(p_term >= 0.0 && p_term < 1.0))
      throw std::invalid_argument("p_term must lie in [0,1)");
    if (p_term == 0.0 && max_steps == 0)
      throw std::invalid_argument("fixed-budget mode (p_term = 0) needs max_steps");
  }
};

struct WalkRecord {
  std::vector<NodeId> nodes;  // nodes[0] is the start
  bool truncated = false;     // still alive when the step cap was reached

  std::size_t length() const noexcept { return nodes.size() - 1; }
  NodeId start() const { return nodes.front(); }
  NodeId last() const { return nodes.back(); }
};

// ---------------------------------------------------------------------------
// Building blocks

/// Uniform random permutation of `ids` cut into floor(n/d) blocks of size d
/// followed by one remainder block of size n mod d (omitted when empty).
inline std::vector<std::vector<std::size_t>> partition_into_blocks(std::vector<std::size_t> ids,
                                                                   std::size_t d, Engine& rng) {
  if (d == 0) throw std::invalid_argument("block size must be positive");
  for (std::size_t k = ids.size(); k > 1; --k) std::swap(ids[k - 1], ids[uniform_index(rng, k)]);
  std::vector<std::vector<std::size_t>> blocks;
  for (std::size_t start = 0; start < ids.size(); start += d) {
    const std::size_t end = std::min(ids.size(), start + d);
    blocks.emplace_back(ids.begin() + static_cast<std::ptrdiff_t>(start),
                        ids.begin() + static_cast<std::ptrdiff_t>(end));
  }
  return blocks;
}

/// Sends the walkers of one block to distinct neighbours: walker k of the
/// block takes entry floor(u_k * r) of the r neighbours still free. The
/// resulting map is a uniformly random injection, and the first walker's
/// choice coincides with the independent choice floor(u * d).
/// Returns neighbour-list positions, aligned with `block`.
inline std::vector<std::size_t> assign_without_replacement(std::size_t block_size,
                                                           std::size_t degree,
                                                           std::span<const double> uniforms) {
  if (block_size > degree)
    throw std::invalid_argument("block larger than neighbour list");
  if (uniforms.size() < block_size) throw std::invalid_argument("not enough uniforms");
  std::vector<std::size_t> free(degree);
  for (std::size_t k = 0; k < degree; ++k) free[k] = k;
  std::vector<std::size_t> out(block_size);
  std::size_t remaining = degree;
  for (std::size_t k = 0; k < block_size; ++k) {
    const std::size_t pick = index_from_uniform(uniforms[k], remaining);
    out[k] = free[pick];
    free[pick] = free[remaining - 1];
    --remaining;
  }
  return out;
}

/// Convenience form drawing its own uniforms; returns (walker, neighbour)
/// pairs.
inline std::vector<std::pair<std::size_t, NodeId>> assign_without_replacement(
    std::span<const std::size_t> block, std::span<const Neighbor> neighbors, Engine& rng) {
  std::vector<double> u(block.size());
  for (auto& x : u) x = uniform01(rng);
  const auto picks = assign_without_replacement(block.size(), neighbors.size(), u);
  std::vector<std::pair<std::size_t, NodeId>> out;
  out.reserve(block.size());
  for (std::size_t k = 0; k < block.size(); ++k)
    out.emplace_back(block[k], neighbors[picks[k]].node);
  return out;
}

/// Marks which live walkers terminate this step. Under antithetic pairing,
/// walkers (0,1), (2,3), ... share one uniform u while both are alive: the
/// first stops iff u < p, the second iff u > 1 - p. A walker whose partner
/// is dead, or the unpaired last walker, uses its own Bernoulli(p) coin.
inline std::vector<char> sample_terminations(std::span<const char> alive, Termination scheme,
                                             double p, Engine& rng) {
  std::vector<char> stop(alive.size(), 0);
  if (p == 0.0) return stop;
  const std::size_t m = alive.size();
  if (scheme == Termination::independent) {
    for (std::size_t k = 0; k < m; ++k)
      if (alive[k]) stop[k] = uniform01(rng) < p;
    return stop;
  }
  for (std::size_t a = 0; a < m; a += 2) {
    const std::size_t b = a + 1;
    if (b < m && alive[a] && alive[b]) {
      const double u = uniform01(rng);
      stop[a] = u < p;
      stop[b] = u > 1.0 - p;
    } else {
      if (alive[a]) stop[a] = uniform01(rng) < p;
      if (b < m && alive[b]) stop[b] = uniform01(rng) < p;
    }
  }
  return stop;
}

// ---------------------------------------------------------------------------
// Ensemble simulation

/// Simulates one coupled ensemble with walker k launched from starts[k].
/// Walkers repel whenever they share a node, whatever their start.
inline std::vector<WalkRecord> simulate_ensemble(const Graph& g, std::span<const NodeId> starts,
                                                 const EnsembleConfig& config, RngStream& rng) {
  config.validate();
  const std::size_t m = starts.size();
  const std::size_t cap = config.step_cap();
  for (NodeId s : starts)
    if (s >= g.node_count()) throw std::out_of_range("start node out of range");

  std::vector<WalkRecord> walks(m);
  std::vector<char> alive(m, 1);
  std::vector<NodeId> pos(starts.begin(), starts.end());
  for (std::size_t k = 0; k < m; ++k) walks[k].nodes.push_back(starts[k]);

  std::vector<double> uniform(m, 0.0);
  // Live walkers bucketed by node; buckets touched this step listed in order.
  std::vector<std::vector<std::size_t>> bucket(g.node_count());
  std::vector<NodeId> touched;
  std::size_t live = m;

  for (std::size_t step = 0; live > 0; ++step) {
    const auto stop = sample_terminations(alive, config.termination, config.p_term,
                                          rng.termination);
    for (std::size_t k = 0; k < m; ++k)
      if (alive[k] && stop[k]) {
        alive[k] = 0;
        --live;
      }
    if (live == 0) break;
    if (step == cap) {
      for (std::size_t k = 0; k < m; ++k)
        if (alive[k]) walks[k].truncated = config.p_term > 0.0;
      break;
    }

    for (std::size_t k = 0; k < m; ++k)
      if (alive[k]) uniform[k] = uniform01(rng.movement);

    touched.clear();
    for (std::size_t k = 0; k < m; ++k) {
      if (!alive[k]) continue;
      if (bucket[pos[k]].empty()) touched.push_back(pos[k]);
      bucket[pos[k]].push_back(k);
    }
    std::sort(touched.begin(), touched.end());

    const bool coupled = coupling_active(config.coupling, step);
    for (NodeId v : touched) {
      auto& group = bucket[v];
      const auto& nbrs = g.neighbors(v);
      const std::size_t d = nbrs.size();
      if (!coupled || group.size() == 1 || d == 1) {
        for (std::size_t k : group) pos[k] = nbrs[index_from_uniform(uniform[k], d)].node;
      } else {
        for (const auto& block : partition_into_blocks(group, d, rng.partition)) {
          std::vector<double> u(block.size());
          for (std::size_t t = 0; t < block.size(); ++t) u[t] = uniform[block[t]];
          const auto picks = assign_without_replacement(block.size(), d, u);
          for (std::size_t t = 0; t < block.size(); ++t) pos[block[t]] = nbrs[picks[t]].node;
        }
      }
      group.clear();
    }
    for (std::size_t k = 0; k < m; ++k)
      if (alive[k]) walks[k].nodes.push_back(pos[k]);
  }
  return walks;
}

/// All config.walkers walkers launched from `start`.
inline std::vector<WalkRecord> simulate_ensemble(const Graph& g, NodeId start,
                                                 const EnsembleConfig& config, RngStream& rng) {
  if (start >= g.node_count()) throw std::out_of_range("start node out of range");
  std::vector<NodeId> starts(config.walkers, start);
  return simulate_ensemble(g, std::span<const NodeId>(starts), config, rng);
}

}  // namespace rrw
