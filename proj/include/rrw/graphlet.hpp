#pragma once

// Triangle concentration from fixed-length walks over consecutive triples.

#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "graph.hpp"
#include "rng.hpp"
#include "walk.hpp"

namespace rrw {

enum class TripleKind { wedge, triangle, discard };

inline TripleKind classify_3_state(const Graph& g, NodeId a, NodeId b, NodeId c) {
  if (!g.has_edge(a, b) || !g.has_edge(b, c))
    throw std::invalid_argument("triple is not a walk");
  if (a == c) return TripleKind::discard;
  return g.has_edge(a, c) ? TripleKind::triangle : TripleKind::wedge;
}

struct GraphletTally {
  double c_wed = 0.0;
  double c_tri = 0.0;
  std::size_t discarded = 0;
  std::size_t states_seen = 0;

  bool valid() const { return c_tri + c_wed > 0.0; }
  double concentration() const { return c_tri / (c_tri + c_wed); }

  void add(const Graph& g, const WalkRecord& walk) {
    for (std::size_t s = 2; s < walk.nodes.size(); ++s) {
      const NodeId a = walk.nodes[s - 2], b = walk.nodes[s - 1], c = walk.nodes[s];
      ++states_seen;
      const double d = static_cast<double>(g.degree(b));
      switch (classify_3_state(g, a, b, c)) {
        case TripleKind::discard: ++discarded; break;
        case TripleKind::triangle: c_tri += d / 6.0; break;
        case TripleKind::wedge: c_wed += d / 2.0; break;
      }
    }
  }
};

struct GraphletSample {
  double c_tri_hat = 0.0;
  bool valid = false;
  NodeId start = 0;
  GraphletTally tally;
};

inline constexpr std::uint64_t kGraphletStartPurpose = 0x6A7;

/// One trial: a start node drawn uniformly from the trial's auxiliary
/// engine, m walkers of exactly L steps pooled into one tally.
inline GraphletSample graphlet_trial(const Graph& g, std::size_t walk_len, Coupling coupling,
                                     std::size_t m, std::uint64_t seed, std::uint64_t trial) {
  if (walk_len < 3) throw std::invalid_argument("graphlet walks need L >= 3");
  EnsembleConfig cfg;
  cfg.walkers = m;
  cfg.p_term = 0.0;
  cfg.max_steps = walk_len;
  cfg.coupling = coupling;
  cfg.seed = seed;
  Engine pick = auxiliary_engine(seed, trial, kGraphletStartPurpose);
  GraphletSample out;
  out.start = static_cast<NodeId>(uniform_index(pick, g.node_count()));
  RngStream rng = substream(seed, trial, 0);
  for (const auto& w : simulate_ensemble(g, out.start, cfg, rng)) out.tally.add(g, w);
  out.valid = out.tally.valid();
  out.c_tri_hat = out.valid ? out.tally.concentration() : 0.0;
  return out;
}

inline std::vector<GraphletSample> estimate_triangle_concentration(const Graph& g,
                                                                   std::size_t walk_len,
                                                                   std::size_t m,
                                                                   Coupling coupling,
                                                                   std::size_t trials,
                                                                   std::uint64_t seed) {
  std::vector<GraphletSample> out;
  out.reserve(trials);
  for (std::size_t t = 0; t < trials; ++t)
    out.push_back(graphlet_trial(g, walk_len, coupling, m, seed, t));
  return out;
}

}  // namespace rrw
